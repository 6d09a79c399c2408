#pragma once

// Brute-force reference computations. They share no numerical code with the
// production paths they check (dense Eigen algebra instead of CSR kernels and
// Krylov steps, finite differences instead of tangent dynamics and analytic
// Hessians).

#include <functional>
#include <span>
#include <vector>

#include "bhotoc/classical.hpp"
#include "bhotoc/model.hpp"

namespace bhotoc::oracle {

/// || (A B - B A) psi ||^2 with dense matrices.
double dense_commutator_norm2(const SparseOperator& A, const SparseOperator& B, std::span<const cplx> psi);

/// exp(-i H t) psi for a time-independent H by dense diagonalization.
std::vector<cplx> dense_evolve(const SparseOperator& H, std::span<const cplx> psi, double t);

/// Central difference (f(X_t(x0 + eps v)) - f(X_t(x0 - eps v))) / (2 eps).
double fd_flow_derivative(const BoseHubbardParams& params, const PhaseSpacePoint& x0, std::span<const double> v,
                          double eps, double t, const FlowConfig& cfg,
                          const std::function<double(const PhaseSpacePoint&)>& f);

/// Central-difference gradient of f at x.
std::vector<double> fd_gradient(const std::function<double(const PhaseSpacePoint&)>& f, const PhaseSpacePoint& x,
                                double h);

/// f * f - (hbar^2 / 8) Pi^2(f, f) with the bidifferential operator
/// Pi^2(f, g) = sum_lm [ f_{q_l q_m} g_{p_l p_m} - 2 f_{q_l p_m} g_{p_l q_m} + f_{p_l p_m} g_{q_l q_m} ]
/// evaluated by central differences with step h (exact for quadratic f).
double moyal_square(const std::function<double(const PhaseSpacePoint&)>& f, const PhaseSpacePoint& x, double hbar,
                    double h);

}  // namespace bhotoc::oracle
