#pragma once

// Exact Fock-space dynamics and the quantum OTOC
//   C(t) = <psi| |[A(t), B]|^2 |psi>,  A(t) = U^+(t) A U(t).

#include <memory>
#include <span>
#include <vector>

#include "bhotoc/model.hpp"
#include "bhotoc/series.hpp"

namespace bhotoc {

struct PropagatorConfig {
  /// Substep (1/J). H is frozen at each substep midpoint.
  double dt = 1e-3;
  /// Maximum Lanczos subspace per exponential.
  std::size_t krylov_dim = 12;
  /// Allowed relative norm drift per evolve() call.
  double norm_tol = 1e-8;
  /// Maximum population on the cutoff shell (truncated bases).
  double leakage_tol = 1e-6;
  /// Local error target of one Krylov exponential; substeps are split when missed.
  double krylov_tol = 1e-12;

  void validate() const;
};

class StateVector {
 public:
  StateVector(std::shared_ptr<const FockBasis> basis, std::vector<cplx> amplitudes);

  const FockBasis& basis() const { return *basis_; }
  std::shared_ptr<const FockBasis> basis_ptr() const { return basis_; }
  std::span<const cplx> amplitudes() const { return amp_; }
  std::span<cplx> amplitudes() { return amp_; }
  double norm() const;
  /// |<this|other>|^2 for normalized states.
  double fidelity(const StateVector& other) const;
  double expectation(const SparseOperator& op) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<cplx> amp_;
};

/// alpha_l = sqrt(n_l) e^{i theta_l}
std::vector<cplx> coherent_amplitudes(std::span<const double> occupations, std::span<const double> phases);

/// Number-projected coherent state on a fixed-N basis, truncated product
/// coherent state on a truncated basis. Normalized.
StateVector coherent_state(std::shared_ptr<const FockBasis> basis, std::span<const cplx> alpha);
StateVector fock_state(std::shared_ptr<const FockBasis> basis, std::span<const std::uint32_t> occupations);

/// H(t) split into a fixed real off-diagonal part and a diagonal that carries
/// the on-site energies, so the time dependence costs one diagonal rebuild.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix(const BoseHubbardParams& params, const FockBasis& basis);

  std::size_t dim() const { return static_diag_.size(); }
  /// Refreshes the diagonal for time t.
  void set_time(double t);
  /// y = H(t) x for the last set_time().
  void apply(std::span<const cplx> x, std::span<cplx> y) const;

 private:
  BoseHubbardParams params_;
  std::vector<double> static_diag_;
  std::vector<std::vector<double>> site_numbers_;  // n_l per row, only for time-dependent sites
  std::vector<double> diag_;
  std::vector<std::uint32_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

/// exp(-i H tau) v by a Lanczos projection with at most max_dim vectors.
/// Splits tau recursively until the a-posteriori error estimate meets tol.
class KrylovExponentiator {
 public:
  KrylovExponentiator(std::size_t dim, std::size_t max_dim, double tol);
  void apply(const HamiltonianMatrix& h, double tau, std::span<cplx> v);
  std::size_t matvecs() const { return matvecs_; }

 private:
  /// Returns false when the error estimate misses tol; v is untouched then.
  bool try_step(const HamiltonianMatrix& h, double tau, std::span<cplx> v);

  std::size_t max_dim_;
  double tol_;
  std::vector<std::vector<cplx>> basis_;
  std::vector<cplx> w_;
  std::size_t matvecs_ = 0;
};

/// Time-ordered propagator of a Bose-Hubbard system on one basis.
class Propagator {
 public:
  Propagator(const BoseHubbardParams& params, std::shared_ptr<const FockBasis> basis, PropagatorConfig cfg);

  /// Propagates v from t0 to t1 in ceil(|t1 - t0| / dt) equal substeps. A
  /// backward pass over the same interval applies the exact inverse.
  void advance(std::span<cplx> v, double t0, double t1);
  /// Population fraction on the truncation shell (0 on fixed-N bases).
  double cutoff_population(std::span<const cplx> v) const;
  /// Throws NumericalError when the shell population exceeds leakage_tol.
  void check_leakage(std::span<const cplx> v) const;

  const PropagatorConfig& config() const { return cfg_; }
  const FockBasis& basis() const { return *basis_; }

 private:
  std::shared_ptr<const FockBasis> basis_;
  PropagatorConfig cfg_;
  HamiltonianMatrix h_;
  KrylovExponentiator krylov_;
  std::vector<std::uint32_t> shell_rows_;
};

StateVector evolve(const StateVector& state, const BoseHubbardParams& params, double t0, double t1,
                   const PropagatorConfig& cfg);

/// Four propagation legs per grid point; forward legs are advanced grid point
/// to grid point, backward legs retrace the same substeps.
OTOCSeries quantum_otoc(const BoseHubbardParams& params, const StateVector& psi0, const SparseOperator& A,
                        const SparseOperator& B, const std::vector<double>& times, const PropagatorConfig& cfg);

}  // namespace bhotoc
