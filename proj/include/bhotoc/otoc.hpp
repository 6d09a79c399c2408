#pragma once

// Quasiclassical OTOC estimators.
//
//   C_cl(t) = < ( grad A(X_t)^T M(t) Jsym grad B(X_0) )^2 >_W
//   C_inf   = < ( sum_k dAbar/dc_k (c(X)) {c_k, B}(X) )^2 >_W
//
// where Abar(c) is the ergodic (time) average of A on the shell of the
// constants of motion c = (E, N) for autonomous systems and c = (N) otherwise.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bhotoc/classical.hpp"
#include "bhotoc/model.hpp"
#include "bhotoc/sampling.hpp"
#include "bhotoc/series.hpp"

namespace bhotoc {

/// Maximum fraction of blown-up samples tolerated by classical_otoc().
inline constexpr double kMaxExcludedFraction = 1e-3;

/// One trajectory and one tangent vector per sample, advanced through the grid.
OTOCSeries classical_otoc(const BoseHubbardParams& params, const SamplerSpec& spec, const Observable& A,
                          const Observable& B, const std::vector<double>& times, std::size_t count,
                          const FlowConfig& cfg, std::size_t workers = 1);

enum class ProfileDerivative {
  /// Weighted least-squares plane (tricube weights) through the time averages
  /// of the span * n_traj profile trajectories nearest to the evaluation point
  /// in whitened constants, evaluated at each sample's own constants.
  local_linear,
  /// Central differences of cell means, one-sided at the edges.
  finite_difference,
};

struct CinfConfig {
  std::size_t n_traj = 512;
  double horizon = 2000.0;
  double burn_in = 100.0;
  std::size_t e_bins = 32;
  /// 0 selects 16 bins when E is an axis and 64 when N is the only one.
  std::size_t n_bins = 0;
  /// Cells with fewer trajectories are invalid.
  std::size_t min_count = 2;
  ProfileDerivative derivative = ProfileDerivative::local_linear;
  /// local_linear neighbourhood as a fraction of n_traj; 0 selects it by
  /// leave-one-out cross-validation.
  double span = 0.0;
  /// local_linear: fit two disjoint halves of the profile and average the
  /// product of their chain-rule terms, which removes the upward bias that
  /// slope noise gives a squared slope.
  bool cross_fit = true;
  /// local_linear neighbourhoods hold at least this many trajectories.
  std::size_t min_fit = 16;
  /// finite_difference spans +-fd_stride cells.
  std::size_t fd_stride = 1;
  /// Profile trajectories have X scaled by sqrt(1 + broaden * u), u uniform in
  /// [-1, 1], which spreads N by about +-broaden * N. Needed when the sampler
  /// fixes N exactly (Fock rings) and dAbar/dN enters the result.
  double broaden = 0.0;
  /// Integrator step of the profile trajectories; 0 uses the flow config.
  double dt = 0.0;
  /// Error when more samples than this fraction fall into invalid cells.
  double max_excluded = 0.05;

  void validate() const;
};

struct ProfileAxis {
  std::string name;  // "E" or "N"
  double lo = 0.0;
  double hi = 0.0;
  std::size_t bins = 1;

  /// Bin of c, or nullopt outside [lo, hi].
  std::optional<std::size_t> locate(double c) const;
  double center(std::size_t i) const;
};

/// Abar binned over the constants of motion, with per-axis finite differences.
struct ErgodicProfile {
  std::vector<ProfileAxis> axes;     // (E, N) or (N)
  std::vector<std::size_t> count;    // per cell, row-major in axis order
  std::vector<double> abar;
  std::vector<double> abar_err;
  std::vector<std::vector<double>> c_mean;  // per axis, per cell
  std::vector<std::uint8_t> valid;
  std::vector<std::vector<double>> dA_dc;   // per axis, per cell
  std::vector<std::vector<std::uint8_t>> dA_valid;

  std::size_t cells() const { return abar.size(); }
  std::optional<std::size_t> locate(std::span<const double> c) const;
  /// Per-axis bin indices of a cell.
  std::vector<std::size_t> unflatten(std::size_t cell) const;
};

struct CinfResult {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  /// local_linear neighbourhood actually used (fraction of the trajectories
  /// in each fit, averaged over the halves when cross-fitting), 0 for finite
  /// differences.
  double span = 0.0;
  ErgodicProfile profile;
};

/// Constants of motion used as profile axes: (E, N) when autonomous, else (N).
std::vector<double> motion_constants(const BoseHubbardParams& params, const PhaseSpacePoint& x, bool weyl_corrected);

CinfResult cinf(const BoseHubbardParams& params, const SamplerSpec& spec, const Observable& A, const Observable& B,
                const CinfConfig& pcfg, std::size_t count, const FlowConfig& cfg, std::size_t workers = 1);

/// Weyl symbol of A^2 for an at-most-quadratic A:
///   A^2 - (hbar^2/8) sum sigma_k sigma_l d2_kl A d2_{k'l'} A
///     = A^2 - (1/4) [ sum_lm A_{q_l q_m} A_{p_l p_m} - tr(A_qp A_qp) ].
/// ConfigError for number_squared (quartic).
double weyl_square(const Observable& A, const PhaseSpacePoint& x);
/// Hessian of the symbol, row-major 2L x 2L. Constant for the supported kinds.
std::vector<double> observable_hessian(const Observable& A, std::size_t sites);

/// H = p^2/2 + V(q).
struct OneDofHamiltonian {
  std::string name;
  std::function<double(double)> potential;
  std::function<double(double)> force;  // dV/dq

  /// V(q) = sqrt(1 + q^2)
  static OneDofHamiltonian sqrt_well();
};

struct FamilyConfig {
  double p_min = -3.0;
  double p_max = 3.0;
  std::size_t steps = 2001;
  double dt = 1e-3;
  double root_tol = 1e-12;

  void validate() const;
};

struct FamilyResult {
  std::vector<double> roots;
  /// Roots sitting on the first or last grid point.
  std::vector<double> unresolved;
  std::size_t branches = 0;
  std::size_t families = 0;
  std::vector<double> p0;
  std::vector<double> q_t;
};

/// q_t for a trajectory started at (q0, p0).
double one_dof_position(const OneDofHamiltonian& h, double q0, double p0, double t, double dt);

FamilyResult family_count(const OneDofHamiltonian& h, double q0, double q_target, double t, const FamilyConfig& cfg);

}  // namespace bhotoc
