#pragma once

// Mean-field (Weyl-symbol) dynamics of the Bose-Hubbard chain in quadrature
// coordinates X = (q_1..q_L, p_1..p_L), hbar = 1, b_l ~ (q_l + i p_l)/sqrt(2).

#include <optional>
#include <span>
#include <vector>

#include "bhotoc/model.hpp"

namespace bhotoc {

class PhaseSpacePoint {
 public:
  PhaseSpacePoint() = default;
  explicit PhaseSpacePoint(std::size_t sites) : x_(2 * sites, 0.0) {}
  explicit PhaseSpacePoint(std::vector<double> x);
  static PhaseSpacePoint from_qp(std::span<const double> q, std::span<const double> p);

  std::size_t sites() const { return x_.size() / 2; }
  std::size_t size() const { return x_.size(); }
  double q(std::size_t l) const { return x_[l]; }
  double p(std::size_t l) const { return x_[sites() + l]; }
  double& q(std::size_t l) { return x_[l]; }
  double& p(std::size_t l) { return x_[sites() + l]; }
  double operator[](std::size_t i) const { return x_[i]; }
  double& operator[](std::size_t i) { return x_[i]; }
  std::span<const double> data() const { return x_; }
  std::span<double> data() { return x_; }
  bool finite() const;

  /// Weyl occupation (q^2 + p^2 - 1)/2.
  double occupation(std::size_t l) const { return 0.5 * (q(l) * q(l) + p(l) * p(l) - 1.0); }
  /// atan2(p_l, q_l)
  double phase(std::size_t l) const;

 private:
  std::vector<double> x_;
};

/// Monodromy M(t) = dX_t / dX_0, row-major 2L x 2L.
class TangentMatrix {
 public:
  TangentMatrix() = default;
  static TangentMatrix identity(std::size_t dim);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t r, std::size_t c) const { return m_[r * n_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return m_[r * n_ + c]; }
  /// max |M^T Jsym M - Jsym|
  double symplectic_defect() const;
  /// max |M_ij|
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> m_;
};

enum class Integrator { rk4 };

struct FlowConfig {
  double dt = 1e-3;
  Integrator method = Integrator::rk4;
  /// true: H_cl is the Weyl symbol of H; false: bare Gross-Pitaevskii energy.
  bool weyl_corrected = true;

  void validate() const;
};

/// H_cl(t, X). With weyl_corrected the on-site part is the exact Weyl symbol
///   (n^)_W = n,  (n^(n^-1))_W = n^2 - n - 1/4,   n = (q^2 + p^2 - 1)/2,
/// otherwise E n~ + U/2 n~^2 with n~ = (q^2 + p^2)/2.
double hcl(const BoseHubbardParams& params, double t, const PhaseSpacePoint& x, bool weyl_corrected = true);
/// dH_cl/dX
std::vector<double> hcl_gradient(const BoseHubbardParams& params, double t, const PhaseSpacePoint& x,
                                 bool weyl_corrected = true);

/// Hamilton's equations plus variational equations for a set of tangent
/// vectors, integrated by one fixed-step RK4 so the tangent vectors follow
/// the exact linearization of the discrete map.
class TrajectoryIntegrator {
 public:
  TrajectoryIntegrator(const BoseHubbardParams& params, const FlowConfig& cfg, PhaseSpacePoint x0, double t0,
                       std::size_t tangent_vectors = 0);

  /// Tangent vector k, length 2L.
  std::span<double> tangent(std::size_t k) { return {y_.data() + (k + 1) * dim_, dim_}; }
  std::span<const double> tangent(std::size_t k) const { return {y_.data() + (k + 1) * dim_, dim_}; }
  std::size_t tangent_count() const { return k_; }

  /// Advances to t1 in ceil(|t1 - t|/dt) equal steps (t1 < t runs backward).
  /// Throws NumericalError naming the time when the state stops being finite.
  void advance_to(double t1);
  /// One step of signed size h.
  void step(double h);

  double time() const { return t_; }
  const PhaseSpacePoint& state() const { return x_; }
  const BoseHubbardParams& params() const { return params_; }
  const FlowConfig& config() const { return cfg_; }

  /// dX/dt at (t, x), exposed for section refinement.
  void vector_field(double t, std::span<const double> x, std::span<double> dx) const;

 private:
  // d/dt of the augmented state [X, V_0, ..., V_{k-1}]
  void rhs(double t, const double* y, double* dy, std::size_t k) const;
  // One step on y_ without refreshing x_.
  void rk4(double h);
  void sync();

  BoseHubbardParams params_;
  FlowConfig cfg_;
  std::size_t L_;
  std::size_t dim_;
  std::size_t k_;
  double t_;
  PhaseSpacePoint x_;  // mirrors the head of y_ after every public step
  std::vector<double> y_, k1_, k2_, k3_, k4_, tmp_;
  mutable std::vector<double> e_;
};

struct FlowResult {
  PhaseSpacePoint x;
  std::optional<TangentMatrix> m;
};

/// X_{t0 + t} and optionally M, starting from X0 at time t0. t may be negative.
FlowResult flow(const BoseHubbardParams& params, const PhaseSpacePoint& x0, double t, const FlowConfig& cfg,
                bool with_tangent, double t0 = 0.0);

struct Conserved {
  /// Only for autonomous systems.
  std::optional<double> energy;
  double number = 0.0;
};

/// N = sum_l (q_l^2 + p_l^2 - 1)/2, E = H_cl when the drive is off.
Conserved conserved(const BoseHubbardParams& params, const PhaseSpacePoint& x, bool weyl_corrected = true);
double total_number(const PhaseSpacePoint& x);

struct LyapunovResult {
  double exponent = 0.0;
  std::vector<double> times;
  std::vector<double> running;  // running average of the log growth rate
};

/// Benettin estimate of the largest exponent: one tangent vector, renormalized
/// every `renorm`, averaged over [0, horizon].
LyapunovResult lyapunov(const BoseHubbardParams& params, const PhaseSpacePoint& x0, double horizon, double renorm,
                        const FlowConfig& cfg);

/// Weyl symbol of an observable at X.
double observable_value(const Observable& obs, const PhaseSpacePoint& x);
/// Analytic gradient of the symbol.
std::vector<double> grad_observable(const Observable& obs, const PhaseSpacePoint& x);

/// Poisson bracket {f, g} = grad f^T Jsym grad g.
double poisson_bracket(std::span<const double> grad_f, std::span<const double> grad_g);
/// Jsym v = (v_p, -v_q)
std::vector<double> apply_symplectic(std::span<const double> v);

}  // namespace bhotoc
