#include "bhotoc/classical.hpp"

#include <cmath>
#include <string>

#include "bhotoc/error.hpp"

namespace bhotoc {

PhaseSpacePoint::PhaseSpacePoint(std::vector<double> x) : x_(std::move(x)) {
  if (x_.size() % 2 != 0) throw ConfigError("phase-space point must have an even length (q..., p...)");
}

PhaseSpacePoint PhaseSpacePoint::from_qp(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw ConfigError("phase-space point: q and p differ in length");
  std::vector<double> x(q.begin(), q.end());
  x.insert(x.end(), p.begin(), p.end());
  return PhaseSpacePoint(std::move(x));
}

bool PhaseSpacePoint::finite() const {
  for (double v : x_)
    if (!std::isfinite(v)) return false;
  return true;
}

double PhaseSpacePoint::phase(std::size_t l) const { return std::atan2(p(l), q(l)); }

TangentMatrix TangentMatrix::identity(std::size_t dim) {
  TangentMatrix m;
  m.n_ = dim;
  m.m_.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

double TangentMatrix::symplectic_defect() const {
  const std::size_t L = n_ / 2;
  double worst = 0.0;
  // (M^T J M)_{ij} = sum_l M_{l,i} M_{L+l,j} - M_{L+l,i} M_{l,j}
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < L; ++l) s += (*this)(l, i) * (*this)(L + l, j) - (*this)(L + l, i) * (*this)(l, j);
      double target = 0.0;
      if (i < L && j == i + L) target = 1.0;
      if (i >= L && j + L == i) target = -1.0;
      worst = std::max(worst, std::abs(s - target));
    }
  }
  return worst;
}

double TangentMatrix::max_abs() const {
  double m = 0.0;
  for (double v : m_) m = std::max(m, std::abs(v));
  return m;
}

void FlowConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("flow: dt must be > 0");
}

namespace {

// Offset inside the on-site force U (s - c), s = (q^2 + p^2)/2: c = 1 for the
// Weyl symbol U/2 (n^2 - n - 1/4) with n = s - 1/2, c = 0 for the bare U/2 s^2.
double interaction_offset(bool weyl) { return weyl ? 1.0 : 0.0; }

}  // namespace

double hcl(const BoseHubbardParams& params, double t, const PhaseSpacePoint& x, bool weyl_corrected) {
  const std::size_t L = params.sites;
  if (x.sites() != L) throw ConfigError("hcl: phase-space point has the wrong number of sites");
  double h = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double e = params.onsite_energy(l, t);
    const double s = 0.5 * (x.q(l) * x.q(l) + x.p(l) * x.p(l));
    if (weyl_corrected) {
      const double n = s - 0.5;
      h += e * n + 0.5 * params.U * (n * n - n - 0.25);
    } else {
      h += e * s + 0.5 * params.U * s * s;
    }
  }
  for (std::size_t l = 0; l + 1 < L; ++l) h -= params.J * (x.q(l) * x.q(l + 1) + x.p(l) * x.p(l + 1));
  return h;
}

std::vector<double> hcl_gradient(const BoseHubbardParams& params, double t, const PhaseSpacePoint& x,
                                 bool weyl_corrected) {
  const std::size_t L = params.sites;
  std::vector<double> g(2 * L);
  const double c = interaction_offset(weyl_corrected);
  for (std::size_t l = 0; l < L; ++l) {
    const double s = 0.5 * (x.q(l) * x.q(l) + x.p(l) * x.p(l));
    const double w = params.onsite_energy(l, t) + params.U * (s - c);
    g[l] = w * x.q(l);
    g[L + l] = w * x.p(l);
    if (l > 0) {
      g[l] -= params.J * x.q(l - 1);
      g[L + l] -= params.J * x.p(l - 1);
    }
    if (l + 1 < L) {
      g[l] -= params.J * x.q(l + 1);
      g[L + l] -= params.J * x.p(l + 1);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

TrajectoryIntegrator::TrajectoryIntegrator(const BoseHubbardParams& params, const FlowConfig& cfg, PhaseSpacePoint x0,
                                           double t0, std::size_t tangent_vectors)
    : params_(params),
      cfg_(cfg),
      L_(params.sites),
      dim_(2 * params.sites),
      k_(tangent_vectors),
      t_(t0),
      x_(std::move(x0)),
      e_(params.sites) {
  params_.validate();
  cfg_.validate();
  if (x_.sites() != L_) throw ConfigError("flow: phase-space point has the wrong number of sites");
  const std::size_t n = dim_ * (1 + k_);
  y_.assign(n, 0.0);
  params_.onsite_energies(t_, e_);
  std::copy(x_.data().begin(), x_.data().end(), y_.begin());
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
}

void TrajectoryIntegrator::rhs(double t, const double* y, double* dy, std::size_t tangents) const {
  const std::size_t L = L_;
  const double U = params_.U;
  const double J = params_.J;
  const double c = interaction_offset(cfg_.weyl_corrected);
  if (params_.drive) params_.onsite_energies(t, e_);

  const double* q = y;
  const double* p = y + L;
  double* dq = dy;
  double* dp = dy + L;
  for (std::size_t l = 0; l < L; ++l) {
    const double w = e_[l] + U * (0.5 * (q[l] * q[l] + p[l] * p[l]) - c);
    double gq = w * q[l];
    double gp = w * p[l];
    if (l > 0) {
      gq -= J * q[l - 1];
      gp -= J * p[l - 1];
    }
    if (l + 1 < L) {
      gq -= J * q[l + 1];
      gp -= J * p[l + 1];
    }
    dq[l] = gp;
    dp[l] = -gq;
  }

  // Variational equations: dV/dt = Jsym Hess(H) V
  for (std::size_t k = 0; k < tangents; ++k) {
    const double* vq = y + dim_ * (k + 1);
    const double* vp = vq + L;
    double* dvq = dy + dim_ * (k + 1);
    double* dvp = dvq + L;
    for (std::size_t l = 0; l < L; ++l) {
      const double w = e_[l] + U * (0.5 * (q[l] * q[l] + p[l] * p[l]) - c);
      const double proj = U * (q[l] * vq[l] + p[l] * vp[l]);
      double hq = w * vq[l] + proj * q[l];
      double hp = w * vp[l] + proj * p[l];
      if (l > 0) {
        hq -= J * vq[l - 1];
        hp -= J * vp[l - 1];
      }
      if (l + 1 < L) {
        hq -= J * vq[l + 1];
        hp -= J * vp[l + 1];
      }
      dvq[l] = hp;
      dvp[l] = -hq;
    }
  }
}

void TrajectoryIntegrator::vector_field(double t, std::span<const double> x, std::span<double> dx) const {
  rhs(t, x.data(), dx.data(), 0);
}

void TrajectoryIntegrator::rk4(double h) {
  const std::size_t n = y_.size();
  rhs(t_, y_.data(), k1_.data(), k_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y_[i] + 0.5 * h * k1_[i];
  rhs(t_ + 0.5 * h, tmp_.data(), k2_.data(), k_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y_[i] + 0.5 * h * k2_[i];
  rhs(t_ + 0.5 * h, tmp_.data(), k3_.data(), k_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y_[i] + h * k3_[i];
  rhs(t_ + h, tmp_.data(), k4_.data(), k_);
  const double h6 = h / 6.0;
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    y_[i] += h6 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    finite = finite && std::isfinite(y_[i]);
  }
  if (!finite) throw NumericalError("flow: non-finite state at t = " + std::to_string(t_ + h));
  t_ += h;
}

void TrajectoryIntegrator::sync() {
  std::copy(y_.begin(), y_.begin() + static_cast<std::ptrdiff_t>(dim_), x_.data().begin());
}

void TrajectoryIntegrator::step(double h) {
  rk4(h);
  sync();
}

void TrajectoryIntegrator::advance_to(double t1) {
  const double span = t1 - t_;
  if (span == 0.0) return;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(span) / cfg_.dt - 1e-9)));
  const double h = span / static_cast<double>(steps);
  const double start = t_;
  for (std::size_t i = 0; i < steps; ++i) rk4(h);
  sync();
  t_ = start + span;  // no accumulated rounding in the clock
}

FlowResult flow(const BoseHubbardParams& params, const PhaseSpacePoint& x0, double t, const FlowConfig& cfg,
                bool with_tangent, double t0) {
  const std::size_t dim = x0.size();
  TrajectoryIntegrator integ(params, cfg, x0, t0, with_tangent ? dim : 0);
  if (with_tangent)
    for (std::size_t k = 0; k < dim; ++k) integ.tangent(k)[k] = 1.0;
  integ.advance_to(t0 + t);
  FlowResult r{integ.state(), std::nullopt};
  if (with_tangent) {
    TangentMatrix m = TangentMatrix::identity(dim);
    for (std::size_t c = 0; c < dim; ++c)
      for (std::size_t r2 = 0; r2 < dim; ++r2) m(r2, c) = integ.tangent(c)[r2];
    r.m = std::move(m);
  }
  return r;
}

double total_number(const PhaseSpacePoint& x) {
  double n = 0.0;
  for (std::size_t l = 0; l < x.sites(); ++l) n += x.occupation(l);
  return n;
}

Conserved conserved(const BoseHubbardParams& params, const PhaseSpacePoint& x, bool weyl_corrected) {
  Conserved c;
  c.number = total_number(x);
  if (params.autonomous()) c.energy = hcl(params, 0.0, x, weyl_corrected);
  return c;
}

LyapunovResult lyapunov(const BoseHubbardParams& params, const PhaseSpacePoint& x0, double horizon, double renorm,
                        const FlowConfig& cfg) {
  if (!(renorm > 0.0) || !(horizon > renorm))
    throw ConfigError("lyapunov: requires horizon > renorm > 0");
  TrajectoryIntegrator integ(params, cfg, x0, 0.0, 1);
  auto v = integ.tangent(0);
  const double init = 1.0 / std::sqrt(static_cast<double>(v.size()));
  for (double& c : v) c = init;

  LyapunovResult res;
  const auto blocks = static_cast<std::size_t>(std::ceil(horizon / renorm - 1e-9));
  double log_sum = 0.0;
  for (std::size_t b = 1; b <= blocks; ++b) {
    const double t = std::min(horizon, static_cast<double>(b) * renorm);
    integ.advance_to(t);
    double nrm = 0.0;
    for (double c : v) nrm += c * c;
    nrm = std::sqrt(nrm);
    log_sum += std::log(nrm);
    for (double& c : v) c /= nrm;
    res.times.push_back(t);
    res.running.push_back(log_sum / t);
  }
  res.exponent = res.running.back();
  return res;
}

double observable_value(const Observable& obs, const PhaseSpacePoint& x) {
  switch (obs.kind) {
    case ObservableKind::number: return x.occupation(obs.site);
    case ObservableKind::quadrature_q: return x.q(obs.site);
    case ObservableKind::quadrature_p: return x.p(obs.site);
    case ObservableKind::number_squared: {
      const double n = x.occupation(obs.site);
      return n * n - 0.25;
    }
    case ObservableKind::p_squared: return x.p(obs.site) * x.p(obs.site);
    case ObservableKind::total_number: return total_number(x);
  }
  return 0.0;
}

std::vector<double> grad_observable(const Observable& obs, const PhaseSpacePoint& x) {
  const std::size_t L = x.sites();
  if (obs.kind != ObservableKind::total_number && obs.site >= L)
    throw ConfigError("observable " + obs.name() + ": site index beyond the lattice");
  std::vector<double> g(2 * L, 0.0);
  const std::size_t i = obs.site;
  switch (obs.kind) {
    case ObservableKind::number:
      g[i] = x.q(i);
      g[L + i] = x.p(i);
      break;
    case ObservableKind::quadrature_q: g[i] = 1.0; break;
    case ObservableKind::quadrature_p: g[L + i] = 1.0; break;
    case ObservableKind::number_squared: {
      const double n2 = 2.0 * x.occupation(i);
      g[i] = n2 * x.q(i);
      g[L + i] = n2 * x.p(i);
      break;
    }
    case ObservableKind::p_squared: g[L + i] = 2.0 * x.p(i); break;
    case ObservableKind::total_number:
      for (std::size_t k = 0; k < 2 * L; ++k) g[k] = x[k];
      break;
  }
  return g;
}

double poisson_bracket(std::span<const double> grad_f, std::span<const double> grad_g) {
  const std::size_t L = grad_f.size() / 2;
  double s = 0.0;
  for (std::size_t l = 0; l < L; ++l) s += grad_f[l] * grad_g[L + l] - grad_f[L + l] * grad_g[l];
  return s;
}

std::vector<double> apply_symplectic(std::span<const double> v) {
  const std::size_t L = v.size() / 2;
  std::vector<double> out(v.size());
  for (std::size_t l = 0; l < L; ++l) {
    out[l] = v[L + l];
    out[L + l] = -v[l];
  }
  return out;
}

}  // namespace bhotoc
