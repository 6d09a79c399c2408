#include "bhotoc/sections.hpp"

#include <cmath>
#include <numbers>

#include "bhotoc/error.hpp"

namespace bhotoc {

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

namespace {

// Henon's trick: integrate dX/ds = F/F_{p2}, dt/ds = 1/F_{p2} with s = p_2
// from the current value to 0 in one RK4 step.
std::pair<PhaseSpacePoint, double> land_on_section(const TrajectoryIntegrator& integ, const PhaseSpacePoint& x,
                                                   double t) {
  const std::size_t n = x.size();
  const std::size_t ip2 = x.sites() + 1;
  std::vector<double> y(n + 1), tmp(n + 1), dx(n);
  std::vector<double> k[4];
  for (auto& v : k) v.resize(n + 1);
  std::copy(x.data().begin(), x.data().end(), y.begin());
  y[n] = t;

  auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
    integ.vector_field(in[n], std::span<const double>(in.data(), n), dx);
    if (dx[ip2] == 0.0) throw NumericalError("poincare: section crossing is tangential");
    const double inv = 1.0 / dx[ip2];
    for (std::size_t i = 0; i < n; ++i) out[i] = dx[i] * inv;
    out[n] = inv;
  };
  const double h = -y[ip2];
  rhs(y, k[0]);
  for (std::size_t i = 0; i <= n; ++i) tmp[i] = y[i] + 0.5 * h * k[0][i];
  rhs(tmp, k[1]);
  for (std::size_t i = 0; i <= n; ++i) tmp[i] = y[i] + 0.5 * h * k[1][i];
  rhs(tmp, k[2]);
  for (std::size_t i = 0; i <= n; ++i) tmp[i] = y[i] + h * k[2][i];
  rhs(tmp, k[3]);
  for (std::size_t i = 0; i <= n; ++i) y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
  y[ip2] = 0.0;  // s is p_2 itself
  PhaseSpacePoint out(std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)));
  return {out, y[n]};
}

}  // namespace

SectionResult poincare(const BoseHubbardParams& params, const PhaseSpacePoint& x0, double T, const FlowConfig& cfg,
                       CrossingDirection direction) {
  params.validate();
  if (params.sites != 3) throw ConfigError("poincare: requires a trimer (L = 3)");
  if (!params.autonomous()) throw ConfigError("poincare: requires an undriven system");
  if (T == 0.0) throw ConfigError("poincare: T must be nonzero");

  TrajectoryIntegrator integ(params, cfg, x0, 0.0, 0);
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(T) / cfg.dt - 1e-9));
  const double h = T / static_cast<double>(steps);
  // Along the integration direction theta_2 decreases through 0 at q_2 > 0
  // exactly when p_2 goes from + to -.
  const double from_sign = direction == CrossingDirection::decreasing ? 1.0 : -1.0;

  SectionResult res;
  for (std::size_t i = 0; i < steps; ++i) {
    const PhaseSpacePoint before = integ.state();
    const double t_before = integ.time();
    integ.step(h);
    const PhaseSpacePoint& after = integ.state();
    const double a = before.p(1) * from_sign, b = after.p(1) * from_sign;
    if (!(a > 0.0 && b <= 0.0)) continue;
    if (before.q(1) <= 0.0 && after.q(1) <= 0.0) continue;
    auto [xs, ts] = land_on_section(integ, before, t_before);
    if (xs.q(1) <= 0.0) continue;
    SectionPoint pt;
    pt.x = wrap_angle(xs.phase(0) - xs.phase(2));
    pt.y = xs.occupation(0);
    pt.time = ts;
    res.points.push_back(pt);
  }
  res.no_crossings = res.points.empty();
  return res;
}

SectionResult stroboscopic(const BoseHubbardParams& params, const PhaseSpacePoint& x0, std::size_t n_periods,
                           const FlowConfig& cfg) {
  params.validate();
  if (params.sites != 2 || !params.drive) throw ConfigError("strobo: requires a driven dimer");
  if (n_periods < 1) throw ConfigError("strobo: n_periods must be >= 1");
  const double period = 2.0 * std::numbers::pi / params.drive->omega;
  TrajectoryIntegrator integ(params, cfg, x0, 0.0, 0);
  SectionResult res;
  res.points.reserve(n_periods);
  for (std::size_t k = 1; k <= n_periods; ++k) {
    const double t = static_cast<double>(k) * period;
    integ.advance_to(t);
    const PhaseSpacePoint& x = integ.state();
    res.points.push_back({wrap_angle(x.phase(0) - x.phase(1)), x.occupation(0) - x.occupation(1), t});
  }
  return res;
}

}  // namespace bhotoc
