#include <cmath>

#include "bhotoc/error.hpp"
#include "bhotoc/otoc.hpp"

namespace bhotoc {

OneDofHamiltonian OneDofHamiltonian::sqrt_well() {
  return {"p^2/2 + sqrt(1 + q^2)", [](double q) { return std::sqrt(1.0 + q * q); },
          [](double q) { return q / std::sqrt(1.0 + q * q); }};
}

void FamilyConfig::validate() const {
  if (steps < 100) throw ConfigError("families: steps must be >= 100");
  if (!(p_max > p_min)) throw ConfigError("families: p_max must exceed p_min");
  if (!(dt > 0.0)) throw ConfigError("families: dt must be > 0");
  if (!(root_tol > 0.0)) throw ConfigError("families: root_tol must be > 0");
}

double one_dof_position(const OneDofHamiltonian& h, double q0, double p0, double t, double dt) {
  if (t == 0.0) return q0;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(t) / dt - 1e-9)));
  const double s = t / static_cast<double>(n);
  double q = q0, p = p0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k1q = p, k1p = -h.force(q);
    const double k2q = p + 0.5 * s * k1p, k2p = -h.force(q + 0.5 * s * k1q);
    const double k3q = p + 0.5 * s * k2p, k3p = -h.force(q + 0.5 * s * k2q);
    const double k4q = p + s * k3p, k4p = -h.force(q + s * k3q);
    q += s / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    p += s / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  if (!std::isfinite(q)) throw NumericalError("families: non-finite trajectory");
  return q;
}

FamilyResult family_count(const OneDofHamiltonian& h, double q0, double q_target, double t, const FamilyConfig& cfg) {
  cfg.validate();
  FamilyResult r;
  const std::size_t n = cfg.steps;
  r.p0.resize(n);
  r.q_t.resize(n);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.p0[i] = cfg.p_min + (cfg.p_max - cfg.p_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    r.q_t[i] = one_dof_position(h, q0, r.p0[i], t, cfg.dt);
    f[i] = r.q_t[i] - q_target;
  }

  // Monotonic branches: split at local extrema of q_t(p0).
  std::vector<std::size_t> cuts{0};
  int last = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = r.q_t[i] - r.q_t[i - 1];
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last != 0 && sign != last) cuts.push_back(i - 1);
    last = sign;
  }
  cuts.push_back(n - 1);
  r.branches = cuts.size() - 1;
  auto branch_of = [&](std::size_t i) {
    for (std::size_t b = 0; b + 1 < cuts.size(); ++b)
      if (i >= cuts[b] && i < cuts[b + 1]) return b;
    return r.branches - 1;
  };

  std::vector<std::uint8_t> hit(r.branches, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] == 0.0) {
      if (i == 0 || i == n - 1) {
        r.unresolved.push_back(r.p0[i]);
      } else {
        r.roots.push_back(r.p0[i]);
        hit[branch_of(i)] = 1;
      }
      continue;
    }
    if (i + 1 < n && f[i + 1] != 0.0 && (f[i] < 0.0) != (f[i + 1] < 0.0)) {
      double a = r.p0[i], b = r.p0[i + 1], fa = f[i];
      while (b - a > cfg.root_tol) {
        const double m = 0.5 * (a + b);
        const double fm = one_dof_position(h, q0, m, t, cfg.dt) - q_target;
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      r.roots.push_back(0.5 * (a + b));
      hit[branch_of(i)] = 1;
    }
  }
  for (auto v : hit) r.families += v;
  return r;
}

}  // namespace bhotoc
