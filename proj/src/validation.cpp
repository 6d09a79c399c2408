#include "bhotoc/validation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "bhotoc/classical.hpp"
#include "bhotoc/csv.hpp"
#include "bhotoc/oracles.hpp"
#include "bhotoc/otoc.hpp"
#include "bhotoc/quantum.hpp"
#include "bhotoc/runner.hpp"
#include "bhotoc/sampling.hpp"

namespace bhotoc {

namespace {

BoseHubbardParams chaotic_trimer() {
  BoseHubbardParams p;
  p.sites = 3;
  p.U = 0.06;
  p.J = 1.0;
  return p;
}

BoseHubbardParams driven_dimer() {
  BoseHubbardParams p;
  p.sites = 2;
  p.U = 3.0;
  p.J = 1.0;
  p.drive = DimerDrive{20.0, 10.0};
  return p;
}

PhaseSpacePoint ring_point(const std::vector<double>& n, const std::vector<double>& theta) {
  PhaseSpacePoint x(n.size());
  for (std::size_t l = 0; l < n.size(); ++l) {
    const double r = std::sqrt(2.0 * n[l] + 1.0);
    x.q(l) = r * std::cos(theta[l]);
    x.p(l) = r * std::sin(theta[l]);
  }
  return x;
}

CheckResult check(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value < threshold, value, threshold, std::move(detail)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_check(const CheckResult& r) {
  std::string s = (r.passed ? "PASS " : "FAIL ") + r.name + " " + format_double(r.value) + " < " +
                  format_double(r.threshold);
  if (!r.detail.empty()) s += " (" + r.detail + ")";
  return s;
}

std::vector<CheckResult> run_validation(bool quick, std::size_t workers) {
  std::vector<CheckResult> out;
  const double horizon = quick ? 10.0 : 100.0;
  FlowConfig fc;  // default dt

  const auto trimer = chaotic_trimer();
  const auto dimer = driven_dimer();
  const auto x_trimer = ring_point({52, 34, 14}, {-3.07, 0.0, 0.0});
  const auto x_dimer = ring_point({16, 14}, {0.0, 0.0});

  // Tangent-map symplecticity. Rounding alone contributes about
  // eps * max|M|^2, so chaotic runs also get a scale-free diagnostic.
  for (const auto& [name, params, x0] :
       {std::tuple{"symplectic_trimer", trimer, x_trimer}, std::tuple{"symplectic_driven_dimer", dimer, x_dimer}}) {
    const auto r = flow(params, x0, horizon, fc, true);
    const double defect = r.m->symplectic_defect();
    const double scale = std::max(1.0, r.m->max_abs() * r.m->max_abs());
    out.push_back(check(name, defect, 1e-6, "t=" + format_double(horizon) + ", max|M|=" + format_double(r.m->max_abs())));
    out.push_back(check(std::string(name) + "_scaled", defect / scale, 1e-6, "defect / max(1, max|M|^2)"));
  }

  // Conservation laws. The driven dimer is stiff (U N ~ 90): RK4 drifts N
  // like dt^5, so that check runs at a step where the drift resolves 1e-9.
  {
    const auto r = flow(trimer, x_trimer, horizon, fc, false);
    const auto c0 = conserved(trimer, x_trimer), c1 = conserved(trimer, r.x);
    out.push_back(check("number_conservation_trimer", std::abs(c1.number - c0.number), 1e-9));
    out.push_back(check("energy_drift_trimer", std::abs(*c1.energy - *c0.energy) / std::max(1.0, std::abs(*c0.energy)),
                        1e-7));
    FlowConfig fine = fc;
    fine.dt = 2.5e-5;
    const auto d = flow(dimer, x_dimer, horizon, fine, false);
    const auto d_default = flow(dimer, x_dimer, horizon, fc, false);
    out.push_back(check("number_conservation_driven_dimer", std::abs(total_number(d.x) - total_number(x_dimer)), 1e-9,
                        "dt=2.5e-5; at dt=" + format_double(fc.dt) + " the drift is " +
                            format_double(std::abs(total_number(d_default.x) - total_number(x_dimer)))));
  }

  // Quantum norm drift.
  {
    auto basis = std::make_shared<FockBasis>(FockBasis::fixed_number(2, 30));
    const std::vector<double> occ{16, 14}, ph{0, 0};
    const auto psi = coherent_state(basis, coherent_amplitudes(occ, ph));
    PropagatorConfig pc;
    pc.norm_tol = 1.0;  // measured here instead of enforced
    const auto out_state = evolve(psi, dimer, 0.0, horizon, pc);
    out.push_back(check("quantum_norm_drift", std::abs(out_state.norm() - 1.0), 1e-8, "driven dimer N=30"));
  }

  // Tangent map against finite differences at t = 5.
  {
    const auto spec = SamplerSpec::coherent(coherent_amplitudes(std::vector<double>{52, 34, 14},
                                                                std::vector<double>{-3.07, 0, 0}),
                                            7);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    const Observable A = Observable::number(0);
    for (std::uint64_t k = 0; k < 3; ++k) {
      const auto x0 = draw(spec, k);
      std::vector<double> v(x0.size());
      for (double& c : v) c = gauss(rng);
      const auto r = flow(trimer, x0, 5.0, fc, true);
      const auto g = grad_observable(A, r.x);
      double exact = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) exact += g[i] * (*r.m)(i, j) * v[j];
      for (double eps : {1e-5, 1e-6}) {
        const double fd = oracle::fd_flow_derivative(trimer, x0, v, eps, 5.0, fc,
                                                     [&](const PhaseSpacePoint& x) { return observable_value(A, x); });
        worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
      }
    }
    out.push_back(check("tangent_vs_finite_difference", worst, 1e-4, "t=5"));
  }

  // t = 0 quantum OTOC against dense commutator algebra.
  {
    auto basis = std::make_shared<FockBasis>(FockBasis::truncated(2, 8));
    const std::vector<double> occ{1.5, 1.0}, ph{0.4, -1.1};
    const auto psi = coherent_state(basis, coherent_amplitudes(occ, ph));
    BoseHubbardParams p = driven_dimer();
    PropagatorConfig pc;
    pc.leakage_tol = 1.0;
    double worst = 0.0;
    for (const auto& [a, b] : {std::pair{Observable::q(0), Observable::p(0)}, std::pair{Observable::p_squared(0), Observable::q(0)},
                               std::pair{Observable::number(0), Observable::q(0)}}) {
      const auto A = build_observable(*basis, a), B = build_observable(*basis, b);
      const double ref = oracle::dense_commutator_norm2(A, B, psi.amplitudes());
      const auto s = quantum_otoc(p, psi, A, B, {0.0}, pc);
      worst = std::max(worst, std::abs(s.values[0] - ref) / std::abs(ref));
    }
    out.push_back(check("otoc_t0_vs_dense_commutator", worst, 1e-10));
  }

  // Sampler moments.
  {
    const std::size_t M = quick ? 20000 : 100000;
    const auto spec = SamplerSpec::coherent({cplx(2.0, 0.0)}, 3);
    const auto mq = estimate([](const PhaseSpacePoint& x) { return x.q(0); }, spec, M, workers);
    const double target = 2.0 * std::numbers::sqrt2;
    out.push_back(check("coherent_mean_q", std::abs(mq.mean - target) / std::sqrt(0.5 / M), 5.0, "in units of sqrt(0.5/M)"));
    double worst_cov = 0.0;
    const auto vq = estimate([&](const PhaseSpacePoint& x) { return (x.q(0) - target) * (x.q(0) - target); }, spec, M, workers);
    const auto vp = estimate([](const PhaseSpacePoint& x) { return x.p(0) * x.p(0); }, spec, M, workers);
    const auto cqp = estimate([&](const PhaseSpacePoint& x) { return (x.q(0) - target) * x.p(0); }, spec, M, workers);
    worst_cov = std::max({std::abs(vq.mean - 0.5) / 0.5, std::abs(vp.mean - 0.5) / 0.5, std::abs(cqp.mean) / 0.5});
    out.push_back(check("coherent_covariance", worst_cov, 0.05, "relative to 1/2"));

    const auto ring = SamplerSpec::fock_ring({52, 34, 14}, 5);
    double worst_ring = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const auto x = draw(ring, k);
      for (std::size_t l = 0; l < 3; ++l) worst_ring = std::max(worst_ring, std::abs(x.occupation(l) - ring.n[l]));
    }
    out.push_back(check("fock_ring_constraint", worst_ring, 1e-12));
  }

  // weyl_square against the order-hbar^2 Moyal product.
  {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      PhaseSpacePoint x(2);
      for (std::size_t i = 0; i < 4; ++i) x[i] = gauss(rng);
      for (const auto& o : {Observable::number(0), Observable::number(1), Observable::q(0), Observable::p(1),
                            Observable::p_squared(0), Observable::total_number()}) {
        const double ref =
            oracle::moyal_square([&](const PhaseSpacePoint& y) { return observable_value(o, y); }, x, 1.0, 0.5);
        worst = std::max(worst, std::abs(weyl_square(o, x) - ref));
      }
    }
    out.push_back(check("weyl_square_vs_moyal", worst, 1e-10));
  }

  // Byte-identical outputs across worker counts.
  {
    RunConfig cfg = RunConfig::parse(R"(
system: {sites: 2, U: 3, J: 1, drive: {amplitude: 20, omega: 10}}
state: {kind: coherent, occupations: [16, 14]}
numerics: {samples: 512, seed: 42, dt: 0.001}
task: {kind: classical-otoc, A: {kind: p_squared, site: 1}, B: {kind: p, site: 2}, times: {stop: 1, count: 11}}
)");
    const auto tmp = std::filesystem::temp_directory_path() /
                     ("bhotoc_validate_" + std::to_string(std::random_device{}()));
    std::ostringstream sink;
    cfg.numerics.workers = 1;
    run_task(cfg, tmp / "w1", sink);
    cfg.numerics.workers = std::max<std::size_t>(4, workers);
    run_task(cfg, tmp / "wk", sink);
    const bool same = slurp(tmp / "w1" / "otoc.csv") == slurp(tmp / "wk" / "otoc.csv");
    std::filesystem::remove_all(tmp);
    out.push_back(check("worker_count_determinism", same ? 0.0 : 1.0, 0.5, "otoc.csv, workers 1 vs 4"));
  }
  return out;
}

}  // namespace bhotoc
