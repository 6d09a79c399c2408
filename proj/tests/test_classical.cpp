#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bhotoc/classical.hpp"
#include "bhotoc/error.hpp"
#include "bhotoc/oracles.hpp"
#include "bhotoc/sampling.hpp"

using namespace bhotoc;

namespace {

BoseHubbardParams trimer(double U) {
  BoseHubbardParams p;
  p.sites = 3;
  p.U = U;
  p.J = 1.0;
  return p;
}

BoseHubbardParams driven_dimer(double U) {
  BoseHubbardParams p;
  p.sites = 2;
  p.U = U;
  p.J = 1.0;
  p.drive = DimerDrive{20.0, 10.0};
  return p;
}

// Fock-ring point with the given occupations and phases.
PhaseSpacePoint ring(std::initializer_list<double> n, std::initializer_list<double> phase) {
  std::vector<double> q, p;
  auto ph = phase.begin();
  for (double nl : n) {
    const double r = std::sqrt(2.0 * nl + 1.0);
    q.push_back(r * std::cos(*ph));
    p.push_back(r * std::sin(*ph));
    ++ph;
  }
  return PhaseSpacePoint::from_qp(q, p);
}

PhaseSpacePoint chaotic_trimer_point() { return ring({52, 34, 14}, {-3.07, 0.0, 0.0}); }

}  // namespace

TEST_CASE("hcl: single oscillator") {
  BoseHubbardParams p;
  p.sites = 1;
  p.J = 0.0;
  p.onsite = {1.9};
  const double q[] = {0.7}, pp[] = {-1.3};
  const auto x = PhaseSpacePoint::from_qp(q, pp);
  CHECK(hcl(p, 0.0, x) == doctest::Approx(1.9 * (0.49 + 1.69 - 1.0) / 2.0));
}

TEST_CASE("hcl: Weyl symbol at the origin") {
  // n = -1/2 on every site: U/2 (n^2 - n - 1/4) = U/4.
  const auto p = trimer(0.8);
  CHECK(hcl(p, 0.0, PhaseSpacePoint(3)) == doctest::Approx(3 * 0.8 / 4.0));
  CHECK(hcl(p, 0.0, PhaseSpacePoint(3), false) == 0.0);
}

TEST_CASE("hcl: coherent-state average equals the quantum expectation") {
  // <alpha| U/2 n(n-1) + E n |alpha> = U/2 |alpha|^4 + E |alpha|^2.
  BoseHubbardParams p;
  p.sites = 1;
  p.J = 0.0;
  p.U = 0.6;
  p.onsite = {1.1};
  const cplx alpha{1.4, -0.8};
  const double a2 = std::norm(alpha);
  const auto est = estimate([&](const PhaseSpacePoint& x) { return hcl(p, 0.0, x); },
                            SamplerSpec::coherent({alpha}, 5), 200000);
  CHECK(std::abs(est.mean - (0.5 * p.U * a2 * a2 + 1.1 * a2)) < 5.0 * est.stderr_);
}

TEST_CASE("hcl: global phase invariance") {
  const auto p = trimer(0.3);
  const auto x = chaotic_trimer_point();
  for (double phi : {0.3, 1.7, -2.2}) {
    PhaseSpacePoint y(3);
    for (std::size_t l = 0; l < 3; ++l) {
      y.q(l) = x.q(l) * std::cos(phi) + x.p(l) * std::sin(phi);
      y.p(l) = -x.q(l) * std::sin(phi) + x.p(l) * std::cos(phi);
    }
    CHECK(hcl(p, 0.0, y) == doctest::Approx(hcl(p, 0.0, x)).epsilon(1e-13));
  }
}

TEST_CASE("hcl gradient matches finite differences") {
  const auto p = driven_dimer(3.0);
  const double q[] = {1.2, -0.4}, pp[] = {0.3, 2.1};
  const auto x = PhaseSpacePoint::from_qp(q, pp);
  for (bool weyl : {true, false}) {
    const auto g = hcl_gradient(p, 0.13, x, weyl);
    const auto fd = oracle::fd_gradient([&](const PhaseSpacePoint& y) { return hcl(p, 0.13, y, weyl); }, x, 1e-5);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-8));
  }
}

TEST_CASE("flow: linear oscillator rotates phase space") {
  const double omega = 2.3, t = 0.9;
  BoseHubbardParams p;
  p.sites = 1;
  p.J = 0.0;
  p.onsite = {omega};
  const double q[] = {1.0}, pp[] = {0.5};
  const auto r = flow(p, PhaseSpacePoint::from_qp(q, pp), t, FlowConfig{}, true);
  REQUIRE(r.m.has_value());
  const double c = std::cos(omega * t), s = std::sin(omega * t);
  CHECK((*r.m)(0, 0) == doctest::Approx(c).epsilon(1e-10));
  CHECK((*r.m)(0, 1) == doctest::Approx(s).epsilon(1e-10));
  CHECK((*r.m)(1, 0) == doctest::Approx(-s).epsilon(1e-10));
  CHECK((*r.m)(1, 1) == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("flow: zero time gives the identity") {
  const auto r = flow(trimer(0.06), chaotic_trimer_point(), 0.0, FlowConfig{}, true);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK((*r.m)(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("flow: tangent map matches central differences") {
  const auto p = trimer(0.06);
  const auto x0 = chaotic_trimer_point();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<double> v(6);
  for (double& c : v) c = g(rng);
  const Observable A = Observable::number(0);
  const auto r = flow(p, x0, 5.0, FlowConfig{}, true);
  const auto ga = grad_observable(A, r.x);
  double exact = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) exact += ga[i] * (*r.m)(i, j) * v[j];
  for (double eps : {1e-5, 1e-6}) {
    const double fd = oracle::fd_flow_derivative(p, x0, v, eps, 5.0, FlowConfig{},
                                                 [&](const PhaseSpacePoint& y) { return observable_value(A, y); });
    CHECK(std::abs(fd - exact) / std::max(1.0, std::abs(exact)) < 1e-4);
  }
}

TEST_CASE("flow: backward flow undoes forward flow") {
  const auto p = driven_dimer(3.0);
  const auto x0 = ring({16, 14}, {0.0, 0.0});
  FlowConfig fine;
  fine.dt = 1e-4;
  const auto fwd = flow(p, x0, 0.7, fine, false);
  const auto back = flow(p, fwd.x, -0.7, fine, false, 0.7);
  for (std::size_t i = 0; i < 4; ++i) CHECK(back.x[i] == doctest::Approx(x0[i]).epsilon(1e-9));
}

TEST_CASE("flow: fourth-order convergence under dt halving") {
  const auto p = trimer(0.06);
  const auto x0 = chaotic_trimer_point();
  auto endpoint = [&](double dt) {
    FlowConfig c;
    c.dt = dt;
    return flow(p, x0, 5.0, c, false).x;
  };
  const auto a = endpoint(0.02), b = endpoint(0.01), ref = endpoint(0.00125);
  double ea = 0.0, eb = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    ea = std::max(ea, std::abs(a[i] - ref[i]));
    eb = std::max(eb, std::abs(b[i] - ref[i]));
  }
  const double ratio = ea / eb;
  CHECK(ratio > 16.0 * 0.7);
  CHECK(ratio < 16.0 * 1.3);
}

TEST_CASE("flow: symplectic tangent map on moderate horizons") {
  const auto r = flow(trimer(0.06), chaotic_trimer_point(), 10.0, FlowConfig{}, true);
  CHECK(r.m->symplectic_defect() < 1e-6);
  FlowConfig fine;
  fine.dt = 1e-4;
  const auto d = flow(driven_dimer(3.0), ring({16, 14}, {0.0, 0.0}), 1.0, fine, true);
  CHECK(d.m->symplectic_defect() < 1e-6);
}

TEST_CASE("flow: Poisson bracket identity at t = 0") {
  const auto r = flow(trimer(0.06), chaotic_trimer_point(), 0.0, FlowConfig{}, true);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const auto gq = grad_observable(Observable::q(i), r.x);
      const auto jp = apply_symplectic(grad_observable(Observable::p(j), r.x));
      double s = 0.0;
      for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) s += gq[a] * (*r.m)(a, b) * jp[b];
      CHECK(s == (i == j ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("flow: blow-up reports the time") {
  BoseHubbardParams p;
  p.sites = 1;
  p.J = 0.0;
  p.U = 1e3;
  const double q[] = {1e3}, pp[] = {0.0};
  FlowConfig c;
  c.dt = 1.0;
  try {
    flow(p, PhaseSpacePoint::from_qp(q, pp), 50.0, c, false);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("conserved quantities") {
  CHECK(conserved(trimer(0.1), PhaseSpacePoint(3)).number == -1.5);
  CHECK(conserved(trimer(0.1), PhaseSpacePoint(3)).energy.has_value());
  CHECK_FALSE(conserved(driven_dimer(1.0), PhaseSpacePoint(2)).energy.has_value());
  CHECK(total_number(ring({52, 34, 14}, {0.1, 2.0, -1.0})) == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("energy and number conservation over t = 100") {
  const auto p = trimer(0.06);
  const auto x0 = chaotic_trimer_point();
  const auto x1 = flow(p, x0, 100.0, FlowConfig{}, false).x;
  const double e0 = hcl(p, 0.0, x0), e1 = hcl(p, 0.0, x1);
  CHECK(std::abs(e1 - e0) / std::max(1.0, std::abs(e0)) < 1e-7);
  CHECK(std::abs(total_number(x1) - total_number(x0)) < 1e-9);
}

TEST_CASE("lyapunov: linear dimer has zero exponent") {
  BoseHubbardParams p;
  p.sites = 2;
  p.U = 0.0;
  FlowConfig c;
  c.dt = 0.01;
  const auto r = lyapunov(p, ring({3, 1}, {0.0, 0.5}), 500.0, 1.0, c);
  CHECK(std::abs(r.exponent) < 0.01);
  CHECK(r.times.size() == 500);
  CHECK(r.running.back() == r.exponent);
}

TEST_CASE("lyapunov: chaotic trimer converges to a positive exponent") {
  FlowConfig c;
  c.dt = 0.005;
  const auto r = lyapunov(trimer(0.06), chaotic_trimer_point(), 1000.0, 1.0, c);
  CHECK(r.exponent > 0.0);
  double lo = r.exponent, hi = r.exponent;
  for (std::size_t i = r.running.size() / 2; i < r.running.size(); ++i) {
    lo = std::min(lo, r.running[i]);
    hi = std::max(hi, r.running[i]);
  }
  CHECK(hi <= 1.1 * r.exponent);
  CHECK(lo >= 0.9 * r.exponent);
}

TEST_CASE("lyapunov: driven dimer is chaotic") {
  FlowConfig c;
  c.dt = 1e-3;
  const auto r = lyapunov(driven_dimer(3.0), ring({16, 14}, {0.0, 0.0}), 100.0, 0.5, c);
  CHECK(r.exponent > 0.0);
}

TEST_CASE("lyapunov rejects bad horizons") {
  CHECK_THROWS_AS(lyapunov(trimer(0.1), PhaseSpacePoint(3), 1.0, 2.0, FlowConfig{}), ConfigError);
}

TEST_CASE("observable gradients") {
  const double q[] = {1.0, 0.2}, pp[] = {2.0, 3.0};
  const auto x = PhaseSpacePoint::from_qp(q, pp);
  const auto gn = grad_observable(Observable::number(0), x);
  CHECK(gn == std::vector<double>{1.0, 0.0, 2.0, 0.0});
  const auto gp = grad_observable(Observable::p_squared(1), x);
  CHECK(gp == std::vector<double>{0.0, 0.0, 0.0, 6.0});
  CHECK(grad_observable(Observable::q(1), x) == std::vector<double>{0.0, 1.0, 0.0, 0.0});
  CHECK_THROWS_AS(grad_observable(Observable::q(2), x), ConfigError);

  for (auto kind : {ObservableKind::number, ObservableKind::quadrature_q, ObservableKind::quadrature_p,
                    ObservableKind::number_squared, ObservableKind::p_squared, ObservableKind::total_number}) {
    const Observable A{kind, 1};
    const auto g = grad_observable(A, x);
    const auto fd = oracle::fd_gradient([&](const PhaseSpacePoint& y) { return observable_value(A, y); }, x, 1e-5);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - fd[i]) < 1e-8);
  }
}
