#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bhotoc/error.hpp"
#include "bhotoc/sections.hpp"

using namespace bhotoc;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

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

BoseHubbardParams trimer(double U) {
  BoseHubbardParams p;
  p.sites = 3;
  p.U = U;
  p.J = 1.0;
  return p;
}

// Uniform on-site energy makes every phase wind downward without touching the
// relative dynamics.
BoseHubbardParams winding_trimer() {
  auto p = trimer(0.02);
  p.onsite = {2.0, 2.0, 2.0};
  return p;
}

// Largest angular gap between neighbouring points of a closed curve, ordered
// around the centroid; x is unwrapped about its circular mean.
double max_gap(const std::vector<SectionPoint>& pts) {
  double sx = 0.0, cxs = 0.0;
  for (const auto& p : pts) {
    sx += std::sin(p.x);
    cxs += std::cos(p.x);
  }
  const double mean_x = std::atan2(sx, cxs);
  std::vector<double> u(pts.size());
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    u[i] = std::remainder(pts[i].x - mean_x, kTwoPi);
    cx += u[i];
    cy += pts[i].y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < pts.size(); ++i) order.emplace_back(std::atan2(pts[i].y - cy, u[i] - cx), i);
  std::sort(order.begin(), order.end());
  double gap = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) gap = std::max(gap, order[(i + 1) % order.size()].first - order[i].first);
  return gap;
}

}  // namespace

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - kTwoPi));
  CHECK(wrap_angle(-1e-18) < kTwoPi);
}

TEST_CASE("poincare points lie on the section") {
  FlowConfig cfg;
  cfg.dt = 5e-3;
  const auto r = poincare(trimer(0.06), ring({52, 34, 14}, {-3.07, 0.0, 0.0}), 200.0, cfg);
  REQUIRE_FALSE(r.no_crossings);
  double prev = -1.0;
  for (const auto& p : r.points) {
    CHECK(p.x >= 0.0);
    CHECK(p.x < kTwoPi);
    CHECK(p.y >= -0.5);
    CHECK(p.y <= 100.5);
    CHECK(p.time > prev);
    prev = p.time;
  }
}

TEST_CASE("poincare crossing times land on theta_2 = 0") {
  // Re-run the flow with a much finer step to each crossing time.
  FlowConfig cfg;
  cfg.dt = 5e-3;
  const auto p = winding_trimer();
  const auto x0 = ring({6, 4, 2}, {0.5, 0.0, -0.3});
  const auto r = poincare(p, x0, 30.0, cfg);
  REQUIRE(r.points.size() >= 3);
  FlowConfig fine;
  fine.dt = 1e-4;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto x = flow(p, x0, r.points[i].time, fine, false).x;
    CHECK(std::abs(std::sin(x.phase(1))) < 1e-6);
    CHECK(std::cos(x.phase(1)) > 0.0);
  }
}

TEST_CASE("poincare: uncoupled sites wind uniformly") {
  BoseHubbardParams p;
  p.sites = 3;
  p.U = 0.0;
  p.J = 0.0;
  p.onsite = {1.0, 2.3, 0.7};
  FlowConfig cfg;
  cfg.dt = 1e-2;
  const double T = 100.0;
  const auto r = poincare(p, ring({3, 2, 1}, {0.0, 0.4, 1.0}), T, cfg);
  const double expect = std::floor(T * 2.3 / kTwoPi);
  CHECK(std::abs(static_cast<double>(r.points.size()) - expect) <= 1.0);
  const auto wrong = poincare(p, ring({3, 2, 1}, {0.0, 0.4, 1.0}), T, cfg, CrossingDirection::increasing);
  CHECK(wrong.no_crossings);
}

TEST_CASE("poincare: crossings converge under dt halving") {
  const auto p = winding_trimer();
  const auto x0 = ring({6, 4, 2}, {0.5, 0.0, -0.3});
  FlowConfig a, b;
  a.dt = 5e-3;
  b.dt = 2.5e-3;
  const auto ra = poincare(p, x0, 40.0, a);
  const auto rb = poincare(p, x0, 40.0, b);
  REQUIRE(ra.points.size() == rb.points.size());
  REQUIRE_FALSE(ra.no_crossings);
  for (std::size_t i = 0; i < ra.points.size(); ++i) {
    CHECK(std::abs(ra.points[i].x - rb.points[i].x) < 1e-6);
    CHECK(std::abs(ra.points[i].y - rb.points[i].y) < 1e-6);
  }
}

TEST_CASE("poincare: time reversal reproduces the crossings") {
  const auto p = winding_trimer();
  const auto x0 = ring({6, 4, 2}, {0.5, 0.0, -0.3});
  FlowConfig cfg;
  cfg.dt = 5e-3;
  const double T = 40.0;
  const auto fwd = poincare(p, x0, T, cfg);
  const auto xT = flow(p, x0, T, cfg, false).x;
  // Backward from X_T; the flag is relative to the integration direction.
  const auto back = poincare(p, xT, -T, cfg, CrossingDirection::increasing);
  REQUIRE(fwd.points.size() == back.points.size());
  const std::size_t n = fwd.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = fwd.points[i];
    const auto& g = back.points[n - 1 - i];
    CHECK(std::abs(f.y - g.y) < 1e-6);
    CHECK(std::abs(std::remainder(f.x - g.x, kTwoPi)) < 1e-6);
    CHECK(std::abs((T + g.time) - f.time) < 1e-6);
  }
}

TEST_CASE("poincare: regular orbit fills a closed curve") {
  const auto p = winding_trimer();
  const auto x0 = ring({6, 4, 2}, {0.5, 0.0, -0.3});
  FlowConfig cfg;
  cfg.dt = 1e-2;
  const auto a = poincare(p, x0, 400.0, cfg);
  const auto b = poincare(p, x0, 800.0, cfg);
  REQUIRE(a.points.size() > 10);
  CHECK(max_gap(b.points) < max_gap(a.points));
}

TEST_CASE("poincare rejects unsupported systems") {
  BoseHubbardParams dimer;
  dimer.sites = 2;
  CHECK_THROWS_AS(poincare(dimer, PhaseSpacePoint(2), 10.0, FlowConfig{}), ConfigError);
}

TEST_CASE("stroboscopic map") {
  BoseHubbardParams p;
  p.sites = 2;
  p.U = 3.0;
  p.J = 1.0;
  p.drive = DimerDrive{20.0, 10.0};
  const auto x0 = ring({16, 14}, {0.0, 0.0});
  FlowConfig fine;
  fine.dt = 1e-4;
  const auto r = stroboscopic(p, x0, 10, fine);
  REQUIRE(r.points.size() == 10);
  const double period = kTwoPi / 10.0;
  const double n0 = total_number(x0);
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    CHECK(r.points[k].time == doctest::Approx(period * static_cast<double>(k + 1)));
    CHECK(r.points[k].x >= 0.0);
    CHECK(r.points[k].x < kTwoPi);
    const auto x = flow(p, x0, r.points[k].time, fine, false).x;
    CHECK(std::abs(total_number(x) - n0) < 1e-8);
  }
}

TEST_CASE("stroboscopic map without drive conserves energy") {
  BoseHubbardParams p;
  p.sites = 2;
  p.U = 3.0;
  p.J = 1.0;
  p.drive = DimerDrive{0.0, 10.0};
  const auto x0 = ring({16, 14}, {0.0, 0.7});
  const double e0 = hcl(p, 0.0, x0);
  FlowConfig fine;
  fine.dt = 1e-4;
  const auto r = stroboscopic(p, x0, 10, fine);
  for (const auto& pt : r.points) {
    const auto x = flow(p, x0, pt.time, fine, false).x;
    CHECK(std::abs(hcl(p, pt.time, x) - e0) < 1e-6);
  }
  BoseHubbardParams undriven = p;
  undriven.drive.reset();
  CHECK_THROWS_AS(stroboscopic(undriven, x0, 3, FlowConfig{}), ConfigError);
}
