#include "bhotoc/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bhotoc/error.hpp"
#include "bhotoc/simd.hpp"

namespace bhotoc {

void PropagatorConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("propagator: dt must be > 0");
  if (krylov_dim < 2) throw ConfigError("propagator: krylov_dim must be >= 2");
  if (!(norm_tol > 0.0) || !(leakage_tol > 0.0) || !(krylov_tol > 0.0))
    throw ConfigError("propagator: tolerances must be > 0");
}

void check_time_grid(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("time grid is empty");
  if (!(times.front() >= 0.0)) throw ConfigError("time grid must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ConfigError("time grid must be strictly increasing");
}

std::vector<double> linear_grid(double start, double stop, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {start};
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = stop;
  return g;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(std::shared_ptr<const FockBasis> basis, std::vector<cplx> amplitudes)
    : basis_(std::move(basis)), amp_(std::move(amplitudes)) {
  if (!basis_ || amp_.size() != basis_->dim()) throw ConfigError("state vector length does not match the basis");
}

double StateVector::norm() const { return std::sqrt(simd::norm2(amp_)); }

double StateVector::fidelity(const StateVector& other) const { return std::norm(simd::dotc(amp_, other.amp_)); }

double StateVector::expectation(const SparseOperator& op) const {
  auto y = op.apply(amp_);
  return simd::dotc(amp_, y).real();
}

std::vector<cplx> coherent_amplitudes(std::span<const double> occupations, std::span<const double> phases) {
  if (occupations.size() != phases.size()) throw ConfigError("coherent state: occupations and phases differ in length");
  std::vector<cplx> alpha(occupations.size());
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    if (occupations[l] < 0.0) throw ConfigError("coherent state: negative occupation");
    alpha[l] = std::polar(std::sqrt(occupations[l]), phases[l]);
  }
  return alpha;
}

namespace {

// log|amplitude| and phase of alpha^n / sqrt(n!), or -inf when alpha = 0 and n > 0.
std::pair<double, double> site_log_amplitude(cplx alpha, std::uint32_t n) {
  if (n == 0) return {0.0, 0.0};
  const double r = std::abs(alpha);
  if (r == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
  return {n * std::log(r) - 0.5 * std::lgamma(n + 1.0), n * std::arg(alpha)};
}

void normalize(std::vector<cplx>& v) {
  const double nrm = std::sqrt(simd::norm2(v));
  if (!(nrm > 0.0)) throw ConfigError("state has zero norm in this basis");
  simd::scale(1.0 / nrm, v);
}

}  // namespace

StateVector coherent_state(std::shared_ptr<const FockBasis> basis, std::span<const cplx> alpha) {
  if (alpha.size() != basis->sites()) throw ConfigError("coherent state: one amplitude per site is required");
  const std::size_t dim = basis->dim();
  std::vector<double> logs(dim), phases(dim);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dim; ++k) {
    double lg = 0.0, ph = 0.0;
    for (std::size_t l = 0; l < alpha.size(); ++l) {
      auto [a, p] = site_log_amplitude(alpha[l], basis->occupation(k, l));
      lg += a;
      ph += p;
    }
    logs[k] = lg;
    phases[k] = ph;
    best = std::max(best, lg);
  }
  std::vector<cplx> amp(dim);
  for (std::size_t k = 0; k < dim; ++k)
    amp[k] = std::isfinite(logs[k]) ? std::polar(std::exp(logs[k] - best), phases[k]) : cplx{};
  normalize(amp);
  return StateVector(std::move(basis), std::move(amp));
}

StateVector fock_state(std::shared_ptr<const FockBasis> basis, std::span<const std::uint32_t> occupations) {
  auto k = basis->index(occupations);
  if (!k) throw ConfigError("fock state: occupations are not part of the basis");
  std::vector<cplx> amp(basis->dim());
  amp[*k] = 1.0;
  return StateVector(std::move(basis), std::move(amp));
}

// ---------------------------------------------------------------------------

Propagator::Propagator(const BoseHubbardParams& params, std::shared_ptr<const FockBasis> basis, PropagatorConfig cfg)
    : basis_(std::move(basis)),
      cfg_(cfg),
      h_((params.validate(), cfg.validate(), params), *basis_),
      krylov_(basis_->dim(), cfg.krylov_dim, cfg.krylov_tol) {
  for (std::size_t k = 0; k < basis_->dim(); ++k)
    if (basis_->on_cutoff_shell(k)) shell_rows_.push_back(static_cast<std::uint32_t>(k));
}

void Propagator::advance(std::span<cplx> v, double t0, double t1) {
  const double span = t1 - t0;
  if (span == 0.0) return;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(span) / cfg_.dt - 1e-9)));
  const double h = span / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    h_.set_time(t0 + (static_cast<double>(i) + 0.5) * h);
    krylov_.apply(h_, h, v);
  }
}

double Propagator::cutoff_population(std::span<const cplx> v) const {
  if (shell_rows_.empty()) return 0.0;
  const double total = simd::norm2(v);
  if (total == 0.0) return 0.0;
  double shell = 0.0;
  for (std::uint32_t r : shell_rows_) shell += std::norm(v[r]);
  return shell / total;
}

void Propagator::check_leakage(std::span<const cplx> v) const {
  const double pop = cutoff_population(v);
  if (pop > cfg_.leakage_tol)
    throw NumericalError("population " + std::to_string(pop) + " on the truncation shell n = " +
                         std::to_string(basis_->n_max()) + " exceeds leakage_tol; raise n_max");
}

namespace {

void check_norm(double before, double after, double tol, const char* what) {
  if (before == 0.0) return;
  const double drift = std::abs(after - before) / before;
  if (drift > tol)
    throw NumericalError(std::string(what) + ": relative norm drift " + std::to_string(drift) + " exceeds norm_tol");
}

}  // namespace

StateVector evolve(const StateVector& state, const BoseHubbardParams& params, double t0, double t1,
                   const PropagatorConfig& cfg) {
  Propagator prop(params, state.basis_ptr(), cfg);
  StateVector out = state;
  if (t0 == t1) return out;
  const double before = out.norm();
  prop.check_leakage(out.amplitudes());
  prop.advance(out.amplitudes(), t0, t1);
  check_norm(before, out.norm(), cfg.norm_tol, "evolve");
  prop.check_leakage(out.amplitudes());
  return out;
}

OTOCSeries quantum_otoc(const BoseHubbardParams& params, const StateVector& psi0, const SparseOperator& A,
                        const SparseOperator& B, const std::vector<double>& times, const PropagatorConfig& cfg) {
  check_time_grid(times);
  const std::size_t dim = psi0.basis().dim();
  if (A.dim() != dim || B.dim() != dim) throw ConfigError("quantum otoc: operators and state live on different bases");
  if (!A.hermitian() || !B.hermitian() || A.hermiticity_defect() > 1e-14 || B.hermiticity_defect() > 1e-14)
    throw ConfigError("quantum otoc: A and B must be Hermitian");

  Propagator prop(params, psi0.basis_ptr(), cfg);
  prop.check_leakage(psi0.amplitudes());

  std::vector<cplx> a(psi0.amplitudes().begin(), psi0.amplitudes().end());  // U(t)|psi0>
  std::vector<cplx> u = B.apply(a);                                         // U(t) B|psi0>
  prop.check_leakage(u);
  std::vector<cplx> w(dim), c(dim), d(dim);

  // Segment boundaries 0 = s_0 < s_1 < ... ; every leg moves along the same segments.
  std::vector<double> bounds{0.0};
  for (double t : times)
    if (t > bounds.back()) bounds.push_back(t);

  OTOCSeries out;
  out.times = times;
  out.values.reserve(times.size());
  out.stderr_.assign(times.size(), 0.0);
  out.meta.estimator = "quantum";

  std::size_t seg = 0;  // index into bounds of the current forward time
  for (double t : times) {
    while (bounds[seg] < t) {
      const double na = simd::norm2(a), nu = simd::norm2(u);
      prop.advance(a, bounds[seg], bounds[seg + 1]);
      prop.advance(u, bounds[seg], bounds[seg + 1]);
      check_norm(std::sqrt(na), std::sqrt(simd::norm2(a)), cfg.norm_tol, "quantum otoc forward leg");
      check_norm(std::sqrt(nu), std::sqrt(simd::norm2(u)), cfg.norm_tol, "quantum otoc forward leg");
      ++seg;
    }
    prop.check_leakage(a);
    prop.check_leakage(u);

    A.apply(u, w);
    A.apply(a, c);
    prop.check_leakage(w);
    prop.check_leakage(c);
    const double nw = simd::norm2(w), nc = simd::norm2(c);
    for (std::size_t s = seg; s > 0; --s) {
      prop.advance(w, bounds[s], bounds[s - 1]);
      prop.advance(c, bounds[s], bounds[s - 1]);
    }
    check_norm(std::sqrt(nw), std::sqrt(simd::norm2(w)), cfg.norm_tol, "quantum otoc backward leg");
    check_norm(std::sqrt(nc), std::sqrt(simd::norm2(c)), cfg.norm_tol, "quantum otoc backward leg");
    prop.check_leakage(c);

    B.apply(c, d);
    simd::axpy(-1.0, d, w);
    out.values.push_back(simd::norm2(w));
  }
  return out;
}

}  // namespace bhotoc
