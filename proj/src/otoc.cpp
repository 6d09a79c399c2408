#include "bhotoc/otoc.hpp"

#include <cmath>

#include "bhotoc/error.hpp"
#include "bhotoc/parallel.hpp"

namespace bhotoc {

OTOCSeries classical_otoc(const BoseHubbardParams& params, const SamplerSpec& spec, const Observable& A,
                          const Observable& B, const std::vector<double>& times, std::size_t count,
                          const FlowConfig& cfg, std::size_t workers) {
  check_time_grid(times);
  params.validate();
  cfg.validate();
  spec.validate();
  if (count < 2) throw ConfigError("classical otoc: count must be >= 2");
  if (spec.sites() != params.sites) throw ConfigError("classical otoc: sampler and system differ in site count");

  const std::size_t nt = times.size();
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  std::vector<std::vector<Moments>> parts(blocks, std::vector<Moments>(nt));
  std::vector<std::size_t> excluded(blocks, 0);

  parallel_blocks(count, kSampleBlock, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::vector<double> row(nt);
    for (std::size_t k = begin; k < end; ++k) {
      const PhaseSpacePoint x0 = draw(spec, k);
      try {
        TrajectoryIntegrator integ(params, cfg, x0, 0.0, 1);
        const auto v0 = apply_symplectic(grad_observable(B, x0));
        std::copy(v0.begin(), v0.end(), integ.tangent(0).begin());
        for (std::size_t i = 0; i < nt; ++i) {
          integ.advance_to(times[i]);
          const auto ga = grad_observable(A, integ.state());
          const auto v = integ.tangent(0);
          double s = 0.0;
          for (std::size_t j = 0; j < ga.size(); ++j) s += ga[j] * v[j];
          row[i] = s * s;
        }
      } catch (const NumericalError&) {
        ++excluded[b];
        continue;
      }
      for (std::size_t i = 0; i < nt; ++i) parts[b][i].add(row[i]);
    }
  });

  std::size_t total_excluded = 0;
  for (std::size_t e : excluded) total_excluded += e;
  if (static_cast<double>(total_excluded) > kMaxExcludedFraction * static_cast<double>(count))
    throw NumericalError("classical otoc: " + std::to_string(total_excluded) + " of " + std::to_string(count) +
                         " trajectories blew up");

  OTOCSeries out;
  out.times = times;
  out.values.resize(nt);
  out.stderr_.resize(nt);
  std::vector<Moments> column(blocks);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t b = 0; b < blocks; ++b) column[b] = parts[b][i];
    const Moments m = merge_tree(column);
    out.values[i] = m.mean;
    out.stderr_[i] = m.standard_error();
  }
  out.meta.estimator = "classical";
  out.meta.A = A.name();
  out.meta.B = B.name();
  out.meta.samples = count - total_excluded;
  out.meta.excluded = total_excluded;
  out.meta.seed = spec.seed;
  return out;
}

std::vector<double> observable_hessian(const Observable& A, std::size_t sites) {
  const std::size_t n = 2 * sites;
  std::vector<double> h(n * n, 0.0);
  const std::size_t i = A.site;
  switch (A.kind) {
    case ObservableKind::number:
      h[i * n + i] = 1.0;
      h[(sites + i) * n + sites + i] = 1.0;
      break;
    case ObservableKind::quadrature_q:
    case ObservableKind::quadrature_p: break;
    case ObservableKind::p_squared: h[(sites + i) * n + sites + i] = 2.0; break;
    case ObservableKind::total_number:
      for (std::size_t k = 0; k < n; ++k) h[k * n + k] = 1.0;
      break;
    case ObservableKind::number_squared:
      throw ConfigError("weyl_square: " + A.name() + " is not quadratic in (q, p)");
  }
  return h;
}

double weyl_square(const Observable& A, const PhaseSpacePoint& x) {
  const std::size_t L = x.sites();
  const std::size_t n = 2 * L;
  const auto h = observable_hessian(A, L);
  auto at = [&](std::size_t r, std::size_t c) { return h[r * n + c]; };
  double qq_pp = 0.0, qp_qp = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t m = 0; m < L; ++m) {
      qq_pp += at(l, m) * at(L + l, L + m);
      qp_qp += at(l, L + m) * at(m, L + l);
    }
  const double a = observable_value(A, x);
  return a * a - 0.25 * (qq_pp - qp_qp);
}

}  // namespace bhotoc
