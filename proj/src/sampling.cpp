#include "bhotoc/sampling.hpp"

#include <cmath>
#include <random>

#include "bhotoc/error.hpp"
#include "bhotoc/parallel.hpp"

namespace bhotoc {

SamplerSpec SamplerSpec::coherent(std::vector<cplx> alpha, std::uint64_t seed) {
  SamplerSpec s;
  s.kind = SamplerKind::coherent;
  s.alpha = std::move(alpha);
  s.seed = seed;
  return s;
}

SamplerSpec SamplerSpec::fock_ring(std::vector<double> n, std::uint64_t seed) {
  SamplerSpec s;
  s.kind = SamplerKind::fock_ring;
  s.n = std::move(n);
  s.seed = seed;
  return s;
}

void SamplerSpec::validate() const {
  if (sites() == 0) throw ConfigError("sampler: no sites");
  if (kind == SamplerKind::coherent) {
    for (const cplx& a : alpha)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw ConfigError("sampler: non-finite alpha");
    if (!(epsilon > 0.0)) throw ConfigError("sampler: epsilon must be > 0");
  } else {
    for (double v : n)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("sampler: occupations must be finite and >= 0");
  }
}

namespace {

// Engine seeded from (seed, index) only; seed_seq and mt19937_64 are fully
// specified by the standard, so streams are portable.
std::mt19937_64 engine_for(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Uniform on (0, 1], 53 random bits.
double uniform(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

}  // namespace

double stream_uniform(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream + 1u};
  std::mt19937_64 rng(seq);
  return uniform(rng);
}

PhaseSpacePoint draw(const SamplerSpec& spec, std::uint64_t index) {
  auto rng = engine_for(spec.seed, index);
  const std::size_t L = spec.sites();
  PhaseSpacePoint x(L);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t l = 0; l < L; ++l) {
    if (spec.kind == SamplerKind::coherent) {
      // Box-Muller: one pair per site.
      const double r = std::sqrt(-2.0 * std::log(uniform(rng)));
      const double phi = two_pi * uniform(rng);
      const double sigma = 0.5 * spec.epsilon;
      x.q(l) = spec.epsilon * spec.alpha[l].real() + sigma * r * std::cos(phi);
      x.p(l) = spec.epsilon * spec.alpha[l].imag() + sigma * r * std::sin(phi);
    } else {
      const double r = std::sqrt(2.0 * spec.n[l] + 1.0);
      const double phi = two_pi * (uniform(rng) - 0.5);
      x.q(l) = r * std::cos(phi);
      x.p(l) = r * std::sin(phi);
    }
  }
  return x;
}

SampleBatch sample(const SamplerSpec& spec, std::size_t count, std::uint64_t offset) {
  spec.validate();
  if (count < 1) throw ConfigError("sample: count must be >= 1");
  SampleBatch b;
  b.spec = spec;
  b.points.reserve(count);
  b.indices.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    b.indices.push_back(offset + k);
    b.points.push_back(draw(spec, offset + k));
  }
  return b;
}

Estimate estimate(const std::function<double(const PhaseSpacePoint&)>& fn, const SamplerSpec& spec,
                  std::size_t count, std::size_t workers) {
  spec.validate();
  if (count < 2) throw ConfigError("estimate: count must be >= 2");
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  std::vector<Moments> parts(blocks);
  std::vector<std::size_t> bad(blocks, 0);
  parallel_blocks(count, kSampleBlock, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double v = fn(draw(spec, k));
      if (std::isfinite(v))
        parts[b].add(v);
      else
        ++bad[b];
    }
  });
  Estimate e;
  for (std::size_t n : bad) e.nonfinite += n;
  if (static_cast<double>(e.nonfinite) > kMaxNonfiniteFraction * static_cast<double>(count))
    throw NumericalError("estimate: " + std::to_string(e.nonfinite) + " of " + std::to_string(count) +
                         " samples gave non-finite values");
  const Moments m = merge_tree(parts);
  e.mean = m.mean;
  e.stderr_ = m.standard_error();
  e.used = static_cast<std::size_t>(m.n);
  return e;
}

}  // namespace bhotoc
