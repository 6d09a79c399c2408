#pragma once

// Wigner-distribution samplers for product initial states.
//
// coherent:  (q_l, p_l) ~ N(eps * (Re a_l, Im a_l), eps^2/4 * 1), eps = sqrt 2
// fock_ring: (q_l, p_l) = r_l (cos phi_l, sin phi_l), r_l = sqrt(2 n_l + 1)
//
// Sample k depends only on (seed, k).

#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "bhotoc/classical.hpp"
#include "bhotoc/model.hpp"

namespace bhotoc {

/// Coherent-state width parameter. sqrt 2 is the value for which the Gaussian
/// has the moments of (b + b^+)/sqrt 2 at hbar = 1: mean sqrt2 * alpha, variance 1/2.
inline constexpr double kCoherentEpsilon = std::numbers::sqrt2;

enum class SamplerKind { coherent, fock_ring };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::coherent;
  std::vector<cplx> alpha;       // coherent
  std::vector<double> n;         // fock_ring
  std::uint64_t seed = 0;
  double epsilon = kCoherentEpsilon;

  static SamplerSpec coherent(std::vector<cplx> alpha, std::uint64_t seed);
  static SamplerSpec fock_ring(std::vector<double> n, std::uint64_t seed);

  std::size_t sites() const { return kind == SamplerKind::coherent ? alpha.size() : n.size(); }
  void validate() const;
};

struct SampleBatch {
  std::vector<PhaseSpacePoint> points;
  SamplerSpec spec;
  std::vector<std::uint64_t> indices;
};

/// The sample with global index `index`.
PhaseSpacePoint draw(const SamplerSpec& spec, std::uint64_t index);
/// Uniform variate on (0, 1] from an auxiliary stream keyed by (seed, index, stream),
/// independent of the sampler streams.
double stream_uniform(std::uint64_t seed, std::uint64_t index, std::uint32_t stream);
/// Samples offset .. offset + count - 1.
SampleBatch sample(const SamplerSpec& spec, std::size_t count, std::uint64_t offset = 0);

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t used = 0;
  std::size_t nonfinite = 0;
};

/// Maximum fraction of non-finite samples tolerated by estimate().
inline constexpr double kMaxNonfiniteFraction = 1e-3;

/// Mean and standard error of fn over samples 0 .. count-1.
Estimate estimate(const std::function<double(const PhaseSpacePoint&)>& fn, const SamplerSpec& spec,
                  std::size_t count, std::size_t workers = 1);

}  // namespace bhotoc
