#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bhotoc {

struct OTOCMeta {
  std::string estimator;  // "quantum", "classical"
  std::string A;
  std::string B;
  std::size_t samples = 0;
  std::size_t excluded = 0;
  std::uint64_t seed = 0;
};

/// C(t) on a time grid (units 1/J). stderr is zero for deterministic runs.
struct OTOCSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderr_;
  OTOCMeta meta;

  std::size_t size() const { return times.size(); }
};

/// Throws ConfigError unless the grid is non-negative and strictly increasing.
void check_time_grid(const std::vector<double>& times);

/// `count` points from `start` to `stop` inclusive.
std::vector<double> linear_grid(double start, double stop, std::size_t count);

}  // namespace bhotoc
