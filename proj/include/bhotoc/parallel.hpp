#pragma once

// Deterministic data parallelism. Work is cut into fixed-size blocks whose
// boundaries do not depend on the worker count; per-block partial results are
// merged in a fixed binary-tree order, so reductions are bit-identical for
// any number of threads.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bhotoc {

/// 0 -> std::thread::hardware_concurrency() (at least 1).
std::size_t resolve_workers(std::size_t requested);

/// Calls body(block, begin, end) for every block [begin, end) of `count`
/// items in blocks of `block_size`. The first exception thrown by any block
/// is rethrown after all workers have stopped.
void parallel_blocks(std::size_t count, std::size_t block_size, std::size_t workers,
                     const std::function<void(std::size_t block, std::size_t begin, std::size_t end)>& body);

inline constexpr std::size_t kSampleBlock = 64;

/// Running count, mean and sum of squared deviations (Welford / Chan).
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  static Moments merge(const Moments& a, const Moments& b);
  /// Unbiased sample variance (0 for n < 2).
  double variance() const;
  /// sqrt(variance / n)
  double standard_error() const;
};

/// Tree-order merge of per-block moments.
Moments merge_tree(std::span<const Moments> parts);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> x);

}  // namespace bhotoc
