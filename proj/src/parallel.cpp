#include "bhotoc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace bhotoc {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_blocks(std::size_t count, std::size_t block_size, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  block_size = std::max<std::size_t>(1, block_size);
  const std::size_t blocks = (count + block_size - 1) / block_size;
  workers = std::min(resolve_workers(workers), blocks);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto run = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        body(b, b * block_size, std::min(count, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

void Moments::add(double x) {
  n += 1.0;
  const double d = x - mean;
  mean += d / n;
  m2 += d * (x - mean);
}

Moments Moments::merge(const Moments& a, const Moments& b) {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  Moments r;
  r.n = a.n + b.n;
  const double d = b.mean - a.mean;
  r.mean = a.mean + d * (b.n / r.n);
  r.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / r.n);
  return r;
}

double Moments::variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }

double Moments::standard_error() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }

Moments merge_tree(std::span<const Moments> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  return Moments::merge(merge_tree(parts.first(half)), merge_tree(parts.subspan(half)));
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace bhotoc
