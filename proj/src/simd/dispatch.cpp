#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bhotoc/simd.hpp"

namespace bhotoc::simd {

#ifdef BHOTOC_HAVE_AVX2
const KernelTable& avx2_kernel_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(BHOTOC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  const char* env = std::getenv("BHOTOC_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

const KernelTable* avx2_kernels() {
#ifdef BHOTOC_HAVE_AVX2
  static const KernelTable* table = cpu_has_avx2() ? &avx2_kernel_table() : nullptr;
  return table;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  if (current().load(std::memory_order_relaxed) == Backend::avx2) {
    if (const KernelTable* t = avx2_kernels()) return *t;
  }
  return scalar_kernels();
}

Backend active_backend() { return current().load(); }

bool set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_kernels()) return false;
  current().store(b);
  return true;
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace bhotoc::simd
