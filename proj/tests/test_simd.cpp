#include <doctest.h>

#include <random>
#include <vector>

#include "bhotoc/simd.hpp"

using namespace bhotoc;
using simd::cplx;

namespace {

std::vector<cplx> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Random CSR matrix with a few entries per row.
struct Csr {
  std::vector<std::uint32_t> row_ptr{0}, cols;
  std::vector<double> vals, diag;
  std::vector<cplx> cvals;
};

Csr random_csr(std::size_t n, std::mt19937_64& rng) {
  Csr m;
  std::uniform_int_distribution<std::size_t> col(0, n - 1), count(0, 6);
  std::normal_distribution<double> g;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = count(rng);
    for (std::size_t i = 0; i < k; ++i) {
      m.cols.push_back(static_cast<std::uint32_t>(col(rng)));
      m.vals.push_back(g(rng));
      m.cvals.emplace_back(g(rng), g(rng));
    }
    m.row_ptr.push_back(static_cast<std::uint32_t>(m.cols.size()));
    m.diag.push_back(g(rng));
  }
  return m;
}

}  // namespace

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const simd::KernelTable* avx = simd::avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 unavailable on this machine; equivalence test skipped");
    return;
  }
  const simd::KernelTable& ref = simd::scalar_kernels();
  std::mt19937_64 rng(7);
  // Odd lengths exercise the remainder loops.
  for (std::size_t n : {1u, 2u, 3u, 7u, 64u, 1001u}) {
    CAPTURE(n);
    const auto x = random_vector(n, rng);
    const auto y0 = random_vector(n, rng);
    const cplx a{0.3, -1.7};

    auto ys = y0, ya = y0;
    ref.axpy(a, x.data(), ys.data(), n);
    avx->axpy(a, x.data(), ya.data(), n);
    CHECK(max_diff(ys, ya) < 1e-14);

    auto xs = x, xa = x;
    ref.scale(-2.5, xs.data(), n);
    avx->scale(-2.5, xa.data(), n);
    CHECK(max_diff(xs, xa) == 0.0);

    const cplx ds = ref.dotc(x.data(), y0.data(), n);
    const cplx da = avx->dotc(x.data(), y0.data(), n);
    CHECK(std::abs(ds - da) < 1e-12 * (1.0 + std::abs(ds)) * static_cast<double>(n));

    const double ns = ref.norm2(x.data(), n);
    const double na = avx->norm2(x.data(), n);
    CHECK(std::abs(ns - na) < 1e-13 * ns);

    const Csr m = random_csr(n, rng);
    std::vector<cplx> out_s(n), out_a(n);
    ref.csr_real_matvec(n, m.row_ptr.data(), m.cols.data(), m.vals.data(), m.diag.data(), x.data(), out_s.data());
    avx->csr_real_matvec(n, m.row_ptr.data(), m.cols.data(), m.vals.data(), m.diag.data(), x.data(), out_a.data());
    CHECK(max_diff(out_s, out_a) < 1e-13);

    ref.csr_complex_matvec(n, m.row_ptr.data(), m.cols.data(), m.cvals.data(), x.data(), out_s.data());
    avx->csr_complex_matvec(n, m.row_ptr.data(), m.cols.data(), m.cvals.data(), x.data(), out_a.data());
    CHECK(max_diff(out_s, out_a) < 1e-13);
  }
}

TEST_CASE("backend selection") {
  const auto initial = simd::active_backend();
  CHECK(simd::set_backend(simd::Backend::scalar));
  CHECK(simd::active_backend() == simd::Backend::scalar);
  CHECK(&simd::kernels() == &simd::scalar_kernels());
  CHECK(simd::set_backend(simd::Backend::avx2) == (simd::avx2_kernels() != nullptr));
  simd::set_backend(initial);
  CHECK(simd::backend_name(simd::Backend::scalar) == "scalar");
}
