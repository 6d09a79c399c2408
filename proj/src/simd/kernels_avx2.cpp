// Compiled with -mavx2 -mfma. Nothing in here may run before the CPU check.

#include <immintrin.h>

#include "bhotoc/simd.hpp"

namespace bhotoc::simd {
namespace {

// Two complex doubles per __m256d: [re0, im0, re1, im1].

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void axpy_avx2(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    __m256d xs = _mm256_permute_pd(xv, 0b0101);
    // [ar*xr - ai*xi, ar*xi + ai*xr]
    __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, cplx* x, std::size_t n) {
  double* xp = reinterpret_cast<double*>(x);
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) _mm256_storeu_pd(xp + 2 * i, _mm256_mul_pd(av, _mm256_loadu_pd(xp + 2 * i)));
  for (; i < n; ++i) x[i] *= a;
}

cplx dotc_avx2(const cplx* x, const cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    acc_re = _mm256_fmadd_pd(xv, yv, acc_re);                              // xr*yr, xi*yi
    acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), acc_im);  // xr*yi, xi*yr
  }
  alignas(32) double im_lanes[4];
  _mm256_store_pd(im_lanes, acc_im);
  double re = hsum(acc_re);
  double im = (im_lanes[0] - im_lanes[1]) + (im_lanes[2] - im_lanes[3]);
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double norm2_avx2(const cplx* x, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(xp + 2 * i);
    __m256d b = _mm256_loadu_pd(xp + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void csr_real_matvec_avx2(std::size_t rows, const std::uint32_t* row_ptr, const std::uint32_t* cols,
                          const double* vals, const double* diag, const cplx* x, cplx* y) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  for (std::size_t r = 0; r < rows; ++r) {
    __m128d acc = diag ? _mm_mul_pd(_mm_set1_pd(diag[r]), _mm_loadu_pd(xp + 2 * r)) : _mm_setzero_pd();
    std::uint32_t k = row_ptr[r];
    const std::uint32_t end = row_ptr[r + 1];
    if (k + 2 <= end) {
      __m256d acc2 = _mm256_setzero_pd();
      for (; k + 2 <= end; k += 2) {
        __m256d xv = _mm256_set_m128d(_mm_loadu_pd(xp + 2 * cols[k + 1]), _mm_loadu_pd(xp + 2 * cols[k]));
        __m256d vv = _mm256_set_pd(vals[k + 1], vals[k + 1], vals[k], vals[k]);
        acc2 = _mm256_fmadd_pd(vv, xv, acc2);
      }
      acc = _mm_add_pd(acc, _mm_add_pd(_mm256_castpd256_pd128(acc2), _mm256_extractf128_pd(acc2, 1)));
    }
    for (; k < end; ++k) acc = _mm_fmadd_pd(_mm_set1_pd(vals[k]), _mm_loadu_pd(xp + 2 * cols[k]), acc);
    _mm_storeu_pd(yp + 2 * r, acc);
  }
}

void csr_complex_matvec_avx2(std::size_t rows, const std::uint32_t* row_ptr, const std::uint32_t* cols,
                             const cplx* vals, const cplx* x, cplx* y) {
  const double* xp = reinterpret_cast<const double*>(x);
  const double* vp = reinterpret_cast<const double*>(vals);
  double* yp = reinterpret_cast<double*>(y);
  for (std::size_t r = 0; r < rows; ++r) {
    __m256d acc = _mm256_setzero_pd();
    std::uint32_t k = row_ptr[r];
    const std::uint32_t end = row_ptr[r + 1];
    for (; k + 2 <= end; k += 2) {
      __m256d xv = _mm256_set_m128d(_mm_loadu_pd(xp + 2 * cols[k + 1]), _mm_loadu_pd(xp + 2 * cols[k]));
      __m256d av = _mm256_loadu_pd(vp + 2 * k);
      __m256d are = _mm256_movedup_pd(av);          // [ar, ar]
      __m256d aim = _mm256_permute_pd(av, 0b1111);  // [ai, ai]
      __m256d xs = _mm256_permute_pd(xv, 0b0101);
      acc = _mm256_add_pd(acc, _mm256_fmaddsub_pd(are, xv, _mm256_mul_pd(aim, xs)));
    }
    __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
    for (; k < end; ++k) {
      __m128d av = _mm_loadu_pd(vp + 2 * k);
      __m128d xv = _mm_loadu_pd(xp + 2 * cols[k]);
      __m128d xs = _mm_shuffle_pd(xv, xv, 0b01);
      s = _mm_add_pd(s, _mm_fmaddsub_pd(_mm_movedup_pd(av), xv, _mm_mul_pd(_mm_unpackhi_pd(av, av), xs)));
    }
    _mm_storeu_pd(yp + 2 * r, s);
  }
}

const KernelTable kAvx2{axpy_avx2, scale_avx2, dotc_avx2, norm2_avx2, csr_real_matvec_avx2, csr_complex_matvec_avx2};

}  // namespace

const KernelTable& avx2_kernel_table() { return kAvx2; }

}  // namespace bhotoc::simd
