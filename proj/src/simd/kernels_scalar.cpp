#include "bhotoc/simd.hpp"

namespace bhotoc::simd {
namespace {

void axpy_scalar(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

cplx dotc_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double norm2_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void csr_real_matvec_scalar(std::size_t rows, const std::uint32_t* row_ptr, const std::uint32_t* cols,
                            const double* vals, const double* diag, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double re = diag ? diag[r] * x[r].real() : 0.0;
    double im = diag ? diag[r] * x[r].imag() : 0.0;
    for (std::uint32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const cplx& v = x[cols[k]];
      re += vals[k] * v.real();
      im += vals[k] * v.imag();
    }
    y[r] = {re, im};
  }
}

void csr_complex_matvec_scalar(std::size_t rows, const std::uint32_t* row_ptr, const std::uint32_t* cols,
                               const cplx* vals, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double re = 0.0, im = 0.0;
    for (std::uint32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const cplx& a = vals[k];
      const cplx& v = x[cols[k]];
      re += a.real() * v.real() - a.imag() * v.imag();
      im += a.real() * v.imag() + a.imag() * v.real();
    }
    y[r] = {re, im};
  }
}

const KernelTable kScalar{axpy_scalar, scale_scalar, dotc_scalar, norm2_scalar, csr_real_matvec_scalar,
                          csr_complex_matvec_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace bhotoc::simd
