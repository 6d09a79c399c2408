#pragma once

// Data-parallel kernels used by the Krylov propagator. Every kernel has a
// scalar reference implementation; an AVX2/FMA variant is selected at startup
// when the CPU supports it. Results agree with the reference to rounding, not
// bit-for-bit (FMA contracts differently).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace bhotoc::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

struct KernelTable {
  /// y += a * x
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  /// x *= a (real)
  void (*scale)(double a, cplx* x, std::size_t n);
  /// sum conj(x_i) y_i
  cplx (*dotc)(const cplx* x, const cplx* y, std::size_t n);
  /// sum |x_i|^2
  double (*norm2)(const cplx* x, std::size_t n);
  /// y = diag .* x + A x, A in CSR with real values
  void (*csr_real_matvec)(std::size_t rows, const std::uint32_t* row_ptr, const std::uint32_t* cols,
                          const double* vals, const double* diag, const cplx* x, cplx* y);
  /// y = A x, A in CSR with complex values
  void (*csr_complex_matvec)(std::size_t rows, const std::uint32_t* row_ptr, const std::uint32_t* cols,
                             const cplx* vals, const cplx* x, cplx* y);
};

const KernelTable& scalar_kernels();
/// Null when the build has no AVX2 translation unit or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Table currently in use. Chosen once from the CPU features; the
/// BHOTOC_SIMD=scalar environment variable forces the reference path.
const KernelTable& kernels();
Backend active_backend();
/// Returns false if the requested backend is unavailable on this machine.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

inline void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { kernels().axpy(a, x.data(), y.data(), x.size()); }
inline void scale(double a, std::span<cplx> x) { kernels().scale(a, x.data(), x.size()); }
inline cplx dotc(std::span<const cplx> x, std::span<const cplx> y) { return kernels().dotc(x.data(), y.data(), x.size()); }
inline double norm2(std::span<const cplx> x) { return kernels().norm2(x.data(), x.size()); }

}  // namespace bhotoc::simd
