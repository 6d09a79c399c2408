#include <Eigen/Eigenvalues>
#include <cmath>

#include "bhotoc/error.hpp"
#include "bhotoc/quantum.hpp"
#include "bhotoc/simd.hpp"

namespace bhotoc {

HamiltonianMatrix::HamiltonianMatrix(const BoseHubbardParams& params, const FockBasis& basis) : params_(params) {
  BoseHubbardParams bare = params;
  bare.onsite.clear();
  bare.drive.reset();
  const SparseOperator h0 = build_hamiltonian(bare, basis, 0.0);

  const std::size_t dim = basis.dim();
  static_diag_.assign(dim, 0.0);
  row_ptr_.assign(dim + 1, 0);
  auto rp = h0.row_ptr();
  auto cols = h0.cols();
  auto vals = h0.values();
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::uint32_t k = rp[r]; k < rp[r + 1]; ++k) {
      if (cols[k] == r) {
        static_diag_[r] = vals[k].real();
      } else {
        cols_.push_back(cols[k]);
        vals_.push_back(vals[k].real());
      }
    }
    row_ptr_[r + 1] = static_cast<std::uint32_t>(cols_.size());
  }

  if (params.drive) {
    site_numbers_.assign(params.sites, std::vector<double>(dim));
    for (std::size_t l = 0; l < params.sites; ++l)
      for (std::size_t r = 0; r < dim; ++r) site_numbers_[l][r] = basis.occupation(r, l);
  } else if (!params.onsite.empty()) {
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t l = 0; l < params.sites; ++l) static_diag_[r] += params.onsite[l] * basis.occupation(r, l);
  }
  diag_ = static_diag_;
}

void HamiltonianMatrix::set_time(double t) {
  if (site_numbers_.empty()) return;
  std::vector<double> e(params_.sites);
  params_.onsite_energies(t, e);
  for (std::size_t r = 0; r < diag_.size(); ++r) {
    double d = static_diag_[r];
    for (std::size_t l = 0; l < site_numbers_.size(); ++l) d += e[l] * site_numbers_[l][r];
    diag_[r] = d;
  }
}

void HamiltonianMatrix::apply(std::span<const cplx> x, std::span<cplx> y) const {
  simd::kernels().csr_real_matvec(diag_.size(), row_ptr_.data(), cols_.data(), vals_.data(), diag_.data(), x.data(),
                                  y.data());
}

// ---------------------------------------------------------------------------

KrylovExponentiator::KrylovExponentiator(std::size_t dim, std::size_t max_dim, double tol)
    : max_dim_(std::max<std::size_t>(2, std::min(max_dim, dim))), tol_(tol), w_(dim) {
  basis_.assign(max_dim_, std::vector<cplx>(dim));
}

bool KrylovExponentiator::try_step(const HamiltonianMatrix& h, double tau, std::span<cplx> v) {
  const std::size_t n = v.size();
  const double beta0 = std::sqrt(simd::norm2(v));
  if (beta0 == 0.0) return true;

  std::copy(v.begin(), v.end(), basis_[0].begin());
  simd::scale(1.0 / beta0, basis_[0]);

  std::vector<double> alpha;
  std::vector<double> beta;
  alpha.reserve(max_dim_);
  beta.reserve(max_dim_);
  Eigen::VectorXcd y;

  for (std::size_t j = 0; j < max_dim_; ++j) {
    h.apply(basis_[j], w_);
    ++matvecs_;
    const double a = simd::dotc(basis_[j], w_).real();
    simd::axpy(-a, basis_[j], w_);
    if (j > 0) simd::axpy(-beta.back(), basis_[j - 1], w_);
    alpha.push_back(a);
    const double b = std::sqrt(simd::norm2(w_));
    const std::size_t k = j + 1;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(k));
    Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(k - 1)))
                                : Eigen::VectorXd();
    eig.computeFromTridiagonal(d, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& Q = eig.eigenvectors();
    Eigen::VectorXcd phase(k);
    for (std::size_t i = 0; i < k; ++i)
      phase[static_cast<Eigen::Index>(i)] = std::polar(1.0, -tau * eig.eigenvalues()[static_cast<Eigen::Index>(i)]) *
                                            Q(0, static_cast<Eigen::Index>(i));
    y = Q.cast<cplx>() * phase;

    const double scale_h = std::abs(a) + (beta.empty() ? 0.0 : beta.back()) + 1e-300;
    const bool breakdown = b <= 1e-14 * scale_h;
    const double err = b * std::abs(y[static_cast<Eigen::Index>(k - 1)]);
    if (breakdown || err <= tol_) {
      std::fill(v.begin(), v.end(), cplx{});
      for (std::size_t i = 0; i < k; ++i) simd::axpy(beta0 * y[static_cast<Eigen::Index>(i)], basis_[i], v);
      return true;
    }
    if (k == max_dim_) return false;
    beta.push_back(b);
    std::copy(w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(n), basis_[k].begin());
    simd::scale(1.0 / b, basis_[k]);
  }
  return false;
}

void KrylovExponentiator::apply(const HamiltonianMatrix& h, double tau, std::span<cplx> v) {
  struct Frame {
    double tau;
    int depth;
  };
  // Depth-first split: a failed piece is replaced by two halves applied in order.
  std::vector<Frame> stack{{tau, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (try_step(h, f.tau, v)) continue;
    if (f.depth >= 40) throw NumericalError("krylov: step splitting did not converge");
    stack.push_back({0.5 * f.tau, f.depth + 1});
    stack.push_back({0.5 * f.tau, f.depth + 1});
  }
}

}  // namespace bhotoc
