#include "bhotoc/oracles.hpp"

#include <Eigen/Dense>

namespace bhotoc::oracle {

namespace {

Eigen::MatrixXcd dense(const SparseOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& t : op.triplets()) m(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) += t.value;
  return m;
}

Eigen::VectorXcd to_eigen(std::span<const cplx> v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

double dense_commutator_norm2(const SparseOperator& A, const SparseOperator& B, std::span<const cplx> psi) {
  const Eigen::MatrixXcd a = dense(A), b = dense(B);
  const Eigen::VectorXcd v = (a * b - b * a) * to_eigen(psi);
  return v.squaredNorm();
}

std::vector<cplx> dense_evolve(const SparseOperator& H, std::span<const cplx> psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense(H));
  const Eigen::VectorXcd c = eig.eigenvectors().adjoint() * to_eigen(psi);
  Eigen::VectorXcd phased(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) phased[i] = std::polar(1.0, -t * eig.eigenvalues()[i]) * c[i];
  const Eigen::VectorXcd out = eig.eigenvectors() * phased;
  return std::vector<cplx>(out.data(), out.data() + out.size());
}

double fd_flow_derivative(const BoseHubbardParams& params, const PhaseSpacePoint& x0, std::span<const double> v,
                          double eps, double t, const FlowConfig& cfg,
                          const std::function<double(const PhaseSpacePoint&)>& f) {
  PhaseSpacePoint plus = x0, minus = x0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    plus[i] += eps * v[i];
    minus[i] -= eps * v[i];
  }
  const double fp = f(flow(params, plus, t, cfg, false).x);
  const double fm = f(flow(params, minus, t, cfg, false).x);
  return (fp - fm) / (2.0 * eps);
}

std::vector<double> fd_gradient(const std::function<double(const PhaseSpacePoint&)>& f, const PhaseSpacePoint& x,
                                double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    PhaseSpacePoint a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

double moyal_square(const std::function<double(const PhaseSpacePoint&)>& f, const PhaseSpacePoint& x, double hbar,
                    double h) {
  const std::size_t n = x.size();
  const std::size_t L = n / 2;
  // Second derivatives by central differences.
  std::vector<double> d2(n * n);
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double v;
      if (i == j) {
        PhaseSpacePoint a = x, b = x;
        a[i] += h;
        b[i] -= h;
        v = (f(a) - 2.0 * f0 + f(b)) / (h * h);
      } else {
        PhaseSpacePoint pp = x, pm = x, mp = x, mm = x;
        pp[i] += h, pp[j] += h;
        pm[i] += h, pm[j] -= h;
        mp[i] -= h, mp[j] += h;
        mm[i] -= h, mm[j] -= h;
        v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
      }
      d2[i * n + j] = d2[j * n + i] = v;
    }
  }
  auto D = [&](std::size_t i, std::size_t j) { return d2[i * n + j]; };
  double pi2 = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t m = 0; m < L; ++m)
      pi2 += D(l, m) * D(L + l, L + m) - 2.0 * D(l, L + m) * D(L + l, m) + D(L + l, L + m) * D(l, m);
  return f0 * f0 - hbar * hbar / 8.0 * pi2;
}

}  // namespace bhotoc::oracle
