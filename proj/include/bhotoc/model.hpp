#pragma once

// Bose-Hubbard systems: parameters, bosonic Fock bases and sparse operators.
//
//   H = sum_l [ E_l(t) n_l + U/2 n_l (n_l - 1) ] - J sum_{l<L} (b_l^+ b_{l+1} + h.c.)
//
// Open boundary conditions, hbar = 1. Sites are 0-based in the C++ API.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bhotoc {

using cplx = std::complex<double>;

/// E_1(t) = -E_2(t) = amplitude * cos(omega * t); dimer only.
struct DimerDrive {
  double amplitude = 0.0;
  double omega = 1.0;
};

struct BoseHubbardParams {
  std::size_t sites = 2;
  double U = 0.0;
  double J = 1.0;
  /// Static on-site energies; empty means all zero. Ignored when a drive is set.
  std::vector<double> onsite;
  std::optional<DimerDrive> drive;

  /// Throws ConfigError when the invariants are violated.
  void validate() const;
  double onsite_energy(std::size_t site, double t) const;
  /// Fills e[l] = E_l(t).
  void onsite_energies(double t, std::span<double> e) const;
  bool driven() const { return drive.has_value() && drive->amplitude != 0.0; }
  /// Energy is a constant of motion.
  bool autonomous() const { return !driven(); }
};

enum class BasisMode { fixed_number, truncated };

inline constexpr std::size_t kDefaultDimensionCap = 5'000'000;

/// Bosonic occupation basis. States are sorted lexicographically, so for
/// L=2, N=1 the order is (0,1), (1,0).
class FockBasis {
 public:
  /// All occupations with sum == particles.
  static FockBasis fixed_number(std::size_t sites, std::size_t particles,
                                std::size_t dimension_cap = kDefaultDimensionCap);
  /// All occupations with 0 <= n_l <= n_max.
  static FockBasis truncated(std::size_t sites, std::size_t n_max,
                             std::size_t dimension_cap = kDefaultDimensionCap);

  BasisMode mode() const { return mode_; }
  std::size_t sites() const { return sites_; }
  std::size_t dim() const { return dim_; }
  /// Total particle number (fixed_number) or per-site cutoff (truncated).
  std::size_t particles() const { return limit_; }
  std::size_t n_max() const { return limit_; }

  std::span<const std::uint32_t> state(std::size_t k) const {
    return {occ_.data() + k * sites_, sites_};
  }
  std::uint32_t occupation(std::size_t k, std::size_t site) const { return occ_[k * sites_ + site]; }
  std::size_t total(std::size_t k) const;
  /// Row of an occupation tuple, or nullopt if it is not in the basis.
  std::optional<std::size_t> index(std::span<const std::uint32_t> occupations) const;

  /// True for rows where some site sits at the truncation cutoff.
  bool on_cutoff_shell(std::size_t k) const;

 private:
  FockBasis() = default;
  std::uint64_t encode(std::span<const std::uint32_t> occupations) const;

  BasisMode mode_ = BasisMode::fixed_number;
  std::size_t sites_ = 0;
  std::size_t limit_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> occ_;
  std::vector<std::uint64_t> keys_;  // sorted, fixed_number mode only
};

/// Sparse matrix in compressed-row form with sorted, duplicate-free columns.
class SparseOperator {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    cplx value;
  };

  SparseOperator() = default;
  /// Sorts and merges duplicates. With `hermitian` set, the matrix is checked
  /// for conjugate symmetry to 1e-14 (ConfigError otherwise).
  static SparseOperator from_triplets(std::size_t dim, std::vector<Triplet> triplets, bool hermitian);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return cols_.size(); }
  bool hermitian() const { return hermitian_; }
  /// Matrix elements that would have left a truncated basis and were dropped.
  std::size_t dropped_terms() const { return dropped_; }
  void set_dropped_terms(std::size_t n) { dropped_ = n; }

  std::span<const std::uint32_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> cols() const { return cols_; }
  std::span<const cplx> values() const { return vals_; }

  cplx element(std::size_t row, std::size_t col) const;
  std::vector<Triplet> triplets() const;
  /// y = A x
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  std::vector<cplx> apply(std::span<const cplx> x) const;
  /// Largest |A_ij - conj(A_ji)|.
  double hermiticity_defect() const;

 private:
  std::size_t dim_ = 0;
  bool hermitian_ = false;
  std::size_t dropped_ = 0;
  std::vector<std::uint32_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<cplx> vals_;
};

enum class ObservableKind { number, quadrature_q, quadrature_p, number_squared, p_squared, total_number };

struct Observable {
  ObservableKind kind = ObservableKind::number;
  std::size_t site = 0;

  static Observable number(std::size_t s) { return {ObservableKind::number, s}; }
  static Observable q(std::size_t s) { return {ObservableKind::quadrature_q, s}; }
  static Observable p(std::size_t s) { return {ObservableKind::quadrature_p, s}; }
  static Observable number_squared(std::size_t s) { return {ObservableKind::number_squared, s}; }
  static Observable p_squared(std::size_t s) { return {ObservableKind::p_squared, s}; }
  static Observable total_number() { return {ObservableKind::total_number, 0}; }

  bool conserves_number() const {
    return kind == ObservableKind::number || kind == ObservableKind::number_squared ||
           kind == ObservableKind::total_number;
  }
  std::string name() const;
  /// Parses "number", "q", "p", "number_squared", "p_squared", "total_number".
  static ObservableKind parse_kind(const std::string& s);
};

SparseOperator build_hamiltonian(const BoseHubbardParams& params, const FockBasis& basis, double t);
SparseOperator build_observable(const FockBasis& basis, const Observable& obs);

}  // namespace bhotoc
