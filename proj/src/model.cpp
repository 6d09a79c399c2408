#include "bhotoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bhotoc/error.hpp"
#include "bhotoc/simd.hpp"

namespace bhotoc {

void BoseHubbardParams::validate() const {
  if (sites < 1) throw ConfigError("system: at least one site is required");
  if (!(J >= 0.0)) throw ConfigError("system: hopping J must be >= 0");
  if (!std::isfinite(U)) throw ConfigError("system: U must be finite");
  if (!onsite.empty() && onsite.size() != sites)
    throw ConfigError("system: onsite energies must have one entry per site");
  if (drive) {
    if (sites != 2) throw ConfigError("system: the dimer drive E1 = -E2 = delta cos(omega t) requires L = 2");
    if (drive->amplitude != 0.0 && !(drive->omega > 0.0))
      throw ConfigError("system: drive frequency omega must be > 0 when delta != 0");
  }
}

double BoseHubbardParams::onsite_energy(std::size_t site, double t) const {
  if (drive) {
    const double e = drive->amplitude * std::cos(drive->omega * t);
    return site == 0 ? e : -e;
  }
  return onsite.empty() ? 0.0 : onsite[site];
}

void BoseHubbardParams::onsite_energies(double t, std::span<double> e) const {
  if (drive) {
    const double d = drive->amplitude * std::cos(drive->omega * t);
    e[0] = d;
    e[1] = -d;
    return;
  }
  for (std::size_t l = 0; l < sites; ++l) e[l] = onsite.empty() ? 0.0 : onsite[l];
}

namespace {

// Number of compositions of n into k non-negative parts, saturating at cap+1.
std::size_t compositions(std::size_t n, std::size_t k, std::size_t cap) {
  // C(n+k-1, k-1) computed incrementally; each partial product is itself a
  // binomial coefficient so the division is exact.
  long double c = 1.0L;
  for (std::size_t i = 1; i < k; ++i) {
    c = c * static_cast<long double>(n + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(c)));
}

void enumerate_fixed(std::size_t site, std::size_t remaining, std::vector<std::uint32_t>& cur,
                     std::vector<std::uint32_t>& out) {
  const std::size_t L = cur.size();
  if (site + 1 == L) {
    cur[site] = static_cast<std::uint32_t>(remaining);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (std::size_t n = 0; n <= remaining; ++n) {
    cur[site] = static_cast<std::uint32_t>(n);
    enumerate_fixed(site + 1, remaining - n, cur, out);
  }
}

void check_key_range(std::size_t base, std::size_t sites) {
  long double range = 1.0L;
  for (std::size_t l = 0; l < sites; ++l) range *= static_cast<long double>(base);
  if (range > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
    throw ConfigError("basis: occupation tuples do not fit the 64-bit index encoding");
}

}  // namespace

FockBasis FockBasis::fixed_number(std::size_t sites, std::size_t particles, std::size_t dimension_cap) {
  if (sites < 1) throw ConfigError("basis: at least one site is required");
  const std::size_t dim = compositions(particles, sites, dimension_cap);
  if (dim > dimension_cap)
    throw ConfigError("basis: fixed-N dimension exceeds the cap of " + std::to_string(dimension_cap));
  check_key_range(particles + 1, sites);

  FockBasis b;
  b.mode_ = BasisMode::fixed_number;
  b.sites_ = sites;
  b.limit_ = particles;
  b.dim_ = dim;
  b.occ_.reserve(dim * sites);
  std::vector<std::uint32_t> cur(sites, 0);
  enumerate_fixed(0, particles, cur, b.occ_);
  b.keys_.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) b.keys_[k] = b.encode(b.state(k));
  return b;
}

FockBasis FockBasis::truncated(std::size_t sites, std::size_t n_max, std::size_t dimension_cap) {
  if (sites < 1) throw ConfigError("basis: at least one site is required");
  long double d = 1.0L;
  for (std::size_t l = 0; l < sites; ++l) {
    d *= static_cast<long double>(n_max + 1);
    if (d > static_cast<long double>(dimension_cap))
      throw ConfigError("basis: truncated dimension exceeds the cap of " + std::to_string(dimension_cap));
  }
  check_key_range(n_max + 1, sites);

  FockBasis b;
  b.mode_ = BasisMode::truncated;
  b.sites_ = sites;
  b.limit_ = n_max;
  b.dim_ = static_cast<std::size_t>(d);
  b.occ_.resize(b.dim_ * sites);
  for (std::size_t k = 0; k < b.dim_; ++k) {
    std::size_t rest = k;
    for (std::size_t l = sites; l-- > 0;) {
      b.occ_[k * sites + l] = static_cast<std::uint32_t>(rest % (n_max + 1));
      rest /= (n_max + 1);
    }
  }
  return b;
}

std::uint64_t FockBasis::encode(std::span<const std::uint32_t> occupations) const {
  const std::uint64_t base = limit_ + 1;
  std::uint64_t key = 0;
  for (std::uint32_t n : occupations) key = key * base + n;
  return key;
}

std::size_t FockBasis::total(std::size_t k) const {
  std::size_t s = 0;
  for (std::uint32_t n : state(k)) s += n;
  return s;
}

std::optional<std::size_t> FockBasis::index(std::span<const std::uint32_t> occupations) const {
  if (occupations.size() != sites_) return std::nullopt;
  std::size_t sum = 0;
  for (std::uint32_t n : occupations) {
    if (n > limit_) return std::nullopt;
    sum += n;
  }
  const std::uint64_t key = encode(occupations);
  if (mode_ == BasisMode::truncated) return static_cast<std::size_t>(key);
  if (sum != limit_) return std::nullopt;
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

bool FockBasis::on_cutoff_shell(std::size_t k) const {
  if (mode_ != BasisMode::truncated) return false;
  for (std::uint32_t n : state(k))
    if (n == limit_) return true;
  return false;
}

// ---------------------------------------------------------------------------

SparseOperator SparseOperator::from_triplets(std::size_t dim, std::vector<Triplet> triplets, bool hermitian) {
  if (dim > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("sparse operator: dimension exceeds 32-bit column indices");
  for (const auto& t : triplets)
    if (t.row >= dim || t.col >= dim) throw ConfigError("sparse operator: entry outside the matrix");
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

  SparseOperator op;
  op.dim_ = dim;
  op.hermitian_ = hermitian;
  op.row_ptr_.assign(dim + 1, 0);
  op.cols_.reserve(triplets.size());
  op.vals_.reserve(triplets.size());
  std::size_t last_row = dim, last_col = dim;
  for (const auto& t : triplets) {
    if (t.row == last_row && t.col == last_col) {
      op.vals_.back() += t.value;
      continue;
    }
    op.cols_.push_back(static_cast<std::uint32_t>(t.col));
    op.vals_.push_back(t.value);
    op.row_ptr_[t.row + 1]++;
    last_row = t.row;
    last_col = t.col;
  }
  for (std::size_t r = 0; r < dim; ++r) op.row_ptr_[r + 1] += op.row_ptr_[r];
  if (hermitian && op.hermiticity_defect() > 1e-14)
    throw ConfigError("sparse operator: entries flagged Hermitian are not conjugate-symmetric");
  return op;
}

cplx SparseOperator::element(std::size_t row, std::size_t col) const {
  auto first = cols_.begin() + row_ptr_[row];
  auto last = cols_.begin() + row_ptr_[row + 1];
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(col));
  if (it == last || *it != col) return {0.0, 0.0};
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<SparseOperator::Triplet> SparseOperator::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::uint32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, cols_[k], vals_[k]});
  return out;
}

void SparseOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  simd::kernels().csr_complex_matvec(dim_, row_ptr_.data(), cols_.data(), vals_.data(), x.data(), y.data());
}

std::vector<cplx> SparseOperator::apply(std::span<const cplx> x) const {
  std::vector<cplx> y(dim_);
  apply(x, y);
  return y;
}

double SparseOperator::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::uint32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      worst = std::max(worst, std::abs(vals_[k] - std::conj(element(cols_[k], r))));
  return worst;
}

// ---------------------------------------------------------------------------

std::string Observable::name() const {
  const std::string s = std::to_string(site + 1);
  switch (kind) {
    case ObservableKind::number: return "n" + s;
    case ObservableKind::quadrature_q: return "q" + s;
    case ObservableKind::quadrature_p: return "p" + s;
    case ObservableKind::number_squared: return "n" + s + "^2";
    case ObservableKind::p_squared: return "p" + s + "^2";
    case ObservableKind::total_number: return "N";
  }
  return "?";
}

ObservableKind Observable::parse_kind(const std::string& s) {
  if (s == "number" || s == "n") return ObservableKind::number;
  if (s == "q" || s == "quadrature_q") return ObservableKind::quadrature_q;
  if (s == "p" || s == "quadrature_p") return ObservableKind::quadrature_p;
  if (s == "number_squared") return ObservableKind::number_squared;
  if (s == "p_squared" || s == "quadrature_p_squared") return ObservableKind::p_squared;
  if (s == "total_number") return ObservableKind::total_number;
  throw ConfigError("unknown observable kind '" + s + "'");
}

SparseOperator build_hamiltonian(const BoseHubbardParams& params, const FockBasis& basis, double t) {
  params.validate();
  if (basis.sites() != params.sites)
    throw ConfigError("hamiltonian: basis has " + std::to_string(basis.sites()) + " sites, system has " +
                      std::to_string(params.sites));
  const std::size_t L = params.sites;
  std::vector<double> e(L);
  params.onsite_energies(t, e);

  std::vector<SparseOperator::Triplet> trip;
  trip.reserve(basis.dim() * (1 + 2 * (L - 1)));
  std::vector<std::uint32_t> occ(L);
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    auto s = basis.state(k);
    double diag = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double n = s[l];
      diag += e[l] * n + 0.5 * params.U * n * (n - 1.0);
    }
    trip.push_back({k, k, diag});
    if (params.J == 0.0) continue;
    for (std::size_t l = 0; l + 1 < L; ++l) {
      // b_to^+ b_from for (to, from) = (l, l+1) and (l+1, l)
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t to = dir == 0 ? l : l + 1;
        const std::size_t from = dir == 0 ? l + 1 : l;
        if (s[from] == 0) continue;
        std::copy(s.begin(), s.end(), occ.begin());
        occ[from] -= 1;
        occ[to] += 1;
        auto j = basis.index(occ);
        if (!j) {
          ++dropped;
          continue;
        }
        const double amp = -params.J * std::sqrt(static_cast<double>(occ[to]) * static_cast<double>(s[from]));
        trip.push_back({*j, k, amp});
      }
    }
  }
  auto op = SparseOperator::from_triplets(basis.dim(), std::move(trip), true);
  op.set_dropped_terms(dropped);
  return op;
}

SparseOperator build_observable(const FockBasis& basis, const Observable& obs) {
  const std::size_t L = basis.sites();
  if (obs.kind != ObservableKind::total_number && obs.site >= L)
    throw ConfigError("observable " + obs.name() + ": site index beyond the lattice");
  if (!obs.conserves_number() && basis.mode() != BasisMode::truncated)
    throw ConfigError("observable " + obs.name() +
                      " does not conserve the total number and requires a truncated basis (mode: truncated)");

  std::vector<SparseOperator::Triplet> trip;
  std::size_t dropped = 0;
  std::vector<std::uint32_t> occ(L);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const std::size_t site = obs.site;

  // Adds <shifted|op|k> for occupation shift `delta` at `site`.
  auto add_shift = [&](std::size_t k, int delta, cplx amp) {
    auto s = basis.state(k);
    const long target = static_cast<long>(s[site]) + delta;
    if (target < 0) return;
    std::copy(s.begin(), s.end(), occ.begin());
    occ[site] = static_cast<std::uint32_t>(target);
    auto j = basis.index(occ);
    if (!j) {
      ++dropped;
      return;
    }
    trip.push_back({*j, k, amp});
  };

  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const double n = obs.kind == ObservableKind::total_number ? 0.0 : basis.occupation(k, site);
    switch (obs.kind) {
      case ObservableKind::number: trip.push_back({k, k, n}); break;
      case ObservableKind::number_squared: trip.push_back({k, k, n * n}); break;
      case ObservableKind::total_number: trip.push_back({k, k, static_cast<double>(basis.total(k))}); break;
      case ObservableKind::quadrature_q:
        if (n > 0) add_shift(k, -1, std::sqrt(n) * inv_sqrt2);
        add_shift(k, +1, std::sqrt(n + 1.0) * inv_sqrt2);
        break;
      case ObservableKind::quadrature_p:
        // p = (b - b^+) / (sqrt(2) i)
        if (n > 0) add_shift(k, -1, cplx(0.0, -std::sqrt(n) * inv_sqrt2));
        add_shift(k, +1, cplx(0.0, std::sqrt(n + 1.0) * inv_sqrt2));
        break;
      case ObservableKind::p_squared:
        // p^2 = (2n + 1 - b^2 - b^+^2) / 2, exact matrix elements inside the cutoff
        trip.push_back({k, k, n + 0.5});
        if (n > 1) add_shift(k, -2, -0.5 * std::sqrt(n * (n - 1.0)));
        add_shift(k, +2, -0.5 * std::sqrt((n + 1.0) * (n + 2.0)));
        break;
    }
  }
  auto op = SparseOperator::from_triplets(basis.dim(), std::move(trip), true);
  op.set_dropped_terms(dropped);
  return op;
}

}  // namespace bhotoc
