#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "bhotoc/error.hpp"
#include "bhotoc/otoc.hpp"
#include "bhotoc/parallel.hpp"

namespace bhotoc {

void CinfConfig::validate() const {
  if (n_traj < 2) throw ConfigError("cinf: n_traj must be >= 2");
  if (!(horizon > burn_in) || !(burn_in >= 0.0)) throw ConfigError("cinf: requires horizon > burn_in >= 0");
  if (e_bins < 1) throw ConfigError("cinf: e_bins must be >= 1");
  if (min_count < 1) throw ConfigError("cinf: min_count must be >= 1");
  if (fd_stride < 1) throw ConfigError("cinf: fd_stride must be >= 1");
  if (!(span >= 0.0) || span > 1.0) throw ConfigError("cinf: span must lie in [0, 1]");
  if (min_fit < 3) throw ConfigError("cinf: min_fit must be >= 3");
  if (!(broaden >= 0.0) || !(broaden < 1.0)) throw ConfigError("cinf: broaden must lie in [0, 1)");
  if (!(dt >= 0.0)) throw ConfigError("cinf: dt must be >= 0");
  if (!(max_excluded >= 0.0) || max_excluded > 1.0) throw ConfigError("cinf: max_excluded must lie in [0, 1]");
}

std::optional<std::size_t> ProfileAxis::locate(double c) const {
  if (hi <= lo) {
    if (std::abs(c - lo) <= 1e-9 * std::max(1.0, std::abs(lo))) return 0;
    return std::nullopt;
  }
  if (c < lo || c > hi) return std::nullopt;
  const auto i = static_cast<std::size_t>((c - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(i, bins - 1);
}

double ProfileAxis::center(std::size_t i) const {
  if (hi <= lo) return lo;
  return lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(bins);
}

std::optional<std::size_t> ErgodicProfile::locate(std::span<const double> c) const {
  std::size_t cell = 0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    auto i = axes[a].locate(c[a]);
    if (!i) return std::nullopt;
    cell = cell * axes[a].bins + *i;
  }
  return cell;
}

std::vector<std::size_t> ErgodicProfile::unflatten(std::size_t cell) const {
  std::vector<std::size_t> idx(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    idx[a] = cell % axes[a].bins;
    cell /= axes[a].bins;
  }
  return idx;
}

std::vector<double> motion_constants(const BoseHubbardParams& params, const PhaseSpacePoint& x, bool weyl_corrected) {
  if (params.autonomous()) return {hcl(params, 0.0, x, weyl_corrected), total_number(x)};
  return {total_number(x)};
}

namespace {

constexpr std::uint64_t kProfileSeedOffset = 0x9E3779B97F4A7C15ULL;

struct ProfileSample {
  std::vector<double> c;
  double average = 0.0;
};

ProfileSample run_profile_trajectory(const BoseHubbardParams& params, const SamplerSpec& spec, const Observable& A,
                                     const CinfConfig& pcfg, const FlowConfig& fcfg, std::size_t k) {
  SamplerSpec s = spec;
  s.seed = spec.seed + kProfileSeedOffset;
  PhaseSpacePoint x = draw(s, k);
  if (pcfg.broaden > 0.0) {
    const double u = 2.0 * stream_uniform(s.seed, k, 1) - 1.0;
    const double f = std::sqrt(1.0 + pcfg.broaden * u);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= f;
  }
  ProfileSample out;
  out.c = motion_constants(params, x, fcfg.weyl_corrected);

  TrajectoryIntegrator integ(params, fcfg, x, 0.0, 0);
  integ.advance_to(pcfg.burn_in);
  const double span = pcfg.horizon - pcfg.burn_in;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / fcfg.dt - 1e-9)));
  const double h = span / static_cast<double>(steps);
  // Trapezoid rule over the averaging window.
  double acc = 0.5 * observable_value(A, integ.state());
  for (std::size_t i = 1; i <= steps; ++i) {
    integ.step(h);
    acc += (i == steps ? 0.5 : 1.0) * observable_value(A, integ.state());
  }
  out.average = acc / static_cast<double>(steps);
  return out;
}

ProfileAxis make_axis(std::string name, std::size_t bins, const std::vector<ProfileSample>& samples, std::size_t a) {
  ProfileAxis ax;
  ax.name = std::move(name);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.c[a]);
    hi = std::max(hi, s.c[a]);
  }
  const double pad = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (hi - lo <= pad) {
    ax.lo = ax.hi = 0.5 * (lo + hi);
    ax.bins = 1;
  } else {
    ax.lo = lo - pad;
    ax.hi = hi + pad;
    ax.bins = bins;
  }
  return ax;
}

void finite_differences(ErgodicProfile& prof, std::size_t stride) {
  const std::size_t na = prof.axes.size();
  const std::size_t cells = prof.cells();
  prof.dA_dc.assign(na, std::vector<double>(cells, 0.0));
  prof.dA_valid.assign(na, std::vector<std::uint8_t>(cells, 0));
  for (std::size_t a = 0; a < na; ++a) {
    if (prof.axes[a].bins < 2) continue;
    std::size_t step = 1;  // flat-index distance of one bin along axis a
    for (std::size_t b = a + 1; b < na; ++b) step *= prof.axes[b].bins;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const auto idx = prof.unflatten(cell);
      const std::size_t i = idx[a];
      const std::size_t bins = prof.axes[a].bins;
      auto neighbour = [&](long off) -> std::optional<std::size_t> {
        const long j = static_cast<long>(i) + off;
        if (j < 0 || j >= static_cast<long>(bins)) return std::nullopt;
        const std::size_t c = static_cast<std::size_t>(static_cast<long>(cell) + off * static_cast<long>(step));
        if (!prof.valid[c]) return std::nullopt;
        return c;
      };
      const long s = static_cast<long>(stride);
      auto lo = neighbour(-s), hi = neighbour(s);
      std::optional<std::size_t> mid = prof.valid[cell] ? std::optional<std::size_t>(cell) : std::nullopt;
      std::optional<std::size_t> p, m;
      if (lo && hi) {
        p = hi;
        m = lo;
      } else if (hi && mid) {
        p = hi;
        m = mid;
      } else if (lo && mid) {
        p = mid;
        m = lo;
      }
      if (!p) continue;
      const double dc = prof.c_mean[a][*p] - prof.c_mean[a][*m];
      if (!(std::abs(dc) > 0.0)) continue;
      prof.dA_dc[a][cell] = (prof.abar[*p] - prof.abar[*m]) / dc;
      prof.dA_valid[a][cell] = 1;
    }
  }
}

// Local linear regression over the profile trajectories.
class LocalLinear {
 public:
  LocalLinear(const ErgodicProfile& prof, const std::vector<ProfileSample>& samples, const CinfConfig& pcfg)
      : samples_(samples) {
    for (std::size_t a = 0; a < prof.axes.size(); ++a)
      if (prof.axes[a].bins > 1) live_.push_back(a);
    const auto d = static_cast<Eigen::Index>(live_.size());
    if (d == 0) return;
    // Whitening z = Linv (c - mu) from the profile covariance.
    mu_ = Eigen::VectorXd::Zero(d);
    for (const auto& s : samples)
      for (Eigen::Index j = 0; j < d; ++j) mu_[j] += s.c[live_[static_cast<std::size_t>(j)]];
    mu_ /= static_cast<double>(samples.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& s : samples) {
      const Eigen::VectorXd v = centred(s.c);
      cov += v * v.transpose();
    }
    cov /= static_cast<double>(samples.size() - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      live_.clear();
      return;
    }
    linv_ = llt.matrixL().solve(Eigen::MatrixXd::Identity(d, d));
    z_.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) z_[i] = linv_ * centred(samples[i].c);

    if (pcfg.span > 0.0) {
      k_ = neighbours(pcfg.span, pcfg.min_fit);
    } else {
      // Leave-one-out cross-validation over a fixed ladder of spans.
      double best = std::numeric_limits<double>::infinity();
      for (double span : kSpanLadder) {
        const std::size_t k = neighbours(span, pcfg.min_fit);
        double sse = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < z_.size(); ++i) {
          const auto beta = fit(z_[i], k, i);
          if (!beta) continue;
          const double r = samples_[i].average - (*beta)[0];
          sse += r * r;
          ++n;
        }
        if (n == 0) continue;
        const double score = sse / static_cast<double>(n);
        if (score < best) {
          best = score;
          k_ = k;
        }
      }
      if (k_ == 0) k_ = neighbours(0.25, pcfg.min_fit);
    }
  }

  static constexpr double kSpanLadder[] = {0.05, 0.075, 0.1, 0.15, 0.2, 0.25, 0.35, 0.5, 0.7, 1.0};

  const std::vector<std::size_t>& live() const { return live_; }
  /// Fraction of the profile trajectories in each neighbourhood.
  double span() const { return z_.empty() ? 0.0 : static_cast<double>(k_) / static_cast<double>(z_.size()); }

  /// dAbar/dc for the live axes at constants c, or nullopt if the fit is singular.
  std::optional<std::vector<double>> gradient(std::span<const double> c) const {
    if (live_.empty()) return std::nullopt;
    const auto beta = fit(linv_ * centred(c), k_, z_.size());
    if (!beta) return std::nullopt;
    // dAbar/dc = Linv^T dAbar/dz
    const Eigen::VectorXd g = linv_.transpose() * beta->tail(static_cast<Eigen::Index>(live_.size()));
    return std::vector<double>(g.data(), g.data() + g.size());
  }

 private:
  std::size_t neighbours(double span, std::size_t min_fit) const {
    const auto k = static_cast<std::size_t>(std::ceil(span * static_cast<double>(z_.size())));
    return std::min(z_.size(), std::max(min_fit, k));
  }

  // Intercept and dAbar/dz at z0 from the k nearest trajectories, skipping index `skip`.
  std::optional<Eigen::VectorXd> fit(const Eigen::VectorXd& z0, std::size_t k, std::size_t skip) const {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i)
      if (i != skip) dist.emplace_back((z_[i] - z0).norm(), i);
    k = std::min(k, dist.size());
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    double radius = 0.0;
    for (std::size_t i = 0; i < k; ++i) radius = std::max(radius, dist[i].first);
    radius *= 1.0 + 1e-9;
    if (!(radius > 0.0)) return std::nullopt;

    const auto d = static_cast<Eigen::Index>(live_.size());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(k), d + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const std::size_t i = dist[r].second;
      const double u = dist[r].first / radius;
      const double w = std::sqrt(std::pow(1.0 - u * u * u, 3));  // sqrt of tricube
      X(ri, 0) = w;
      X.row(ri).tail(d) = w * (z_[i] - z0).transpose();
      y[ri] = w * samples_[i].average;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < d + 1) return std::nullopt;
    return Eigen::VectorXd(qr.solve(y));
  }

  Eigen::VectorXd centred(std::span<const double> c) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(live_.size()));
    for (std::size_t j = 0; j < live_.size(); ++j) v[static_cast<Eigen::Index>(j)] = c[live_[j]] - mu_[static_cast<Eigen::Index>(j)];
    return v;
  }

  const std::vector<ProfileSample>& samples_;
  std::vector<std::size_t> live_;
  std::size_t k_ = 0;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd linv_;
  std::vector<Eigen::VectorXd> z_;
};

void local_linear_grid(ErgodicProfile& prof, const LocalLinear& fit) {
  const std::size_t na = prof.axes.size();
  const std::size_t cells = prof.cells();
  prof.dA_dc.assign(na, std::vector<double>(cells, 0.0));
  prof.dA_valid.assign(na, std::vector<std::uint8_t>(cells, 0));
  std::vector<double> c(na);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (!prof.valid[cell]) continue;
    for (std::size_t a = 0; a < na; ++a) c[a] = prof.c_mean[a][cell];
    const auto g = fit.gradient(c);
    if (!g) continue;
    for (std::size_t j = 0; j < fit.live().size(); ++j) {
      prof.dA_dc[fit.live()[j]][cell] = (*g)[j];
      prof.dA_valid[fit.live()[j]][cell] = 1;
    }
  }
}

}  // namespace

CinfResult cinf(const BoseHubbardParams& params, const SamplerSpec& spec, const Observable& A, const Observable& B,
                const CinfConfig& pcfg, std::size_t count, const FlowConfig& cfg, std::size_t workers) {
  params.validate();
  cfg.validate();
  spec.validate();
  pcfg.validate();
  if (count < 2) throw ConfigError("cinf: count must be >= 2");
  if (spec.sites() != params.sites) throw ConfigError("cinf: sampler and system differ in site count");
  FlowConfig fcfg = cfg;
  if (pcfg.dt > 0.0) fcfg.dt = pcfg.dt;

  // Step 1: time averages of A along profile trajectories.
  std::vector<ProfileSample> samples(pcfg.n_traj);
  parallel_blocks(pcfg.n_traj, 1, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) samples[k] = run_profile_trajectory(params, spec, A, pcfg, fcfg, k);
  });

  CinfResult res;
  ErgodicProfile& prof = res.profile;
  const bool autonomous = params.autonomous();
  if (autonomous) {
    prof.axes.push_back(make_axis("E", pcfg.e_bins, samples, 0));
    prof.axes.push_back(make_axis("N", pcfg.n_bins ? pcfg.n_bins : 16, samples, 1));
  } else {
    prof.axes.push_back(make_axis("N", pcfg.n_bins ? pcfg.n_bins : 64, samples, 0));
  }
  std::size_t cells = 1;
  for (const auto& ax : prof.axes) cells *= ax.bins;
  const std::size_t na = prof.axes.size();

  std::vector<Moments> acc(cells);
  std::vector<std::vector<double>> csum(na, std::vector<double>(cells, 0.0));
  for (const auto& s : samples) {
    const auto cell = prof.locate(s.c);
    if (!cell) continue;
    acc[*cell].add(s.average);
    for (std::size_t a = 0; a < na; ++a) csum[a][*cell] += s.c[a];
  }
  prof.count.resize(cells);
  prof.abar.resize(cells);
  prof.abar_err.resize(cells);
  prof.valid.resize(cells);
  prof.c_mean.assign(na, std::vector<double>(cells, 0.0));
  for (std::size_t c = 0; c < cells; ++c) {
    prof.count[c] = static_cast<std::size_t>(acc[c].n);
    prof.valid[c] = prof.count[c] >= pcfg.min_count;
    prof.abar[c] = acc[c].mean;
    prof.abar_err[c] = acc[c].standard_error();
    for (std::size_t a = 0; a < na; ++a)
      prof.c_mean[a][c] = prof.count[c] ? csum[a][c] / acc[c].n : prof.axes[a].center(prof.unflatten(c)[a]);
  }

  // Step 2: partial derivatives. The grid always carries them for output;
  // local_linear re-evaluates at each sample's own constants in step 3.
  std::optional<LocalLinear> fit;
  // Cross-fitting: slopes from two disjoint halves of the profile multiply to
  // an unbiased estimate of the squared slope, where one noisy slope squared
  // is biased upward by its variance.
  std::array<std::vector<ProfileSample>, 2> halves;
  std::array<std::optional<LocalLinear>, 2> cross;
  if (pcfg.derivative == ProfileDerivative::local_linear) {
    fit.emplace(prof, samples, pcfg);
    local_linear_grid(prof, *fit);
    res.span = fit->span();
    if (pcfg.cross_fit) {
      for (std::size_t k = 0; k < samples.size(); ++k) halves[k % 2].push_back(samples[k]);
      for (std::size_t h = 0; h < 2; ++h) cross[h].emplace(prof, halves[h], pcfg);
      res.span = 0.5 * (cross[0]->span() + cross[1]->span());
    }
  } else {
    finite_differences(prof, pcfg.fd_stride);
  }

  // Step 3: chain rule over fresh samples.
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  std::vector<Moments> parts(blocks);
  std::vector<std::size_t> excluded(blocks, 0);
  std::vector<std::size_t> flat_axis(blocks, 0);
  parallel_blocks(count, kSampleBlock, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::vector<double> bracket(na);
    for (std::size_t k = begin; k < end; ++k) {
      const PhaseSpacePoint x = draw(spec, k);
      const auto c = motion_constants(params, x, fcfg.weyl_corrected);
      const auto gb = grad_observable(B, x);
      const auto jb = apply_symplectic(gb);
      const auto cell = prof.locate(c);
      if (!cell) {
        ++excluded[b];
        continue;
      }
      // {c_a, B} = grad c_a . Jsym grad B
      bool flat = false;
      bool any = false;
      for (std::size_t a = 0; a < na; ++a) {
        std::vector<double> gc = prof.axes[a].name == "E" ? hcl_gradient(params, 0.0, x, fcfg.weyl_corrected)
                                                          : std::vector<double>(x.data().begin(), x.data().end());
        bracket[a] = 0.0;
        for (std::size_t i = 0; i < gc.size(); ++i) bracket[a] += gc[i] * jb[i];
        if (bracket[a] == 0.0) continue;
        any = true;
        if (prof.axes[a].bins < 2) flat = true;
      }
      if (flat) {
        ++flat_axis[b];
        ++excluded[b];
        continue;
      }
      if (!any) {
        parts[b].add(0.0);
        continue;
      }
      std::optional<double> value;
      if (fit) {
        // Sum over live axes; axes with a zero bracket contribute nothing.
        auto chain = [&](const LocalLinear& f) -> std::optional<double> {
          const auto g = f.gradient(c);
          if (!g) return std::nullopt;
          double sum = 0.0;
          for (std::size_t j = 0; j < f.live().size(); ++j) sum += (*g)[j] * bracket[f.live()[j]];
          return sum;
        };
        if (pcfg.cross_fit) {
          const auto u = chain(*cross[0]);
          const auto v = chain(*cross[1]);
          if (u && v) value = *u * *v;
        } else if (const auto u = chain(*fit)) {
          value = *u * *u;
        }
      } else {
        double sum = 0.0;
        bool ok = true;
        for (std::size_t a = 0; a < na && ok; ++a) {
          if (bracket[a] == 0.0) continue;
          ok = prof.dA_valid[a][*cell] != 0;
          sum += prof.dA_dc[a][*cell] * bracket[a];
        }
        if (ok) value = sum * sum;
      }
      if (!value) {
        ++excluded[b];
        continue;
      }
      parts[b].add(*value);
    }
  });

  std::size_t flat = 0;
  for (std::size_t f : flat_axis) flat += f;
  if (flat > 0)
    throw ConfigError("cinf: the profile has no spread along a constant whose bracket with " + B.name() +
                      " is nonzero; set a positive profile broaden");
  for (std::size_t e : excluded) res.excluded += e;
  if (static_cast<double>(res.excluded) > pcfg.max_excluded * static_cast<double>(count))
    throw NumericalError("cinf: " + std::to_string(res.excluded) + " of " + std::to_string(count) +
                         " samples fell outside valid profile cells; raise n_traj or lower the bin counts");
  const Moments m = merge_tree(parts);
  res.value = m.mean;
  res.stderr_ = m.standard_error();
  res.used = static_cast<std::size_t>(m.n);
  return res;
}

}  // namespace bhotoc
