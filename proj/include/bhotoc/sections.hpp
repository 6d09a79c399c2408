#pragma once

// Surfaces of section. Angles and occupations come from the quadratures:
// theta_l = atan2(p_l, q_l), n_l = (q_l^2 + p_l^2 - 1)/2.

#include <cstddef>
#include <vector>

#include "bhotoc/classical.hpp"
#include "bhotoc/model.hpp"

namespace bhotoc {

struct SectionPoint {
  double x = 0.0;  // phase difference in [0, 2 pi)
  double y = 0.0;  // n_1 (trimer) or n_1 - n_2 (dimer)
  double time = 0.0;
};

/// Sign of d(theta_2)/ds at the crossing, s being the integration time
/// (physical time for T > 0, reversed time for T < 0).
enum class CrossingDirection { decreasing, increasing };

struct SectionResult {
  std::vector<SectionPoint> points;
  /// Set when the trajectory never crossed the section.
  bool no_crossings = false;
};

/// Trimer section theta_2 = 0 (p_2 = 0, q_2 > 0). Each crossing is refined by
/// one RK4 step with p_2 as the independent variable, landing on p_2 = 0.
/// Records (theta_1 - theta_3 mod 2 pi, n_1). T < 0 integrates backward.
SectionResult poincare(const BoseHubbardParams& params, const PhaseSpacePoint& x0, double T, const FlowConfig& cfg,
                       CrossingDirection direction = CrossingDirection::decreasing);

/// Driven dimer sampled at t_k = k 2 pi / omega, k = 1..n_periods.
/// Records (theta_1 - theta_2 mod 2 pi, n_1 - n_2).
SectionResult stroboscopic(const BoseHubbardParams& params, const PhaseSpacePoint& x0, std::size_t n_periods,
                           const FlowConfig& cfg);

/// x mod 2 pi in [0, 2 pi).
double wrap_angle(double x);

}  // namespace bhotoc
