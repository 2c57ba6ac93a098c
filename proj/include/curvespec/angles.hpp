#pragma once

#include <cmath>
#include <numbers>

namespace curvespec {

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

// Reduce an angle to [-pi, pi).  All cyclic arithmetic in the library goes
// through this one routine; note wrap_angle(pi) == -pi.
inline double wrap_angle(double theta) {
  double w = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
  // floor rounding can leave w == pi when theta is a hair below a period
  // boundary; fold it back so the contract [-pi, pi) holds exactly.
  if (w >= kPi) w -= kTwoPi;
  if (w < -kPi) w += kTwoPi;
  return w;
}

}  // namespace curvespec
