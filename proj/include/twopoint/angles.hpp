#pragma once

#include <cmath>
#include <numbers>

namespace twopoint {

/// Maps an angle onto (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - std::numbers::pi;
}

}  // namespace twopoint
