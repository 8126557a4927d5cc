#pragma once

#include <cmath>
#include <numbers>

namespace liekit {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to the principal interval (-pi, pi].
inline double wrap_to_pi(double theta) {
  double a = std::remainder(theta, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace liekit
