#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace contourlab {

/// Planar point or vector in meters (or m/s for velocities).
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

inline Vec2 heading_vector(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace contourlab
