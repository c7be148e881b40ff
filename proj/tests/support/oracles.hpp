#pragma once

// Reference computations written independently of the library code paths:
// branch formulas evaluated from scratch and finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace oracle {

struct Source {
  double px, py;   // position
  double peak;     // numerator of the inverse-square law
  double inner;    // plateau radius (0 for none)
  double outer;    // influence radius
};

// Plateau below `inner`, peak / d^2 up to `outer`, zero beyond.
inline double intensity(const Source& s, double x, double y) {
  const double dx = x - s.px, dy = y - s.py;
  const double d = std::sqrt(dx * dx + dy * dy);
  if (d > s.outer) return 0.0;
  if (d <= s.inner) return s.peak / (s.inner * s.inner);
  return s.peak / (d * d);
}

inline double total(const std::vector<Source>& sources, double x, double y) {
  double sum = 0.0;
  for (const auto& s : sources) sum += intensity(s, x, y);
  return sum;
}

// Central difference of a scalar function of two variables.
inline Eigen::Vector2d central_gradient(const std::function<double(double, double)>& f, double x, double y,
                                        double h) {
  return {(f(x + h, y) - f(x - h, y)) / (2 * h), (f(x, y + h) - f(x, y - h)) / (2 * h)};
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Points of a circle arc of radius r around (cx, cy), `n` equal angular steps.
inline std::vector<Eigen::Vector2d> arc(double cx, double cy, double r, double a0, double a1, int n) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double a = a0 + (a1 - a0) * k / n;
    out.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
  }
  return out;
}

}  // namespace oracle
