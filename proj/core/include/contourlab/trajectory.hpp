#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "contourlab/field.hpp"
#include "contourlab/geometry.hpp"

namespace contourlab {

/// Weight on the edge (gradient-magnitude) term of the contour cost.
///
/// With physical units the raw |grad Phi|^2 is orders of magnitude below the
/// curvature term (e.g. 5e-8 vs 3e-4 per meter at d_safe = 40 m, v = 10 m/s), so
/// the edge term is scaled to make the d_safe ring the cost minimum. Circles
/// around one obstacle keep their minimum next to d_safe for d_safe up to 60 m
/// at speeds down to 5 m/s; that needs a weight above roughly 5.5e4.
inline constexpr double kDefaultEdgeWeight = 1.0e5;

/// Polyline sampled at (near) uniform arc-length spacing `ds`.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<Vec2> waypoints, double ds);

  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  double ds() const { return ds_; }
  std::size_t size() const { return waypoints_.size(); }
  const Vec2& operator[](std::size_t i) const { return waypoints_[i]; }

 private:
  std::vector<Vec2> waypoints_;
  double ds_ = 0.0;
};

double polyline_length(std::span<const Vec2> points);

/// Resamples a polyline at equal arc-length steps.
///
/// The segment count is round(length / ds) (at least one), so endpoints are kept
/// and the realized spacing stored in the result is length / count.
/// Throws InvalidArgument for fewer than two points, ds <= 0 or zero length.
Trajectory resample_uniform(std::span<const Vec2> points, double ds);

/// Central difference (S[i-1] - 2 S[i] + S[i+1]) / ds^2 for 1 <= i <= size-2.
Vec2 second_derivative(const Trajectory& traj, std::size_t i);

/// Rectangle-rule sum over interior waypoints of
/// (0.5 |S''|^2 - edge_weight * 0.5 |grad Phi(S)|^2) * ds.
double contour_cost(const Trajectory& traj, const PotentialField& field,
                    double edge_weight = kDefaultEdgeWeight);

/// Smoothness half of the contour cost alone.
double smoothness_cost(const Trajectory& traj);

/// Curvature energy: sum over interior waypoints of |S''| * ds.
double energy(const Trajectory& traj);

}  // namespace contourlab
