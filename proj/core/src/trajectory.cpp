#include "contourlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "contourlab/errors.hpp"

namespace contourlab {

Trajectory::Trajectory(std::vector<Vec2> waypoints, double ds)
    : waypoints_(std::move(waypoints)), ds_(ds) {
  if (!(ds_ > 0.0)) throw InvalidArgument("trajectory spacing must be positive");
}

double polyline_length(std::span<const Vec2> points) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) length += (points[i] - points[i - 1]).norm();
  return length;
}

Trajectory resample_uniform(std::span<const Vec2> points, double ds) {
  if (points.size() < 2) throw InvalidArgument("resampling needs at least two points");
  if (!(ds > 0.0)) throw InvalidArgument("resampling spacing must be positive");

  const double length = polyline_length(points);
  if (!(length > 0.0)) throw InvalidArgument("zero-length trajectory cannot be resampled");

  const auto segments = static_cast<std::size_t>(std::max(1.0, std::round(length / ds)));
  const double step = length / static_cast<double>(segments);

  std::vector<Vec2> out;
  out.reserve(segments + 1);
  out.push_back(points.front());

  // Walk the input polyline once, emitting a sample every `step` of arc length.
  std::size_t seg = 1;
  double seg_start = 0.0;  // arc length at points[seg - 1]
  double seg_len = (points[1] - points[0]).norm();
  for (std::size_t k = 1; k < segments; ++k) {
    const double target = step * static_cast<double>(k);
    while (seg_start + seg_len < target && seg + 1 < points.size()) {
      seg_start += seg_len;
      ++seg;
      seg_len = (points[seg] - points[seg - 1]).norm();
    }
    const double t = seg_len > 0.0 ? std::clamp((target - seg_start) / seg_len, 0.0, 1.0) : 0.0;
    out.push_back(points[seg - 1] + t * (points[seg] - points[seg - 1]));
  }
  out.push_back(points.back());
  return Trajectory(std::move(out), step);
}

Vec2 second_derivative(const Trajectory& traj, std::size_t i) {
  if (i < 1 || i + 1 >= traj.size()) {
    throw InvalidArgument(
        fmt::format("second derivative index {} outside [1, {}]", i, traj.size() < 2 ? 0 : traj.size() - 2));
  }
  const auto& s = traj.waypoints();
  return (s[i - 1] - 2.0 * s[i] + s[i + 1]) / (traj.ds() * traj.ds());
}

namespace {

void require_interior(const Trajectory& traj, const char* what) {
  if (traj.size() < 3) {
    throw InvalidArgument(fmt::format("{} needs at least 3 waypoints (got {})", what, traj.size()));
  }
}

}  // namespace

double smoothness_cost(const Trajectory& traj) {
  require_interior(traj, "smoothness cost");
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) sum += 0.5 * second_derivative(traj, i).squaredNorm();
  return sum * traj.ds();
}

double contour_cost(const Trajectory& traj, const PotentialField& field, double edge_weight) {
  require_interior(traj, "contour cost");
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double bend = 0.5 * second_derivative(traj, i).squaredNorm();
    const double edge = 0.5 * grad_phi(traj[i], field).squaredNorm();
    sum += bend - edge_weight * edge;
  }
  return sum * traj.ds();
}

double energy(const Trajectory& traj) {
  require_interior(traj, "energy");
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) sum += second_derivative(traj, i).norm();
  return sum * traj.ds();
}

}  // namespace contourlab
