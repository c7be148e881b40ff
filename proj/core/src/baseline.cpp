#include "contourlab/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include <fmt/format.h>

#include "contourlab/errors.hpp"
#include "contourlab/trajectory.hpp"

namespace contourlab {

namespace {

// Recent path of UAV i ending at `start`, then `horizon` steps turning by
// `delta` each step. A UAV without enough history gets a virtual point one
// step behind, along its heading.
std::vector<Vec2> candidate_path(const EpisodeState& state, std::size_t i, const Vec2& start, double delta,
                                 std::size_t horizon) {
  const auto& c = state.config;
  const auto& hist = state.uavs[i].history;
  const double step = c.uav_speed * c.dt;
  const std::size_t keep = std::min(hist.size(), c.history_window);
  std::vector<Vec2> points;
  points.reserve(keep + horizon + 1);
  double heading = state.uavs[i].heading;
  if (keep < 2) points.push_back(start - step * heading_vector(heading));
  points.insert(points.end(), hist.end() - static_cast<std::ptrdiff_t>(keep), hist.end());
  points.back() = start;
  for (std::size_t k = 0; k < horizon; ++k) {
    heading += delta;
    points.push_back(points.back() + step * heading_vector(heading));
  }
  return points;
}

// Position of UAV i after `k` steps of the candidate arc, sampled at half steps.
Vec2 arc_point(const EpisodeState& state, std::size_t i, const Vec2& start, double delta, std::size_t half_steps) {
  const auto& c = state.config;
  const double step = c.uav_speed * c.dt;
  Vec2 p = start;
  double heading = state.uavs[i].heading;
  for (std::size_t h = 0; h < half_steps; ++h) {
    if (h % 2 == 0) heading += delta;
    p += 0.5 * step * heading_vector(heading);
  }
  return p;
}

}  // namespace

double joint_violation(const EpisodeState& state, std::span<const Vec2> starts, std::span<const double> deltas) {
  const auto& c = state.config;
  const std::size_t n = state.uavs.size();
  std::vector<Vec2> at(n);
  double total = 0.0;
  for (std::size_t h = 1; h <= 2 * kPlanHorizon; ++h) {
    const double t = 0.5 * static_cast<double>(h) * c.dt;
    for (std::size_t i = 0; i < n; ++i) at[i] = arc_point(state, i, starts[i], deltas[i], h);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& o : state.obstacles) {
        total += std::max(0.0, c.safe_distance - (at[i] - (o.position + t * o.velocity)).norm());
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        total += std::max(0.0, c.collision_distance - (at[i] - at[j]).norm());
      }
    }
  }
  return total;
}

PsoParams default_baseline_params(std::uint64_t seed) {
  PsoParams p;
  p.n_particles = 30;
  p.n_iters = 50;
  p.seed = seed;
  return p;
}

double joint_contour_cost(const EpisodeState& state, const PotentialField& field, std::span<const Vec2> starts,
                          std::span<const double> deltas) {
  const auto& c = state.config;
  double total = 0.0;
  for (std::size_t i = 0; i < state.uavs.size(); ++i) {
    const Trajectory t =
        resample_uniform(candidate_path(state, i, starts[i], deltas[i], kPlanHorizon), c.trajectory_spacing());
    total += contour_cost(t, field, c.edge_weight);
  }
  return total;
}

ContourPlan plan_step(const EpisodeState& state, const PotentialField& field, const PsoParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& c = state.config;
  const std::size_t n = state.uavs.size();
  if (n == 0) throw InvalidArgument("plan_step needs at least one UAV");

  std::vector<Vec2> starts;
  starts.reserve(n);
  for (const auto& u : state.uavs) starts.push_back(u.position);

  ContourPlan plan;
  if (n >= 2 && min_pairwise_distance(starts) < c.separation_threshold) {
    PsoParams repair = params;
    repair.bounds.clear();
    repair.n_iters = std::max<std::size_t>(params.n_iters, 100);
    SeparationRepair r = adjust_uav_positions(starts, field, c.separation_threshold, repair);
    starts = std::move(r.positions);
    plan.contour_levels = std::move(r.contour_levels);
  } else {
    for (const auto& p : starts) plan.contour_levels.push_back(field.intensity(p));
  }

  PsoParams search = params;
  if (search.bounds.empty()) search.bounds = {{-kMaxHeadingDelta, kMaxHeadingDelta}};
  PsoOptions options;
  // Flying straight is always among the candidates.
  options.initial_positions.push_back(std::vector<double>(n, 0.0));
  // Arcs that cut into an obstacle's safety disk or pass another UAV closer
  // than d_col are infeasible; among those, shallower intrusions rank first.
  options.violation = [&](std::span<const double> x) { return joint_violation(state, starts, x); };
  const auto cost = [&](std::span<const double> x) {
    if (joint_violation(state, starts, x) > 0.0) return std::numeric_limits<double>::infinity();
    return joint_contour_cost(state, field, starts, x);
  };
  PsoResult best = optimize(cost, n, search, options);

  plan.actions.reserve(n);
  plan.waypoints.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = std::clamp(best.best_position[i], -kMaxHeadingDelta, kMaxHeadingDelta);
    plan.actions.push_back(Action{delta});
    const auto& u = state.uavs[i];
    plan.waypoints.push_back(u.position + c.uav_speed * c.dt * heading_vector(u.heading + delta));
  }
  plan.search_trace = std::move(best.cost_history);
  plan.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

}  // namespace contourlab
