#include "contourlab/reward.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "contourlab/errors.hpp"

namespace contourlab {

PotentialField build_field(const EpisodeState& state) {
  const auto& c = state.config;
  std::vector<ObstacleSpec> sources;
  sources.reserve(state.obstacles.size());
  for (const auto& o : state.obstacles) {
    sources.push_back(ObstacleSpec{o.position, o.velocity, c.obstacle_influence, c.safe_distance});
  }
  SwarmFieldSpec swarm{state.virtual_center, c.uav_speed, c.swarm_influence, c.swarm_core};
  return PotentialField(std::move(sources), swarm);
}

double formation_reward(const Vec2& v, const Vec2& v_bar) {
  const double nv = v.norm();
  const double nb = v_bar.norm();
  if (!(nv > 0.0) || !(nb > 0.0)) throw InvalidArgument("formation reward needs non-zero velocities");
  return std::clamp(v.dot(v_bar) / (nv * nb), -1.0, 1.0);
}

int collision_indicator(const EpisodeState& state, std::size_t uav_index, double d_col) {
  if (uav_index >= state.uavs.size()) throw InvalidArgument("UAV index out of range");
  const Vec2& p = state.uavs[uav_index].position;
  for (const auto& o : state.obstacles) {
    if ((o.position - p).norm() < d_col) return 0;
  }
  for (std::size_t j = 0; j < state.uavs.size(); ++j) {
    if (j != uav_index && (state.uavs[j].position - p).norm() < d_col) return 0;
  }
  return 1;
}

Trajectory scored_trajectory(const EpisodeState& state, std::size_t uav_index, const Vec2& endpoint) {
  const auto& hist = state.uavs[uav_index].history;
  if (hist.size() < 3) {
    throw InvalidArgument(fmt::format("UAV {} has {} history points; the contour term needs 3", uav_index,
                                      hist.size()));
  }
  const std::size_t keep = std::min(hist.size(), state.config.history_window + 1);
  std::vector<Vec2> points(hist.end() - static_cast<std::ptrdiff_t>(keep), hist.end());
  points.back() = endpoint;
  return resample_uniform(points, state.config.trajectory_spacing());
}

RewardBreakdown compute_reward(const EpisodeState& state, std::size_t uav_index, const Vec2& endpoint,
                               const PotentialField& field) {
  RewardBreakdown r;
  const Trajectory traj = scored_trajectory(state, uav_index, endpoint);
  r.contour = -contour_cost(traj, field, state.config.edge_weight);
  r.formation = formation_reward(state.uav_velocity(uav_index), state.planned_velocity(uav_index));
  r.collide = collision_indicator(state, uav_index, state.config.collision_distance);
  r.total = r.contour + r.formation * r.collide;
  return r;
}

RewardBreakdown compute_reward(const EpisodeState& state, std::size_t uav_index) {
  if (uav_index >= state.uavs.size()) throw InvalidArgument("UAV index out of range");
  return compute_reward(state, uav_index, state.uavs[uav_index].position, build_field(state));
}

std::vector<Vec2> scoring_endpoints(const EpisodeState& state, const PotentialField& field, RewardMode mode) {
  std::vector<Vec2> positions;
  positions.reserve(state.uavs.size());
  for (const auto& u : state.uavs) positions.push_back(u.position);
  if (mode != RewardMode::Training || positions.size() < 2) return positions;

  const double threshold = state.config.separation_threshold;
  if (min_pairwise_distance(positions) >= threshold) return positions;

  PsoParams params;
  params.seed = state.config.seed * 0x100000001b3ULL + state.step;
  try {
    return adjust_uav_positions(positions, field, threshold, params).positions;
  } catch (const InfeasibleRepair& e) {
    spdlog::debug("separation repair infeasible at step {}: {}", state.step, e.what());
    return e.best_candidate();
  }
}

std::vector<RewardBreakdown> compute_rewards(const EpisodeState& state, RewardMode mode) {
  const auto& c = state.config;
  std::vector<RewardBreakdown> out(state.uavs.size());
  if (state.step <= c.warmup_steps) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto& r = out[i];
      r.formation = formation_reward(state.uav_velocity(i), state.planned_velocity(i));
      r.collide = collision_indicator(state, i, c.collision_distance);
      r.total = r.formation * r.collide;
    }
    return out;
  }
  const PotentialField field = build_field(state);
  const std::vector<Vec2> endpoints = scoring_endpoints(state, field, mode);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = compute_reward(state, i, endpoints[i], field);
  return out;
}

}  // namespace contourlab
