#include "contourlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "contourlab/errors.hpp"

namespace contourlab {

namespace {

constexpr int kMaxSpawnAttempts = 100;

EpisodeState spawn(const ScenarioConfig& c, std::mt19937_64& rng) {
  EpisodeState s;
  s.config = c;
  s.uavs.resize(c.n_uavs);
  const double spacing = c.arena_length / static_cast<double>(c.n_uavs + 1);
  Vec2 centroid = Vec2::Zero();
  for (std::size_t i = 0; i < c.n_uavs; ++i) {
    auto& u = s.uavs[i];
    const double y = spacing * static_cast<double>(i + 1);
    u.spawn = Vec2(0.1 * c.arena_width, y);
    u.target = Vec2(0.9 * c.arena_width, y);
    u.position = u.spawn;
    u.heading = std::atan2(u.target.y() - u.spawn.y(), u.target.x() - u.spawn.x());
    u.history = {u.position};
    centroid += u.position;
  }
  centroid /= static_cast<double>(c.n_uavs);

  Vec2 mean_velocity = Vec2::Zero();
  for (std::size_t i = 0; i < c.n_uavs; ++i) mean_velocity += s.uav_velocity(i);
  mean_velocity /= static_cast<double>(c.n_uavs);
  const double lead = 2.0 * c.uav_speed * c.dt * static_cast<double>(c.lead_steps);
  const Vec2 lead_dir = mean_velocity.norm() > 0.0 ? mean_velocity.normalized() : Vec2(1.0, 0.0);
  s.virtual_center = centroid + lead * lead_dir;
  s.virtual_velocity = mean_velocity;

  std::uniform_real_distribution<double> xs(0.5 * c.arena_width, 0.9 * c.arena_width);
  std::uniform_real_distribution<double> ys(0.1 * c.arena_length, 0.9 * c.arena_length);
  std::uniform_real_distribution<double> speeds(c.obstacle_speed_min, c.obstacle_speed_max);
  std::uniform_int_distribution<std::size_t> pick(0, c.n_uavs - 1);
  s.obstacles.resize(c.n_obstacles);
  for (auto& o : s.obstacles) {
    o.position = Vec2(xs(rng), ys(rng));
    const Vec2 aim = s.uavs[pick(rng)].position - o.position;
    const double speed = speeds(rng);
    o.velocity = aim.norm() > 0.0 ? Vec2(speed * aim.normalized()) : Vec2::Zero();
  }
  return s;
}

}  // namespace

std::pair<double, double> min_distances(const EpisodeState& state) {
  double u2o = std::numeric_limits<double>::infinity();
  double u2u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.uavs.size(); ++i) {
    const Vec2& p = state.uavs[i].position;
    for (const auto& o : state.obstacles) u2o = std::min(u2o, (o.position - p).norm());
    for (std::size_t j = i + 1; j < state.uavs.size(); ++j) {
      u2u = std::min(u2u, (state.uavs[j].position - p).norm());
    }
  }
  return {u2o, u2u};
}

std::pair<EpisodeState, std::vector<Observation>> reset(const ScenarioConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  for (int attempt = 0; attempt < kMaxSpawnAttempts; ++attempt) {
    EpisodeState s = spawn(config, rng);
    const auto [u2o, u2u] = min_distances(s);
    if (std::min(u2o, u2u) < config.collision_distance) continue;
    std::vector<Observation> obs;
    obs.reserve(s.uavs.size());
    for (std::size_t i = 0; i < s.uavs.size(); ++i) obs.push_back(observe(s, i));
    return {std::move(s), std::move(obs)};
  }
  throw StateError(fmt::format("could not spawn a collision-free episode in {} attempts", kMaxSpawnAttempts));
}

StepResult step(EpisodeState& state, std::span<const Action> actions, RewardMode mode) {
  if (state.done) throw StateError("step called on a finished episode");
  if (actions.size() != state.uavs.size()) {
    throw InvalidArgument(fmt::format("expected {} actions, got {}", state.uavs.size(), actions.size()));
  }
  const auto& c = state.config;

  for (std::size_t i = 0; i < state.uavs.size(); ++i) {
    const double delta = actions[i].heading_delta;
    if (!std::isfinite(delta)) throw InvalidArgument("action must be finite");
    auto& u = state.uavs[i];
    u.heading = wrap_angle(u.heading + std::clamp(delta, -kMaxHeadingDelta, kMaxHeadingDelta));
    u.position += c.uav_speed * c.dt * heading_vector(u.heading);
    u.history.push_back(u.position);
  }
  for (auto& o : state.obstacles) o.position += c.dt * o.velocity;
  state.virtual_center += c.dt * state.virtual_velocity;
  ++state.step;

  StepResult out;
  auto& info = out.info;
  std::tie(info.min_u2o, info.min_u2u) = min_distances(state);
  info.collided.assign(state.uavs.size(), 0);
  bool any_collision = false;
  for (std::size_t i = 0; i < state.uavs.size(); ++i) {
    auto& u = state.uavs[i];
    info.collided[i] = collision_indicator(state, i, c.collision_distance) == 0 ? 1 : 0;
    any_collision = any_collision || info.collided[i];
    if ((u.position - u.target).norm() <= c.collision_distance) u.reached = true;
  }
  const bool all_reached =
      std::all_of(state.uavs.begin(), state.uavs.end(), [](const UavState& u) { return u.reached; });

  if (any_collision) {
    state.reason = Termination::Collision;
  } else if (all_reached) {
    state.reason = Termination::Success;
  } else if (state.step >= c.max_steps) {
    state.reason = Termination::Timeout;
  }
  state.done = state.reason != Termination::None;
  info.reason = state.reason;
  out.done = state.done;

  out.rewards = compute_rewards(state, mode);
  out.observations.reserve(state.uavs.size());
  for (std::size_t i = 0; i < state.uavs.size(); ++i) out.observations.push_back(observe(state, i));
  return out;
}

Observation observe(const EpisodeState& state, std::size_t uav_index) {
  if (uav_index >= state.uavs.size()) throw InvalidArgument("UAV index out of range");
  const auto& c = state.config;
  const auto& u = state.uavs[uav_index];
  const std::size_t m = c.observed_rows();

  Observation obs;
  obs.rows = Observation::Rows::Zero(static_cast<Eigen::Index>(2 + m), 4);
  obs.mask.assign(m, 0);
  const Vec2 v = state.uav_velocity(uav_index);
  const Vec2 v_bar = state.planned_velocity(uav_index);
  obs.rows.row(0) << u.position.x(), u.position.y(), v.x(), v.y();
  obs.rows.row(1) << state.virtual_center.x(), state.virtual_center.y(), v_bar.x(), v_bar.y();

  std::vector<std::pair<double, std::size_t>> visible;
  const double half_aperture = 0.5 * c.sense_aperture;
  for (std::size_t k = 0; k < state.obstacles.size(); ++k) {
    const Vec2 rel = state.obstacles[k].position - u.position;
    const double d = rel.norm();
    if (d > c.sense_range) continue;
    const double bearing = d > 0.0 ? std::abs(wrap_angle(std::atan2(rel.y(), rel.x()) - u.heading)) : 0.0;
    if (bearing > half_aperture) continue;
    visible.emplace_back(d, k);
  }
  std::stable_sort(visible.begin(), visible.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  for (std::size_t r = 0; r < std::min(m, visible.size()); ++r) {
    const auto& o = state.obstacles[visible[r].second];
    obs.rows.row(static_cast<Eigen::Index>(2 + r)) << o.position.x(), o.position.y(), o.velocity.x(),
        o.velocity.y();
    obs.mask[r] = 1;
  }
  return obs;
}

}  // namespace contourlab
