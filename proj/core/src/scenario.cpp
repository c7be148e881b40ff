#include "contourlab/scenario.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "contourlab/errors.hpp"

namespace contourlab {

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("scenario: " + msg); };
  if (n_uavs == 0) fail("n_uavs must be at least 1");
  if (!(arena_width > 0.0 && arena_length > 0.0)) fail("arena dimensions must be positive");
  if (!(uav_speed > 0.0)) fail("uav_speed must be positive");
  if (!(obstacle_speed_min >= 0.0 && obstacle_speed_min <= obstacle_speed_max)) {
    fail("obstacle speed range must satisfy 0 <= min <= max");
  }
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(collision_distance > 0.0 && collision_distance < safe_distance)) fail("need 0 < d_col < d_safe");
  if (!(safe_distance < obstacle_influence)) fail("need d_safe < R_o");
  if (!(swarm_influence > 0.0 && swarm_core > 0.0)) fail("swarm field radii must be positive");
  if (!(separation_threshold > 0.0)) fail("separation_threshold must be positive");
  if (!(sense_range > 0.0 && sense_aperture > 0.0 && sense_aperture <= 2.0 * kPi)) {
    fail("sensor range must be positive and aperture in (0, 2pi]");
  }
  if (max_steps == 0) fail("max_steps must be positive");
  if (history_window < 2) fail("history_window must be at least 2 steps");
  if (!(edge_weight >= 0.0)) fail("edge_weight must be non-negative");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Collision: return "collision";
    case Termination::Success: return "success";
    case Termination::Timeout: return "timeout";
  }
  return "unknown";
}

Vec2 EpisodeState::uav_velocity(std::size_t i) const {
  return config.uav_speed * heading_vector(uavs[i].heading);
}

Vec2 EpisodeState::planned_velocity(std::size_t i) const {
  const auto& u = uavs[i];
  const Vec2 path = u.target - u.spawn;
  const double length = path.norm();
  const Vec2 dir = path / length;
  // Pursue a point a few steps further along the straight path than the
  // UAV's projection onto it; past the end, head for the target.
  const double lookahead = kPursuitSteps * config.uav_speed * config.dt;
  const double s = std::clamp((u.position - u.spawn).dot(dir) + lookahead, 0.0, length);
  const Vec2 to_goal = u.spawn + s * dir - u.position;
  const double d = to_goal.norm();
  if (d <= 1e-9) return config.uav_speed * dir;
  return config.uav_speed * to_goal / d;
}

Eigen::VectorXd Observation::flatten() const {
  Eigen::VectorXd out(rows.size());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) out[r * 4 + c] = rows(r, c);
  }
  return out;
}

#define CONTOURLAB_SCENARIO_FIELDS(X)                                                            \
  X(n_uavs) X(n_obstacles) X(arena_width) X(arena_length) X(uav_speed) X(obstacle_speed_min)     \
  X(obstacle_speed_max) X(dt) X(collision_distance) X(safe_distance) X(obstacle_influence)       \
  X(swarm_influence) X(swarm_core) X(separation_threshold) X(sense_range) X(sense_aperture)      \
  X(max_observed) X(max_steps) X(history_window) X(lead_steps) X(warmup_steps) X(edge_weight)    \
  X(seed)

void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = nlohmann::json::object();
#define X(name) j[#name] = c.name;
  CONTOURLAB_SCENARIO_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  if (!j.is_object()) throw FormatError("scenario config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define X(name)                                                                   \
  if (key == #name) {                                                             \
    try {                                                                         \
      value.get_to(c.name);                                                       \
    } catch (const nlohmann::json::exception& e) {                                \
      throw FormatError(fmt::format("scenario key '{}': {}", key, e.what()));     \
    }                                                                             \
    known = true;                                                                 \
  }
    CONTOURLAB_SCENARIO_FIELDS(X)
#undef X
    if (!known) throw FormatError(fmt::format("unknown scenario key '{}'", key));
  }
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open scenario file {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
  ScenarioConfig c;
  from_json(j, c);
  c.validate();
  return c;
}

}  // namespace contourlab
