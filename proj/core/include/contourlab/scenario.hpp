#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "contourlab/geometry.hpp"
#include "contourlab/trajectory.hpp"

namespace contourlab {

/// Everything that defines one family of episodes.
///
/// Units: meters, seconds, radians. Arena size, speeds, sensing geometry and
/// the virtual-center lead are not prescribed by the method itself; the values
/// below are this project's defaults.
struct ScenarioConfig {
  std::size_t n_uavs = 2;
  std::size_t n_obstacles = 1;
  double arena_width = 800.0;
  double arena_length = 800.0;
  double uav_speed = 10.0;
  double obstacle_speed_min = 3.0;
  double obstacle_speed_max = 8.0;
  double dt = 1.0;
  double collision_distance = 20.0;    // d_col
  double safe_distance = 40.0;         // d_safe
  double obstacle_influence = 150.0;   // R_o
  double swarm_influence = 150.0;      // R_s
  double swarm_core = 1.0;             // clamp radius of the swarm source
  double separation_threshold = 30.0;  // d_bar between UAVs
  double sense_range = 200.0;
  double sense_aperture = 2.0 * kPi / 3.0;
  std::size_t max_observed = 0;  // 0 means n_obstacles
  std::size_t max_steps = 120;
  std::size_t history_window = 8;  // control steps of history scored by the contour term
  std::size_t lead_steps = 10;     // virtual-center lead, in steps
  std::size_t warmup_steps = 2;    // steps with no contour term at episode start
  double edge_weight = kDefaultEdgeWeight;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on inconsistent values.
  void validate() const;
  std::size_t observed_rows() const { return max_observed == 0 ? n_obstacles : max_observed; }
  std::size_t observation_dim() const { return (2 + observed_rows()) * 4; }
  /// Arc-length spacing for scored trajectories: half the per-step travel.
  double trajectory_spacing() const { return 0.5 * uav_speed * dt; }
};

void to_json(nlohmann::json& j, const ScenarioConfig& c);
/// Strict: unknown keys raise FormatError; missing keys keep defaults.
void from_json(const nlohmann::json& j, ScenarioConfig& c);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

struct UavState {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  Vec2 spawn{0.0, 0.0};
  Vec2 target{0.0, 0.0};
  bool reached = false;
  /// Position after every step, starting with the spawn point.
  std::vector<Vec2> history;
};

struct ObstacleState {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

enum class Termination { None, Collision, Success, Timeout };
const char* to_string(Termination t);

struct EpisodeState {
  ScenarioConfig config;
  std::vector<UavState> uavs;
  std::vector<ObstacleState> obstacles;
  Vec2 virtual_center{0.0, 0.0};
  Vec2 virtual_velocity{0.0, 0.0};
  std::size_t step = 0;
  bool done = false;
  Termination reason = Termination::None;

  Vec2 uav_velocity(std::size_t i) const;
  /// Pre-planned velocity: full speed toward the point kPursuitSteps steps
  /// ahead of the UAV's projection onto its straight spawn-to-target path.
  Vec2 planned_velocity(std::size_t i) const;
};

/// (2 + m) x 4 array: self row, swarm row, then obstacle rows nearest first.
struct Observation {
  using Rows = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>;
  Rows rows;
  /// One validity flag per obstacle row; masked rows are all zero.
  std::vector<std::uint8_t> mask;

  Eigen::VectorXd flatten() const;
};

struct Action {
  double heading_delta = 0.0;
};

inline constexpr double kMaxHeadingDelta = kPi / 4.0;
inline constexpr double kPursuitSteps = 5.0;

}  // namespace contourlab
