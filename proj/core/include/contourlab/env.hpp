#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "contourlab/reward.hpp"
#include "contourlab/scenario.hpp"

namespace contourlab {

struct StepInfo {
  double min_u2o = std::numeric_limits<double>::infinity();
  double min_u2u = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> collided;  // per UAV
  Termination reason = Termination::None;
};

struct StepResult {
  std::vector<Observation> observations;
  std::vector<RewardBreakdown> rewards;
  bool done = false;
  StepInfo info;
};

/// Starts an episode from `config` (deterministic in config.seed).
///
/// UAVs are spaced evenly on the vertical line x = 0.1 w heading right toward
/// targets at x = 0.9 w; obstacles start at random points of the right half and
/// fly at a random constant speed toward a randomly chosen UAV. Spawns closer
/// than d_col are redrawn up to 100 times before StateError is thrown.
std::pair<EpisodeState, std::vector<Observation>> reset(const ScenarioConfig& config);

/// Advances the episode by one control step. Actions are clamped to
/// [-pi/4, pi/4]. Throws StateError if the episode is already done and
/// InvalidArgument if the action count does not match the UAV count.
StepResult step(EpisodeState& state, std::span<const Action> actions,
                RewardMode mode = RewardMode::Evaluation);

/// Partial observation of one UAV: obstacles inside the sensing range and the
/// aperture around its heading, nearest first, at most `observed_rows()`.
Observation observe(const EpisodeState& state, std::size_t uav_index);

/// Minimum UAV-to-obstacle and UAV-to-UAV distances in the current state.
std::pair<double, double> min_distances(const EpisodeState& state);

}  // namespace contourlab
