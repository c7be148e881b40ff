#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "contourlab/field.hpp"
#include "contourlab/pso.hpp"
#include "contourlab/scenario.hpp"
#include "contourlab/trajectory.hpp"

namespace contourlab {

/// Per-UAV reward split into its Contour and Swarming parts.
struct RewardBreakdown {
  double contour = 0.0;    // -f(S, Phi)
  double formation = 0.0;  // r_form, cosine in [-1, 1]
  int collide = 1;         // r_collide: 0 on collision, 1 otherwise
  double total = 0.0;      // contour + formation * collide

  double swarming() const { return formation * collide; }
};

/// Training rewards run the separation repair before scoring; evaluation does not.
enum class RewardMode { Evaluation, Training };

/// Field from the global state: one source per obstacle plus the swarm source
/// at the virtual center.
PotentialField build_field(const EpisodeState& state);

/// Cosine between the actual and the pre-planned velocity.
/// Throws InvalidArgument if either vector has zero length.
double formation_reward(const Vec2& v, const Vec2& v_bar);

/// 0 if this UAV is closer than d_col to any obstacle or other UAV, else 1.
int collision_indicator(const EpisodeState& state, std::size_t uav_index, double d_col);

/// Last `history_window` steps of the UAV's path plus its newest step, with the
/// newest point replaced by `endpoint`, resampled at the scenario spacing.
Trajectory scored_trajectory(const EpisodeState& state, std::size_t uav_index, const Vec2& endpoint);

/// Reward for one UAV with the newest trajectory point at its actual position.
/// Throws InvalidArgument if the UAV has fewer than 3 history points.
RewardBreakdown compute_reward(const EpisodeState& state, std::size_t uav_index);

/// As above, scoring the trajectory with the given (possibly repaired) endpoint.
RewardBreakdown compute_reward(const EpisodeState& state, std::size_t uav_index, const Vec2& endpoint,
                               const PotentialField& field);

/// Endpoints used to score trajectories. In training mode, if any pair of UAVs is
/// closer than the separation threshold the positions go through
/// adjust_uav_positions first; if the repair is infeasible its best candidate is used.
std::vector<Vec2> scoring_endpoints(const EpisodeState& state, const PotentialField& field, RewardMode mode);

/// Rewards for all UAVs after a step, including the warm-up rule (no contour
/// term during the first `warmup_steps` steps).
std::vector<RewardBreakdown> compute_rewards(const EpisodeState& state, RewardMode mode);

}  // namespace contourlab
