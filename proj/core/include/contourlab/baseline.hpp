#pragma once

#include <vector>

#include "contourlab/field.hpp"
#include "contourlab/pso.hpp"
#include "contourlab/scenario.hpp"

namespace contourlab {

/// One joint decision of the contour-following planner.
struct ContourPlan {
  /// Field intensity at each UAV's (separation-repaired) position.
  std::vector<double> contour_levels;
  /// Position each UAV reaches after applying its action for one step.
  std::vector<Vec2> waypoints;
  std::vector<Action> actions;
  /// Wall-clock time of the whole call, in seconds.
  double wall_seconds = 0.0;
  /// Global-best cost per PSO iteration.
  std::vector<double> search_trace;
};

/// Steps of lookahead per candidate. A candidate keeps turning by its heading
/// delta for this many steps; only the first step is executed.
inline constexpr std::size_t kPlanHorizon = 4;

/// Search budget used when the caller has no preference: 30 particles x 50 iterations.
PsoParams default_baseline_params(std::uint64_t seed = 0);

/// Plans one step for every UAV by minimizing the summed contour cost of each
/// UAV's recent path extended by its candidate arc, over joint heading deltas
/// in [-pi/4, pi/4]. Arcs with a positive joint_violation are infeasible. UAVs closer than the separation threshold are first moved
/// apart with adjust_uav_positions and planned from the repaired positions.
///
/// Empty `params.bounds` means the full action range. Deterministic in
/// `params.seed`; InfeasibleRepair propagates.
ContourPlan plan_step(const EpisodeState& state, const PotentialField& field, const PsoParams& params);

/// Total intrusion of the joint candidate arcs, checked every half step over
/// the horizon: depth inside each obstacle's d_safe disk (obstacles moved along
/// their velocity) plus depth inside d_col between UAV pairs. Zero when feasible.
double joint_violation(const EpisodeState& state, std::span<const Vec2> starts, std::span<const double> deltas);

/// Contour cost of the joint candidate `deltas` from the given start positions,
/// each UAV's path extended by kPlanHorizon steps.
double joint_contour_cost(const EpisodeState& state, const PotentialField& field, std::span<const Vec2> starts,
                          std::span<const double> deltas);

}  // namespace contourlab
