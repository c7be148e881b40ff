#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "contourlab/errors.hpp"
#include "contourlab/field.hpp"
#include "contourlab/geometry.hpp"

namespace contourlab {

struct PsoParams {
  std::size_t n_particles = 30;
  std::size_t n_iters = 100;
  double c1 = 1.5;
  double c2 = 1.5;
  /// Inertia mu is drawn uniformly from [lo, hi] per particle per iteration.
  std::pair<double, double> inertia_range{0.0, 1.0};
  /// One [lo, hi] per dimension, or a single pair broadcast to all dimensions.
  std::vector<std::pair<double, double>> bounds;
  std::uint64_t seed = 0;

  void validate(std::size_t dims) const;
};

struct PsoResult {
  std::vector<double> best_position;
  double best_cost = 0.0;
  /// Global best cost after initialization, then after every iteration
  /// (n_iters + 1 entries). Non-increasing.
  std::vector<double> cost_history;
  /// Total number of cost evaluations performed.
  std::size_t evaluations = 0;
};

/// Cost of one particle. +infinity marks an infeasible point; NaN is an error.
using CostFn = std::function<double(std::span<const double>)>;

/// Non-negative constraint violation, used only to rank infeasible particles
/// against each other (feasible beats infeasible, then lower violation wins).
using ViolationFn = std::function<double(std::span<const double>)>;

struct PsoOptions {
  /// Optional starting positions for the first particles (clamped to bounds);
  /// the remaining particles start uniformly inside the bounds.
  std::vector<std::vector<double>> initial_positions;
  ViolationFn violation;
};

/// Particle swarm minimization with velocity update
///   v' = mu v + c1 r1 (p_i - x) + c2 r2 (p_g - x),  x' = x + v'
/// and positions clamped to the bounds after each move. Until some particle is
/// feasible, and only when no violation measure is given, infeasible particles
/// are redrawn uniformly each iteration instead of moving.
///
/// Deterministic for a fixed seed: random numbers are consumed in a fixed
/// particle/dimension order. Throws NumericError if the cost returns NaN.
PsoResult optimize(const CostFn& cost_fn, std::size_t dims, const PsoParams& params,
                   const PsoOptions& options = {});

/// Result of the inter-UAV separation repair.
struct SeparationRepair {
  std::vector<Vec2> positions;
  /// Field intensity at each adjusted position (the UAV's contour level).
  std::vector<double> contour_levels;
  double max_shift = 0.0;
  double min_separation = 0.0;
  /// False when the input already satisfied the constraint and was returned as is.
  bool adjusted = false;
};

/// Raised when no particle reached a configuration satisfying the separation.
class InfeasibleRepair : public Error {
 public:
  InfeasibleRepair(const std::string& what, std::vector<Vec2> best_candidate)
      : Error(what), best_candidate_(std::move(best_candidate)) {}
  const std::vector<Vec2>& best_candidate() const { return best_candidate_; }

 private:
  std::vector<Vec2> best_candidate_;
};

double min_pairwise_distance(std::span<const Vec2> positions);

/// Cost minimized by the separation repair: the smallest pairwise distance when
/// it is at least `min_separation` (+infinity otherwise), plus the largest
/// displacement of any UAV from its original position.
double separation_repair_cost(std::span<const Vec2> original, std::span<const Vec2> candidate,
                              double min_separation);

/// Moves UAV positions as little as possible so that every pair is at least
/// `min_separation` apart. An already feasible input is returned unchanged.
///
/// If `params.bounds` is empty, each coordinate is bounded to +-2 min_separation
/// around its input value. Throws InfeasibleRepair if no feasible particle is found.
SeparationRepair adjust_uav_positions(std::span<const Vec2> positions, const PotentialField& field,
                                      double min_separation, const PsoParams& params);

}  // namespace contourlab
