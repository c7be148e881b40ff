#pragma once

#include <vector>

#include "contourlab/geometry.hpp"

namespace contourlab {

/// Repulsive source for one obstacle.
///
/// Intensity is a plateau of `max(v_o, v_s) / d_safe^2` inside `safe_distance`,
/// an inverse-square falloff out to `influence_radius`, and zero beyond.
struct ObstacleSpec {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
  double influence_radius = 150.0;
  double safe_distance = 40.0;

  double speed() const { return velocity.norm(); }
  /// Throws InvalidArgument unless 0 < safe_distance < influence_radius.
  void validate() const;
};

/// Single repulsive source standing in for the whole swarm at its virtual center.
///
/// The inverse-square law has no plateau of its own; inside `core_radius` the
/// intensity is clamped to `speed / core_radius^2` so that it stays bounded.
struct SwarmFieldSpec {
  Vec2 virtual_center{0.0, 0.0};
  double speed = 10.0;
  double influence_radius = 150.0;
  double core_radius = 1.0;

  void validate() const;
};

/// Superposition of the swarm source and any number of obstacle sources.
/// Immutable after construction; all queries are pure.
class PotentialField {
 public:
  PotentialField() = default;
  PotentialField(std::vector<ObstacleSpec> obstacles, SwarmFieldSpec swarm);

  const std::vector<ObstacleSpec>& obstacles() const { return obstacles_; }
  const SwarmFieldSpec& swarm() const { return swarm_; }

  double intensity(const Vec2& q) const;
  Vec2 gradient(const Vec2& q) const;

 private:
  std::vector<ObstacleSpec> obstacles_;
  SwarmFieldSpec swarm_;
};

double phi_obstacle(const Vec2& q, const ObstacleSpec& obs, double swarm_speed);
double phi_swarm(const Vec2& q, const SwarmFieldSpec& spec);
double phi_total(const Vec2& q, const PotentialField& field);

// Analytic piecewise gradients. A query exactly on a branch boundary takes the
// value of the branch the boundary belongs to (the source side).
Vec2 grad_obstacle(const Vec2& q, const ObstacleSpec& obs, double swarm_speed);
Vec2 grad_swarm(const Vec2& q, const SwarmFieldSpec& spec);
Vec2 grad_phi(const Vec2& q, const PotentialField& field);

}  // namespace contourlab
