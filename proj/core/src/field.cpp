#include "contourlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "contourlab/errors.hpp"

namespace contourlab {

void ObstacleSpec::validate() const {
  if (!(safe_distance > 0.0 && safe_distance < influence_radius)) {
    throw InvalidArgument(fmt::format(
        "obstacle field needs 0 < d_safe < R_o (got d_safe={}, R_o={})",
        safe_distance, influence_radius));
  }
  if (!position.allFinite() || !velocity.allFinite()) {
    throw InvalidArgument("obstacle position/velocity must be finite");
  }
}

void SwarmFieldSpec::validate() const {
  if (!(influence_radius > 0.0) || !(speed > 0.0) || !(core_radius > 0.0)) {
    throw InvalidArgument(fmt::format(
        "swarm field needs R_s > 0, v_s > 0, core > 0 (got R_s={}, v_s={}, core={})",
        influence_radius, speed, core_radius));
  }
  if (!virtual_center.allFinite()) {
    throw InvalidArgument("virtual center must be finite");
  }
}

PotentialField::PotentialField(std::vector<ObstacleSpec> obstacles, SwarmFieldSpec swarm)
    : obstacles_(std::move(obstacles)), swarm_(swarm) {
  swarm_.validate();
  for (const auto& o : obstacles_) o.validate();
}

double PotentialField::intensity(const Vec2& q) const { return phi_total(q, *this); }
Vec2 PotentialField::gradient(const Vec2& q) const { return grad_phi(q, *this); }

double phi_obstacle(const Vec2& q, const ObstacleSpec& obs, double swarm_speed) {
  const double d = (q - obs.position).norm();
  const double peak = std::max(obs.speed(), swarm_speed);
  if (d <= obs.safe_distance) return peak / (obs.safe_distance * obs.safe_distance);
  if (d <= obs.influence_radius) return peak / (d * d);
  return 0.0;
}

double phi_swarm(const Vec2& q, const SwarmFieldSpec& spec) {
  const double d = (q - spec.virtual_center).norm();
  if (d > spec.influence_radius) return 0.0;
  const double r = std::max(d, spec.core_radius);
  return spec.speed / (r * r);
}

double phi_total(const Vec2& q, const PotentialField& field) {
  double total = phi_swarm(q, field.swarm());
  for (const auto& o : field.obstacles()) total += phi_obstacle(q, o, field.swarm().speed);
  return total;
}

namespace {

// d/dq of peak/|q-p|^2 = -2 peak (q-p)/|q-p|^4
Vec2 inverse_square_gradient(const Vec2& offset, double d, double peak) {
  const double d2 = d * d;
  return (-2.0 * peak / (d2 * d2)) * offset;
}

}  // namespace

Vec2 grad_obstacle(const Vec2& q, const ObstacleSpec& obs, double swarm_speed) {
  const Vec2 offset = q - obs.position;
  const double d = offset.norm();
  if (d <= obs.safe_distance || d > obs.influence_radius) return Vec2::Zero();
  return inverse_square_gradient(offset, d, std::max(obs.speed(), swarm_speed));
}

Vec2 grad_swarm(const Vec2& q, const SwarmFieldSpec& spec) {
  const Vec2 offset = q - spec.virtual_center;
  const double d = offset.norm();
  if (d <= spec.core_radius || d > spec.influence_radius) return Vec2::Zero();
  return inverse_square_gradient(offset, d, spec.speed);
}

Vec2 grad_phi(const Vec2& q, const PotentialField& field) {
  Vec2 g = grad_swarm(q, field.swarm());
  for (const auto& o : field.obstacles()) g += grad_obstacle(q, o, field.swarm().speed);
  return g;
}

}  // namespace contourlab
