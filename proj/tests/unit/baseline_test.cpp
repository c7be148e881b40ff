#include <doctest.h>

#include <cmath>
#include <random>

#include "contourlab/baseline.hpp"
#include "contourlab/env.hpp"
#include "contourlab/reward.hpp"

using namespace contourlab;

namespace {

// One UAV flying at a single static obstacle; returns the closest approach.
double static_obstacle_rollout(const Vec2& obstacle, std::uint64_t seed) {
  ScenarioConfig c;
  c.n_uavs = 1;
  c.n_obstacles = 1;
  c.seed = seed;
  c.max_steps = 70;  // the obstacle is always passed by then
  auto [s, obs] = reset(c);
  s.obstacles[0] = {obstacle, Vec2(0, 0)};
  double closest = (s.uavs[0].position - obstacle).norm();
  while (!s.done) {
    const ContourPlan plan = plan_step(s, build_field(s), default_baseline_params(seed * 1000 + s.step));
    const StepResult r = step(s, plan.actions);
    closest = std::min(closest, r.info.min_u2o);
  }
  return closest;
}

}  // namespace

TEST_SUITE("baseline") {
  TEST_CASE("flat field keeps a straight course") {
    ScenarioConfig c;
    c.n_uavs = 1;
    c.n_obstacles = 0;
    auto [s, obs] = reset(c);
    const std::vector<Action> straight(1);
    for (int k = 0; k < 4; ++k) step(s, straight);
    s.virtual_center = Vec2(-5000, -5000);
    const ContourPlan plan = plan_step(s, build_field(s), default_baseline_params(3));
    REQUIRE(plan.actions.size() == 1);
    CHECK(std::abs(plan.actions[0].heading_delta) <= 0.05);
    CHECK(plan.wall_seconds > 0.0);
    CHECK(plan.search_trace.size() == 51);
  }

  TEST_CASE("plan invariants") {
    ScenarioConfig c;
    c.n_uavs = 3;
    c.n_obstacles = 2;
    c.seed = 17;
    auto [s, obs] = reset(c);
    const std::vector<Action> straight(3);
    for (int k = 0; k < 10 && !s.done; ++k) step(s, straight);
    const ContourPlan plan = plan_step(s, build_field(s), default_baseline_params(1));
    REQUIRE(plan.waypoints.size() == 3);
    REQUIRE(plan.contour_levels.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(plan.actions[i].heading_delta) <= kMaxHeadingDelta);
      CHECK((plan.waypoints[i] - s.uavs[i].position).norm() <= c.uav_speed * c.dt + 1e-9);
    }
  }

  TEST_CASE("same seed and state give the same plan") {
    ScenarioConfig c;
    c.n_uavs = 2;
    c.n_obstacles = 1;
    c.seed = 5;
    auto [s, obs] = reset(c);
    const std::vector<Action> straight(2);
    for (int k = 0; k < 6; ++k) step(s, straight);
    const PotentialField f = build_field(s);
    const ContourPlan a = plan_step(s, f, default_baseline_params(42));
    const ContourPlan b = plan_step(s, f, default_baseline_params(42));
    CHECK(a.actions[0].heading_delta == b.actions[0].heading_delta);
    CHECK(a.actions[1].heading_delta == b.actions[1].heading_delta);
    CHECK(a.search_trace == b.search_trace);
  }

  TEST_CASE("crowded UAVs are planned from repaired positions") {
    ScenarioConfig c;
    c.n_uavs = 2;
    c.n_obstacles = 0;
    auto [s, obs] = reset(c);
    s.uavs[1].position = s.uavs[0].position + Vec2(0, 10);
    const PotentialField f = build_field(s);
    const ContourPlan plan = plan_step(s, f, default_baseline_params(2));
    CHECK(plan.contour_levels.size() == 2);
    CHECK(plan.actions.size() == 2);
  }

  TEST_CASE("head-on static obstacle is skirted") {
    const double closest = static_obstacle_rollout({400, 400}, 1);
    ScenarioConfig c;
    CHECK(closest >= c.safe_distance - 2 * c.uav_speed * c.dt);
  }

  TEST_CASE("static obstacle safety over 100 seeds") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(300, 600), uy(360, 440);
    int safe = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Vec2 at(ux(rng), uy(rng));
      safe += static_obstacle_rollout(at, seed) >= ScenarioConfig{}.collision_distance ? 1 : 0;
    }
    CHECK(safe >= 95);
  }
}
