#include <doctest.h>

#include <random>

#include "contourlab/errors.hpp"
#include "contourlab/field.hpp"
#include "oracles.hpp"

using namespace contourlab;

namespace {

ObstacleSpec obstacle_at(Vec2 p, double speed, double d_safe, double r_o) {
  return ObstacleSpec{p, Vec2(speed, 0.0), r_o, d_safe};
}

}  // namespace

TEST_SUITE("field") {
  TEST_CASE("obstacle branches") {
    const auto o = obstacle_at({0, 0}, 0.0, 20.0, 100.0);
    CHECK(phi_obstacle({10, 0}, o, 5.0) == doctest::Approx(0.0125).epsilon(1e-15));
    CHECK(phi_obstacle({100.5, 0}, o, 5.0) == 0.0);
    const auto o3 = obstacle_at({0, 0}, 3.0, 20.0, 100.0);
    CHECK(phi_obstacle({0, 30}, o3, 5.0) == doctest::Approx(5.0 / 900.0).epsilon(1e-15));
    // The obstacle's own speed wins when it is the larger one.
    const auto fast = obstacle_at({0, 0}, 8.0, 20.0, 100.0);
    CHECK(phi_obstacle({0, 40}, fast, 5.0) == doctest::Approx(8.0 / 1600.0));
    // Plateau and falloff meet at d_safe; the step to zero sits at R_o.
    CHECK(phi_obstacle({20, 0}, o, 5.0) == doctest::Approx(5.0 / 400.0));
    CHECK(phi_obstacle({100, 0}, o, 5.0) == doctest::Approx(5.0 / 10000.0));
  }

  TEST_CASE("swarm branches and core clamp") {
    SwarmFieldSpec s{{0, 0}, 5.0, 150.0, 1.0};
    CHECK(phi_swarm({151, 0}, s) == 0.0);
    CHECK(phi_swarm({10, 0}, s) == doctest::Approx(0.05));
    for (double r = 0.0; r <= 1.0; r += 0.01) CHECK(phi_swarm({r, 0}, s) == doctest::Approx(5.0));
    CHECK(phi_swarm({1.5, 0}, s) == doctest::Approx(5.0 / 2.25));
    CHECK(phi_swarm({0, 0}, s) == 5.0);
  }

  TEST_CASE("superposition") {
    SwarmFieldSpec s{{500, 500}, 10.0, 150.0, 1.0};
    const Vec2 q(37, 41);
    PotentialField swarm_only({}, s);
    CHECK(phi_total(q, swarm_only) == phi_swarm(q, s));

    const auto o = obstacle_at({40, 40}, 4.0, 20.0, 120.0);
    PotentialField one({o}, s);
    PotentialField two({o, o}, s);
    CHECK(phi_total(q, two) == doctest::Approx(2.0 * phi_total(q, one)));

    const std::vector<ObstacleSpec> three = {obstacle_at({0, 0}, 3, 25, 150), obstacle_at({60, 10}, 7, 30, 100),
                                             obstacle_at({20, 90}, 12, 40, 150)};
    PotentialField f(three, s);
    double sum = phi_swarm(q, s);
    Vec2 g = grad_swarm(q, s);
    for (const auto& ob : three) {
      sum += phi_obstacle(q, ob, s.speed);
      g += grad_obstacle(q, ob, s.speed);
    }
    CHECK(phi_total(q, f) == sum);
    CHECK(grad_phi(q, f) == g);
    CHECK(f.intensity(q) == phi_total(q, f));
  }

  TEST_CASE("gradient zero outside radii and on plateaus") {
    const auto o = obstacle_at({0, 0}, 3.0, 20.0, 100.0);
    SwarmFieldSpec s{{1000, 1000}, 5.0, 150.0, 1.0};
    PotentialField f({o}, s);
    CHECK(grad_phi({300, 0}, f).norm() == 0.0);
    CHECK(grad_phi({5, 5}, f).norm() == 0.0);
    CHECK(grad_phi({20, 0}, f).norm() == 0.0);  // boundary takes the plateau side
    CHECK(grad_obstacle({100, 0}, o, 5.0).norm() > 0.0);  // R_o belongs to the falloff
    CHECK(grad_swarm({1000.5, 1000}, s).norm() == 0.0);
  }

  TEST_CASE("gradient matches finite differences in the falloff branch") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double d_safe = 20 + 30 * u(rng);
      const auto o = obstacle_at({0, 0}, 10 * u(rng), d_safe, d_safe + 50 + 100 * u(rng));
      SwarmFieldSpec s{{5000, 5000}, 5 + 10 * u(rng), 150.0, 1.0};
      PotentialField f({o}, s);
      const double r = d_safe + 1e-3 + (o.influence_radius - d_safe - 2e-3) * u(rng);
      const double a = 2 * kPi * u(rng);
      const Vec2 q(r * std::cos(a), r * std::sin(a));
      const auto fd = oracle::central_gradient([&](double x, double y) { return phi_total({x, y}, f); }, q.x(),
                                               q.y(), 1e-4);
      const Vec2 g = grad_phi(q, f);
      CHECK((g - fd).norm() / fd.norm() <= 1e-5);
    }
  }

  TEST_CASE("non-negativity and radial monotonicity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 800.0);
    std::vector<ObstacleSpec> obs;
    for (int k = 0; k < 5; ++k) obs.push_back(obstacle_at({u(rng), u(rng)}, 5.0, 40.0, 150.0));
    PotentialField f(obs, SwarmFieldSpec{{u(rng), u(rng)}, 10.0, 150.0, 1.0});
    for (int k = 0; k < 10000; ++k) CHECK(phi_total({u(rng), u(rng)}, f) >= 0.0);

    const auto o = obstacle_at({0, 0}, 6.0, 40.0, 150.0);
    double prev = phi_obstacle({40.0, 0}, o, 10.0);
    for (int k = 1; k <= 100; ++k) {
      const double r = 40.0 + 1.2 * k;
      const double v = phi_obstacle({r, 0}, o, 10.0);
      CHECK(v <= prev);
      prev = v;
    }
  }

  TEST_CASE("gradient magnitude peaks next to d_safe") {
    const auto o = obstacle_at({0, 0}, 6.0, 40.0, 150.0);
    double best_r = 0.0, best = -1.0;
    for (double r = 41.0; r <= 150.0; r += 1.0) {
      const double g = grad_obstacle({r, 0}, o, 10.0).norm();
      if (g > best) best = g, best_r = r;
    }
    CHECK(best_r == 41.0);
  }

  TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(obstacle_at({0, 0}, 1.0, 50.0, 40.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(obstacle_at({0, 0}, 1.0, 0.0, 40.0).validate(), InvalidArgument);
    CHECK_THROWS_AS((SwarmFieldSpec{{0, 0}, 0.0, 150.0, 1.0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(PotentialField({obstacle_at({0, 0}, 1.0, 50.0, 40.0)}, SwarmFieldSpec{}), InvalidArgument);
  }
}
