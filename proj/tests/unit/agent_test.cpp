#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "contourlab/agent.hpp"
#include "contourlab/checkpoint.hpp"
#include "contourlab/errors.hpp"
#include "ddpg_checks.hpp"

using namespace contourlab;

namespace {

// Q(o, a) = -|a|, independent of o.
ValueNet abs_penalty(std::size_t obs_dim) {
  ValueNet v(obs_dim, 4);
  v.action_branch().weight(0, 0) = 1.0;
  v.action_branch().weight(1, 0) = -1.0;
  v.merge_layer().weight(0, 4) = 1.0;
  v.merge_layer().weight(1, 5) = 1.0;
  v.output_layer().weight(0, 0) = -1.0;
  v.output_layer().weight(0, 1) = -1.0;
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("agent") {
  TEST_CASE("backward passes match finite differences") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto errors = ddpg_checks::gradient_errors(ddpg_checks::random_instance(seed));
      CHECK(errors.value <= 1e-4);
      CHECK(errors.policy <= 1e-4);
    }
  }

  TEST_CASE("value action gradient matches finite differences") {
    auto in = ddpg_checks::random_instance(21);
    ValueNet::Cache cache;
    in.value.forward(in.batch.obs, in.batch.actions, cache);
    const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(in.batch.actions.size());
    const Eigen::RowVectorXd da = in.value.backward(in.batch.obs, in.batch.actions, cache, ones, nullptr);
    for (Eigen::Index j = 0; j < da.size(); ++j) {
      Eigen::RowVectorXd up = in.batch.actions, down = in.batch.actions;
      up[j] += 1e-6;
      down[j] -= 1e-6;
      const double fd = (in.value.forward(in.batch.obs, up).sum() - in.value.forward(in.batch.obs, down).sum()) / 2e-6;
      CHECK(std::abs(fd - da[j]) <= 1e-4 * std::max(1e-6, std::abs(fd)));
    }
  }

  TEST_CASE("observation encoding is relative and heading aligned") {
    ScenarioConfig c;
    c.n_obstacles = 2;
    // self, swarm, one visible obstacle, one masked row
    const std::vector<Vec2> pos = {{300, 420}, {380, 400}, {450, 470}};
    const std::vector<Vec2> vel = {{6, 8}, {10, 0}, {-5, 1}};
    auto scene = [&](double angle) {
      const Eigen::Rotation2Dd rot(angle);
      const Vec2 pivot(400, 400);
      Observation o;
      o.rows = Observation::Rows::Zero(4, 4);
      o.mask = {1, 0};
      for (int r = 0; r < 3; ++r) {
        const Vec2 p = pivot + rot * (pos[r] - pivot), v = rot * vel[r];
        o.rows.row(r) << p.x(), p.y(), v.x(), v.y();
      }
      return encode_observation(o, c);
    };
    const Eigen::VectorXd a = scene(0.0);
    // Heading-frame oracle: bearing and relative velocity, faded by distance.
    const Vec2 d = pos[2] - pos[0], dv = vel[2] - vel[0], h = vel[0].normalized();
    const double close = 1.0 - d.norm() / c.sense_range;
    CHECK(a[8] == doctest::Approx(close * h.dot(d) / d.norm()));
    CHECK(a[9] == doctest::Approx(close * (h.x() * d.y() - h.y() * d.x()) / d.norm()));
    CHECK(a[10] == doctest::Approx(close * h.dot(dv) / c.uav_speed));
    CHECK(a[11] == doctest::Approx(close * (h.x() * dv.y() - h.y() * dv.x()) / c.uav_speed));
    CHECK(a[4] == doctest::Approx(h.dot(pos[1] - pos[0]) / c.sense_range));
    for (int k = 12; k < 16; ++k) CHECK(a[k] == 0.0);

    const Eigen::VectorXd b = scene(1.1);
    for (int k = 4; k < 16; ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-12));
  }

  TEST_CASE("td targets") {
    auto in = ddpg_checks::random_instance(3);
    in.batch.done << 1, 0, 0, 1, 0;
    const Eigen::RowVectorXd y = td_targets(in.batch, in.policy, in.value, 0.9);
    const Eigen::RowVectorXd q = in.value.forward(in.batch.next_obs, in.policy.forward(in.batch.next_obs));
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      const double expect = in.batch.rewards[j] + (in.batch.done[j] > 0 ? 0.0 : 0.9 * q[j]);
      CHECK(y[j] == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(td_targets(in.batch, in.policy, in.value, 0.0) == in.batch.rewards);
  }

  TEST_CASE("update_value") {
    auto in = ddpg_checks::random_instance(4);
    const Eigen::RowVectorXd exact = in.value.forward(in.batch.obs, in.batch.actions);
    Momentum<ValueNet> opt(in.value, 0.0);
    const auto before = flatten_parameters(in.value);
    CHECK(update_value(in.value, opt, in.batch, exact, 0.1) == 0.0);
    CHECK(flatten_parameters(in.value) == before);

    double prev = update_value(in.value, opt, in.batch, in.targets, 1e-3);
    for (int k = 0; k < 50; ++k) {
      const double loss = update_value(in.value, opt, in.batch, in.targets, 1e-3);
      CHECK(loss <= prev);
      prev = loss;
    }

    Eigen::RowVectorXd bad = in.targets;
    bad[0] = std::nan("");
    const auto frozen = flatten_parameters(in.value);
    CHECK_THROWS_AS(update_value(in.value, opt, in.batch, bad, 1e-3), NumericError);
    CHECK(flatten_parameters(in.value) == frozen);
  }

  TEST_CASE("update_policy moves actions toward the critic's optimum") {
    auto in = ddpg_checks::random_instance(6);
    in.policy.output_layer().bias[0] = 2.0;
    const ValueNet critic = abs_penalty(12);
    const double before = in.policy.forward(in.batch.obs).cwiseAbs().mean();
    REQUIRE(in.policy.forward(in.batch.obs).minCoeff() > 0.0);

    Momentum<PolicyNet> opt(in.policy, 0.0);
    PolicyNet still = in.policy;
    update_policy(still, opt, critic, in.batch, 0.0);
    CHECK(flatten_parameters(still) == flatten_parameters(in.policy));

    for (int k = 0; k < 20; ++k) update_policy(in.policy, opt, critic, in.batch, 1e-2);
    CHECK(in.policy.forward(in.batch.obs).cwiseAbs().mean() < before);
  }

  TEST_CASE("soft update") {
    auto a = ddpg_checks::random_instance(1);
    auto b = ddpg_checks::random_instance(2);
    PolicyNet t = a.policy;
    soft_update(t, b.policy, 1.0);
    CHECK(flatten_parameters(t) == flatten_parameters(b.policy));

    t = a.policy;
    soft_update(t, b.policy, 0.5);
    const auto pa = flatten_parameters(a.policy), pb = flatten_parameters(b.policy), pt = flatten_parameters(t);
    for (std::size_t i = 0; i < pt.size(); ++i) CHECK(pt[i] == doctest::Approx(0.5 * (pa[i] + pb[i])));

    ValueNet tv = a.value;
    const double e0 = max_abs_diff(flatten_parameters(tv), flatten_parameters(b.value));
    for (int k = 0; k < 69; ++k) soft_update(tv, b.value, 0.01);
    const double ratio = max_abs_diff(flatten_parameters(tv), flatten_parameters(b.value)) / e0;
    CHECK(ratio == doctest::Approx(std::pow(0.99, 69)).epsilon(0.01));
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.01));

    CHECK_THROWS_AS(soft_update(t, b.policy, 0.0), InvalidArgument);
    CHECK_THROWS_AS(soft_update(t, PolicyNet(3, 2), 0.5), InvalidArgument);
  }

  TEST_CASE("replay buffer eviction and sampling") {
    ReplayBuffer r(2, 3);
    for (int k = 0; k < 5; ++k) r.push(Eigen::Vector2d(k, k), k, 10.0 * k, Eigen::Vector2d(k + 1, k + 1), k == 4);
    CHECK(r.size() == 3);
    std::vector<double> actions;
    for (std::size_t s = 0; s < 3; ++s) actions.push_back(r.at(s).actions[0]);
    std::sort(actions.begin(), actions.end());
    CHECK(actions == std::vector<double>{2, 3, 4});

    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
      const Batch b = r.sample(3, rng);
      std::vector<double> a(b.actions.data(), b.actions.data() + 3);
      std::sort(a.begin(), a.end());
      CHECK(a == std::vector<double>{2, 3, 4});
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(b.rewards[j] == 10.0 * b.actions[j]);
        CHECK(b.done[j] == (b.actions[j] == 4 ? 1.0 : 0.0));
      }
    }
    CHECK_THROWS_AS(r.sample(4, rng), InvalidArgument);
  }

  TEST_CASE("agents are independent learners") {
    DdpgConfig c;
    c.hidden = 16;
    c.batch_size = 8;
    DdpgAgent a(12, c, 1), b(12, c, 2);
    CHECK(flatten_parameters(a.actor()) != flatten_parameters(b.actor()));
    const auto b_before = flatten_parameters(b.critic());
    std::mt19937_64 rng(0);
    std::normal_distribution<double> n;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd o = Eigen::VectorXd::NullaryExpr(12, [&] { return n(rng); });
      a.remember(o, 0.1, 1.0, o, false);
    }
    a.learn();
    CHECK(flatten_parameters(b.critic()) == b_before);
    CHECK(b.replay().size() == 0);
  }

  TEST_CASE("noise-free acting is deterministic and bounded") {
    DdpgConfig c;
    c.hidden = 16;
    DdpgAgent a(12, c, 5);
    const Eigen::VectorXd o = Eigen::VectorXd::LinSpaced(12, -1, 1);
    const double x = a.act(o, false).heading_delta;
    CHECK(a.act(o, false).heading_delta == x);
    for (int k = 0; k < 100; ++k) {
      const double e = a.act(o, true).heading_delta;
      CHECK(std::abs(e) <= kPi / 4);
    }
    Eigen::VectorXd bad = o;
    bad[0] = std::nan("");
    CHECK_THROWS_AS(a.act(bad, false), NumericError);
  }

  TEST_CASE("save and load are bit exact") {
    DdpgConfig c;
    c.hidden = 16;
    c.batch_size = 4;
    DdpgAgent a(12, c, 9);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd o = Eigen::VectorXd::Constant(12, 0.1 * k);
      a.remember(o, a.act(o, true).heading_delta, k, o, k == 9);
    }
    a.learn();
    std::stringstream buf;
    BinaryWriter w(buf);
    a.save(w);
    BinaryReader r(buf);
    DdpgAgent b = DdpgAgent::load(r);
    CHECK(a.identical(b));
    // Continuing both gives the same result.
    a.learn();
    b.learn();
    CHECK(a.identical(b));

    std::stringstream truncated(buf.str().substr(0, 40));
    BinaryReader bad(truncated);
    CHECK_THROWS_AS(DdpgAgent::load(bad), FormatError);
  }
}
