// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <CLI11.hpp>
#include <fmt/format.h>

#include "contourlab/field.hpp"
#include "contourlab/baseline.hpp"
#include "contourlab/harness.hpp"
#include "contourlab/pso.hpp"
#include "contourlab/trajectory.hpp"
#include "ddpg_checks.hpp"
#include "env_properties.hpp"
#include "oracles.hpp"

using namespace contourlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  fs::path work_dir = "acceptance_runs";
  std::size_t train_episodes = 800;
  std::size_t bench_train_episodes = 1000;
  std::size_t bench_episodes = 50;
  std::uint64_t seed = 7;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh(const Settings& s, const std::string& name) {
  const fs::path dir = s.work_dir / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

Outcome field_oracle(const Settings&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t value_bad = 0, grad_bad = 0, grad_checked = 0;
  double worst_grad = 0.0;
  const int probes = 10000;
  for (int k = 0; k < probes; ++k) {
    const std::size_t n_obs = 1 + rng() % 4;
    std::vector<ObstacleSpec> obs;
    std::vector<oracle::Source> sources;
    const double v_s = 5 + 10 * u(rng);
    for (std::size_t j = 0; j < n_obs; ++j) {
      const double d_safe = 20 + 40 * u(rng);
      const double r_o = d_safe + 20 + 130 * u(rng);
      const double heading = 2 * kPi * u(rng);
      const double speed = 10 * u(rng);
      ObstacleSpec o{{800 * u(rng), 800 * u(rng)}, speed * Vec2(std::cos(heading), std::sin(heading)), r_o, d_safe};
      obs.push_back(o);
      sources.push_back({o.position.x(), o.position.y(), std::max(o.speed(), v_s), d_safe, r_o});
    }
    const SwarmFieldSpec swarm{{800 * u(rng), 800 * u(rng)}, v_s, 150.0, 1.0};
    const oracle::Source swarm_src{swarm.virtual_center.x(), swarm.virtual_center.y(), v_s, 1.0, 150.0};
    const PotentialField field(obs, swarm);

    // Half the probes land near a source so every branch is exercised.
    Vec2 q;
    if (k % 2 == 0) {
      q = Vec2(800 * u(rng), 800 * u(rng));
    } else {
      const Vec2 c = k % 4 == 1 ? obs[0].position : swarm.virtual_center;
      const double r = 160 * u(rng), a = 2 * kPi * u(rng);
      q = c + r * Vec2(std::cos(a), std::sin(a));
    }

    const auto close = [](double a, double b) { return oracle::rel_err(a, b, 1e-300) <= 8 * 2.2e-16; };
    for (std::size_t j = 0; j < n_obs; ++j) {
      if (!close(phi_obstacle(q, obs[j], v_s), oracle::intensity(sources[j], q.x(), q.y()))) ++value_bad;
    }
    if (!close(phi_swarm(q, swarm), oracle::intensity(swarm_src, q.x(), q.y()))) ++value_bad;
    std::vector<oracle::Source> all = sources;
    all.push_back(swarm_src);
    if (!close(phi_total(q, field), oracle::total(all, q.x(), q.y()))) ++value_bad;

    // Gradient only away from branch boundaries.
    const double h = 1e-4;
    bool near_boundary = false;
    for (const auto& s : all) {
      const double d = std::hypot(q.x() - s.px, q.y() - s.py);
      if (std::abs(d - s.inner) < 1e-2 || std::abs(d - s.outer) < 1e-2) near_boundary = true;
    }
    if (near_boundary) continue;
    const Eigen::Vector2d fd =
        oracle::central_gradient([&](double x, double y) { return oracle::total(all, x, y); }, q.x(), q.y(), h);
    const Vec2 g = grad_phi(q, field);
    const double scale = std::max(fd.norm(), g.norm());
    if (scale == 0.0) continue;
    ++grad_checked;
    const double err = (g - fd).norm() / scale;
    worst_grad = std::max(worst_grad, err);
    if (err > 1e-5) ++grad_bad;
  }
  const double secs = seconds_since(t0);
  return {value_bad == 0 && grad_bad == 0 && secs < 5.0,
          fmt::format("{} probes, {} value mismatches, {} gradient checks (worst rel err {:.2e}), {:.2f} s", probes,
                      value_bad, grad_checked, worst_grad, secs)};
}

Outcome contour_edge(const Settings&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> parts;
  bool ok = true;
  for (int draw = 0; draw < 5; ++draw) {
    const double v_o = 10 * u(rng), v_s = 5 + 10 * u(rng), d_safe = 25 + 35 * u(rng);
    const ObstacleSpec o{{0, 0}, {v_o, 0}, 150.0, d_safe};
    const PotentialField f({o}, SwarmFieldSpec{{1e6, 1e6}, v_s, 150.0, 1.0});
    double best_r = 0.0, best = std::numeric_limits<double>::infinity();
    for (double r = d_safe - 10; r <= d_safe + 30 + 1e-9; r += 2.0) {
      const auto dense = oracle::arc(0, 0, r, 0, 2 * kPi, 20000);
      const double c = contour_cost(resample_uniform(dense, 1.0), f);
      if (c < best) best = c, best_r = r;
    }
    ok = ok && std::abs(best_r - d_safe) <= 2.0 + 1e-9;
    parts.push_back(fmt::format("d_safe {:.1f} -> {:.1f}", d_safe, best_r));
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 30.0, fmt::format("{}; {:.2f} s", fmt::join(parts, ", "), secs)};
}

Outcome energy_metric(const Settings&) {
  const std::vector<Vec2> line = {{0, 0}, {300, 200}};
  const double straight = energy(resample_uniform(line, 1.0));
  double worst = 0.0;
  for (double r : {5.0, 20.0, 60.0, 150.0}) {
    const auto pts = oracle::arc(3, -4, r, 0, 2 * kPi, 100000);
    worst = std::max(worst, std::abs(energy(resample_uniform(pts, 0.5)) - 2 * kPi) / (2 * kPi));
  }
  return {straight <= 1e-9 && worst <= 0.02,
          fmt::format("straight {:.2e}, worst circle rel err {:.3f}%", straight, 100 * worst)};
}

Outcome pso_suite(const Settings&) {
  std::vector<double> best;
  bool monotone = true;
  auto is_monotone = [](const std::vector<double>& h) {
    return std::adjacent_find(h.begin(), h.end(), [](double a, double b) { return b > a; }) == h.end();
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PsoParams p;
    p.n_particles = 30;
    p.n_iters = 200;
    p.bounds = {{-10.0, 10.0}};
    p.seed = seed;
    const PsoResult r = optimize(
        [](std::span<const double> x) { return std::inner_product(x.begin(), x.end(), x.begin(), 0.0); }, 4, p);
    best.push_back(r.best_cost);
    monotone = monotone && is_monotone(r.cost_history);
  }
  std::sort(best.begin(), best.end());
  const double median = 0.5 * (best[9] + best[10]);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> spread(-15, 15);
  const PotentialField flat({}, SwarmFieldSpec{{1e6, 1e6}, 10.0, 150.0, 1.0});
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> pos;
    for (int k = 0; k < 5; ++k) pos.emplace_back(400 + spread(rng), 400 + spread(rng));
    PsoParams p;
    p.seed = static_cast<std::uint64_t>(trial);
    try {
      const SeparationRepair r = adjust_uav_positions(pos, flat, 30.0, p);
      if (min_pairwise_distance(r.positions) < 30.0) ++violations;
    } catch (const InfeasibleRepair&) {
      ++violations;
    }
  }
  return {median <= 1e-3 && violations == 0 && monotone,
          fmt::format("sphere median {:.2e}, repair violations {}/100, histories monotone: {}", median, violations,
                      monotone)};
}

Outcome ddpg_gradients(const Settings&) {
  double worst_value = 0.0, worst_policy = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto e = ddpg_checks::gradient_errors(ddpg_checks::random_instance(100 + seed));
    worst_value = std::max(worst_value, e.value);
    worst_policy = std::max(worst_policy, e.policy);
  }
  auto a = ddpg_checks::random_instance(1), b = ddpg_checks::random_instance(2);
  const auto online = flatten_parameters(b.value);
  const auto err = [&](const ValueNet& t) {
    const auto p = flatten_parameters(t);
    double m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) m = std::max(m, std::abs(p[i] - online[i]));
    return m;
  };
  ValueNet target = a.value;
  const double e0 = err(target);
  double worst_decay = 0.0;
  for (int k = 1; k <= 300; ++k) {
    soft_update(target, b.value, 0.01);
    worst_decay = std::max(worst_decay, std::abs(err(target) / e0 / std::pow(0.99, k) - 1.0));
  }
  return {worst_value <= 1e-4 && worst_policy <= 1e-4 && worst_decay <= 0.01,
          fmt::format("worst rel err value {:.2e}, policy {:.2e}; soft-update decay deviation {:.2e}", worst_value,
                      worst_policy, worst_decay)};
}

Outcome desk_training(const Settings& s) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig run;
  run.scenario_name = "2U1O";
  run.scenario = named_scenario("2U1O");
  run.train.episodes = s.train_episodes;
  run.eval_episodes = 100;
  run.seed = s.seed;
  const fs::path dir = fresh(s, "desk_2U1O");
  const TrainReport tr = train(run, dir);
  const double train_secs = seconds_since(t0);
  const EvalReport ev = evaluate(run, tr.checkpoint, dir / "eval");

  const auto& rec = tr.records;
  const std::size_t tenth = std::max<std::size_t>(1, rec.size() / 10);
  double first = 0.0, last = 0.0, best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tenth; ++i) first += rec[i].return_swarming / static_cast<double>(tenth);
  for (std::size_t i = rec.size() - tenth; i < rec.size(); ++i) last += rec[i].return_swarming / static_cast<double>(tenth);
  for (const auto& r : rec) best = std::max(best, r.return_swarming);
  const double gap = best - first;
  const bool a = gap > 0 && last - first >= 0.5 * gap;

  double success = 0.0;
  for (const auto& r : ev.records) success += r.success ? 1.0 : 0.0;
  success /= static_cast<double>(ev.records.size());
  const bool b = success >= 0.8;
  return {a && b && rec.size() <= 2000 && train_secs < 1800,
          fmt::format("{} episodes in {:.0f} s; (a) first {:.2f}, last {:.2f}, max {:.2f}, gain {:.0f}% of gap; "
                      "(b) eval success {:.0f}%",
                      rec.size(), train_secs, first, last, best, gap > 0 ? 100 * (last - first) / gap : 0.0,
                      100 * success)};
}

Outcome table2_ratios(const Settings& s) {
  RunConfig run;
  run.scenario_name = "3U2O";
  run.scenario = named_scenario("3U2O");
  run.train.episodes = s.bench_train_episodes;
  run.eval_episodes = s.bench_episodes;
  run.seed = s.seed;
  const fs::path dir = fresh(s, "table2_3U2O");
  const TrainReport tr = train(run, dir);
  const BenchReport b = bench(run, tr.checkpoint, dir / "bench", default_baseline_params());

  const double ratio = b.policy.reaction_s_mean / b.baseline.reaction_s_mean;
  const bool latency = ratio <= 0.1;
  const bool energy_ok = b.policy.energy_mean <= b.baseline.energy_mean;
  auto safe = [](const BenchRow& r) { return r.safe_u2o_fraction >= 0.9 && r.safe_u2u_fraction >= 0.9; };
  return {latency && energy_ok && safe(b.policy) && safe(b.baseline),
          fmt::format("latency {:.3g} s vs {:.3g} s (ratio {:.4f}); energy {:.3f} vs {:.3f}; safe episodes "
                      "policy {:.0f}%/{:.0f}%, baseline {:.0f}%/{:.0f}% (u2o/u2u)",
                      b.policy.reaction_s_mean, b.baseline.reaction_s_mean, ratio, b.policy.energy_mean,
                      b.baseline.energy_mean, 100 * b.policy.safe_u2o_fraction, 100 * b.policy.safe_u2u_fraction,
                      100 * b.baseline.safe_u2o_fraction, 100 * b.baseline.safe_u2u_fraction)};
}

Outcome determinism(const Settings& s) {
  RunConfig run;
  run.train.episodes = 8;
  run.train.warmup_steps = 100;
  run.train.checkpoint_every = 4;
  run.seed = s.seed;
  const fs::path a = fresh(s, "det_a"), b = fresh(s, "det_b"), c = fresh(s, "det_resume");
  train(run, a);
  train(run, b);
  const bool same = slurp(a / "metrics.csv") == slurp(b / "metrics.csv");

  RunConfig half = run;
  half.train.episodes = 4;
  train(half, c);
  train(run, c);
  const bool resumed = slurp(a / "metrics.csv") == slurp(c / "metrics.csv");
  const auto ta = Trainer::load(a / "checkpoint.bin");
  const auto tc = Trainer::load(c / "checkpoint.bin");
  bool agents = ta.agents().size() == tc.agents().size();
  for (std::size_t i = 0; agents && i < ta.agents().size(); ++i) agents = ta.agents()[i].identical(tc.agents()[i]);
  return {same && resumed && agents,
          fmt::format("repeat run identical: {}; resumed metrics identical: {}; resumed agents identical: {}", same,
                      resumed, agents)};
}

Outcome env_fuzz(const Settings&) {
  const auto rep = env_properties::fuzz(100000, 31337);
  return {rep.violations == 0,
          fmt::format("{} steps over {} episodes, {} violations{}", rep.steps, rep.episodes, rep.violations,
                      rep.first_violation.empty() ? "" : " (first: " + rep.first_violation + ")")};
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  Settings s;
  std::vector<std::string> only;
  CLI::App app{"contourlab acceptance checks"};
  app.add_option("--work-dir", s.work_dir, "Directory for training and evaluation outputs");
  app.add_option("--train-episodes", s.train_episodes, "Training episodes for the 2U1O run");
  app.add_option("--bench-train-episodes", s.bench_train_episodes, "Training episodes for the 3U2O run");
  app.add_option("--bench-episodes", s.bench_episodes, "Matched-seed episodes per method in the comparison");
  app.add_option("--seed", s.seed, "Master seed of the training runs");
  app.add_option("--only", only, "Run only the named checks");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(s.work_dir);

  const std::vector<std::pair<std::string, std::function<Outcome(const Settings&)>>> checks = {
      {"field-oracle", field_oracle},   {"contour-edge", contour_edge},   {"energy", energy_metric},
      {"pso", pso_suite},               {"ddpg-gradients", ddpg_gradients}, {"desk-training", desk_training},
      {"table2-ratios", table2_ratios}, {"determinism", determinism},     {"env-properties", env_fuzz},
  };

  int failed = 0;
  for (const auto& [name, check] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = check(s);
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
