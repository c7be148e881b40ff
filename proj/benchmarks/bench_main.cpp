#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "contourlab/agent.hpp"
#include "contourlab/baseline.hpp"
#include "contourlab/env.hpp"
#include "contourlab/reward.hpp"
#include "contourlab/trajectory.hpp"

using namespace contourlab;

namespace {

EpisodeState warm_state(std::size_t uavs, std::size_t obstacles) {
  ScenarioConfig c;
  c.n_uavs = uavs;
  c.n_obstacles = obstacles;
  c.seed = 3;
  auto [s, obs] = reset(c);
  const std::vector<Action> straight(uavs);
  for (int k = 0; k < 10 && !s.done; ++k) step(s, straight);
  return s;
}

void BM_PolicyAct(benchmark::State& st) {
  const EpisodeState s = warm_state(3, 2);
  const Eigen::VectorXd x = encode_observation(observe(s, 0), s.config);
  DdpgAgent agent(static_cast<std::size_t>(x.size()), DdpgConfig{}, 1);
  for (auto _ : st) benchmark::DoNotOptimize(agent.act(x, false));
}
BENCHMARK(BM_PolicyAct);

void BM_AgentLearn(benchmark::State& st) {
  DdpgConfig cfg;
  cfg.hidden = static_cast<std::size_t>(st.range(0));
  const std::size_t dim = 12;
  DdpgAgent agent(dim, cfg, 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (std::size_t k = 0; k < 2 * cfg.batch_size; ++k) {
    Eigen::VectorXd o(dim), o2(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      o[d] = n(rng);
      o2[d] = n(rng);
    }
    agent.remember(o, 0.1 * n(rng), n(rng), o2, false);
  }
  for (auto _ : st) benchmark::DoNotOptimize(agent.learn());
}
BENCHMARK(BM_AgentLearn)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_BaselinePlan(benchmark::State& st) {
  const EpisodeState s = warm_state(static_cast<std::size_t>(st.range(0)), 2);
  const PotentialField f = build_field(s);
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(plan_step(s, f, default_baseline_params(seed++)));
}
BENCHMARK(BM_BaselinePlan)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ContourCost(benchmark::State& st) {
  const EpisodeState s = warm_state(1, 2);
  const PotentialField f = build_field(s);
  std::vector<Vec2> pts;
  for (int k = 0; k < 9; ++k) pts.emplace_back(300.0 + 10.0 * k, 400.0 + 0.3 * k * k);
  const Trajectory t(pts, 10.0);
  for (auto _ : st) benchmark::DoNotOptimize(contour_cost(t, f));
}
BENCHMARK(BM_ContourCost);

}  // namespace
BENCHMARK_MAIN();
