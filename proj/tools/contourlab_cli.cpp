// Command line front end: train, eval, bench and export subcommands.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include "contourlab/baseline.hpp"
#include "contourlab/errors.hpp"
#include "contourlab/harness.hpp"

namespace fs = std::filesystem;
using namespace contourlab;

namespace {

struct CommonFlags {
  std::string scenario;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t episodes = 0;
  std::string checkpoint;
  std::string out = "runs/latest";
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_checkpoint) {
  cmd->add_option("--scenario", f.scenario, "Named scenario (e.g. 2U1O) or a scenario JSON file");
  cmd->add_option("--config", f.config, "Run configuration JSON file");
  cmd->add_option("--seed", f.seed, "Master seed")->each([&f](const std::string&) { f.seed_set = true; });
  cmd->add_option("--episodes", f.episodes, "Number of episodes");
  auto* ck = cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file");
  if (needs_checkpoint) ck->required();
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
}

// Resolution order: defaults, then --config, then the individual flags.
RunConfig resolve(const CommonFlags& f, bool episodes_are_training) {
  RunConfig run = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.scenario.empty()) {
    if (fs::exists(f.scenario)) {
      run.scenario = load_scenario_file(f.scenario);
      run.scenario_name = "custom";
    } else {
      run.scenario = named_scenario(f.scenario);
      run.scenario_name = f.scenario;
    }
  }
  if (f.seed_set) run.seed = f.seed;
  if (f.episodes > 0) {
    if (episodes_are_training) {
      run.train.episodes = f.episodes;
    } else {
      run.eval_episodes = f.episodes;
    }
  }
  return run;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Batch-sized Eigen temporaries would otherwise be mmap'd and unmapped on every update.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  spdlog::set_level(spdlog::level::info);
  // SPDLOG_LEVEL=debug (or warn, error, ...) overrides the verbosity.
  spdlog::cfg::load_env_levels();

  CLI::App app{"contourlab: potential-field rewards for multi-UAV collision avoidance"};
  app.require_subcommand(1);

  CommonFlags train_f, eval_f, bench_f, export_f;
  auto* train_cmd = app.add_subcommand("train", "Train one independent learner per UAV");
  add_common(train_cmd, train_f, false);

  auto* eval_cmd = app.add_subcommand("eval", "Noise-free evaluation of a checkpoint");
  add_common(eval_cmd, eval_f, true);

  auto* bench_cmd = app.add_subcommand("bench", "Compare a checkpoint against the contour-following planner");
  add_common(bench_cmd, bench_f, true);
  std::size_t particles = 30, iterations = 50;
  bench_cmd->add_option("--particles", particles, "Planner swarm size")->capture_default_str();
  bench_cmd->add_option("--iterations", iterations, "Planner iterations per step")->capture_default_str();

  auto* export_cmd = app.add_subcommand("export", "Write the potential field on a grid");
  add_common(export_cmd, export_f, false);
  std::size_t steps = 0, resolution = 161;
  export_cmd->add_option("--steps", steps, "Straight-flight steps before sampling")->capture_default_str();
  export_cmd->add_option("--resolution", resolution, "Grid nodes per axis")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const RunConfig run = resolve(train_f, true);
      const TrainReport r = train(run, train_f.out);
      spdlog::info("trained {} episodes; checkpoint {}", r.records.size(), r.checkpoint.string());
    } else if (*eval_cmd) {
      const RunConfig run = resolve(eval_f, false);
      const EvalReport r = evaluate(run, eval_f.checkpoint, eval_f.out);
      for (const auto& s : r.summary) {
        std::cout << s.metric << ": mean " << s.stat.mean << " std " << s.stat.std << '\n';
      }
    } else if (*bench_cmd) {
      const RunConfig run = resolve(bench_f, false);
      PsoParams params = default_baseline_params();
      params.n_particles = particles;
      params.n_iters = iterations;
      const BenchReport r = bench(run, bench_f.checkpoint, bench_f.out, params);
      std::cout << bench_csv_header() << '\n'
                << bench_csv_row(r.policy) << '\n'
                << bench_csv_row(r.baseline) << '\n'
                << bench_csv_row(r.improvement) << '\n';
    } else if (*export_cmd) {
      const RunConfig run = resolve(export_f, false);
      export_field(run, steps, resolution, export_f.out);
      spdlog::info("wrote {}", (fs::path(export_f.out) / "field_grid.csv").string());
    }
  } catch (const contourlab::Error& e) {
    spdlog::error("{}", e.what());
    return EXIT_FAILURE;
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
