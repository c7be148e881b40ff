#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "contourlab/agent.hpp"
#include "contourlab/metrics.hpp"
#include "contourlab/pso.hpp"
#include "contourlab/reward.hpp"
#include "contourlab/scenario.hpp"

namespace contourlab {

/// Names of the built-in scenarios: 2U1O, 3U1O, 5U1O, 7U1O, 10U1O, 3U2O, 5U2O, 7U2O.
const std::vector<std::string>& scenario_names();
/// Scenario defaults with the UAV/obstacle counts of `name` ("<N>U<M>O").
/// Throws InvalidArgument for an unknown name.
ScenarioConfig named_scenario(const std::string& name);

/// Counter-based splitmix64: the `index`-th value of the stream keyed by
/// (master, stream). Streams keep training, evaluation and benchmark episodes apart.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

enum class SeedStream : std::uint64_t { Train = 1, Eval = 2, Bench = 3, Agent = 4, Baseline = 5 };

struct TrainOptions {
  std::size_t episodes = 400;
  /// Environment steps collected before the first gradient update.
  std::size_t warmup_steps = 500;
  /// Environment steps between gradient updates (each agent learns once).
  std::size_t update_every = 4;
  /// Episodes between checkpoints; the final episode always checkpoints.
  std::size_t checkpoint_every = 50;
  /// False freezes all parameters (no gradient steps).
  bool learning = true;
  /// False disables exploration noise.
  bool explore = true;
};

struct RunConfig {
  std::string scenario_name = "2U1O";
  ScenarioConfig scenario = named_scenario("2U1O");
  DdpgConfig agent;
  TrainOptions train;
  std::size_t eval_episodes = 100;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const TrainOptions& t);
void from_json(const nlohmann::json& j, TrainOptions& t);
void to_json(nlohmann::json& j, const RunConfig& r);
/// Keys: scenario_name, scenario (overrides applied on top of the named
/// scenario), agent, train, eval_episodes, seed. Unknown keys raise FormatError.
void from_json(const nlohmann::json& j, RunConfig& r);
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes the resolved configuration plus `extra` fields to `path` as JSON.
void write_manifest(const std::filesystem::path& path, const std::string& command, const RunConfig& run,
                    const nlohmann::json& extra);

/// Per-episode outputs of a rollout.
struct EpisodeLog {
  MetricsRecord metrics;
  std::vector<TimingRow> timing;
  std::vector<TrajectoryRow> trajectory;
  std::vector<QValueRow> qvalues;
};

struct RolloutOptions {
  RewardMode reward_mode = RewardMode::Evaluation;
  bool record_trajectory = false;
  bool time_decisions = false;
};

/// Chooses the joint action for the current state.
using Controller = std::function<std::vector<Action>(const EpisodeState&, const std::vector<Observation>&)>;
/// Optional per-step Q-value probe: value of UAV i's chosen action.
using QProbe = std::function<double(std::size_t uav, const Observation& obs, double action)>;

/// Runs one episode of `scenario` (its seed selects the spawn) to termination.
EpisodeLog run_episode(const ScenarioConfig& scenario, std::size_t episode, const Controller& controller,
                       const RolloutOptions& options, const QProbe& probe = {});

/// Noise-free controller acting with each agent's own policy.
Controller policy_controller(std::vector<DdpgAgent>& agents);
/// Contour-following PSO planner; each call uses a fresh seed from the baseline stream.
Controller baseline_controller(std::uint64_t seed, PsoParams params);

/// Independent learners for one scenario: agent i is seeded from the agent stream.
std::vector<DdpgAgent> make_agents(const RunConfig& run);

/// Resumable trainer. All state needed for bit-identical continuation
/// (episode counter, step counter, every agent with its replay buffer and
/// random stream) round-trips through save/load.
class Trainer {
 public:
  explicit Trainer(RunConfig run);

  /// Runs one training episode and returns its metrics.
  MetricsRecord run_episode();

  std::size_t episode() const { return episode_; }
  std::size_t total_steps() const { return total_steps_; }
  const RunConfig& run() const { return run_; }
  std::vector<DdpgAgent>& agents() { return agents_; }
  const std::vector<DdpgAgent>& agents() const { return agents_; }

  void save(const std::filesystem::path& path) const;
  /// Throws FormatError on a malformed file.
  static Trainer load(const std::filesystem::path& path);

 private:
  Trainer() = default;
  RunConfig run_;
  std::vector<DdpgAgent> agents_;
  std::size_t episode_ = 0;
  std::size_t total_steps_ = 0;
};

struct TrainReport {
  std::vector<MetricsRecord> records;  // all episodes, including resumed ones
  std::filesystem::path checkpoint;
  bool resumed = false;
};

/// Trains up to `run.train.episodes` episodes, writing metrics.csv,
/// checkpoint.bin and manifest.json under `out_dir`. If `out_dir` already holds
/// a checkpoint of the same configuration, training resumes from it and rows
/// past the checkpoint are discarded from metrics.csv. On numeric divergence
/// the last checkpoint is left untouched and the NumericError propagates.
TrainReport train(const RunConfig& run, const std::filesystem::path& out_dir);

struct EvalReport {
  std::vector<MetricsRecord> records;
  std::vector<double> decision_ms;  // per joint decision
  std::vector<SummaryRow> summary;
};

/// Noise-free evaluation of the agents in `checkpoint` on `run.eval_episodes`
/// episodes from the evaluation seed stream. Writes eval_metrics.csv,
/// eval_trajectory.csv, eval_qvalues.csv, eval_timing.csv, eval_summary.csv and
/// manifest.json. Throws InvalidArgument if the checkpoint does not fit the scenario.
EvalReport evaluate(const RunConfig& run, const std::filesystem::path& checkpoint,
                    const std::filesystem::path& out_dir);
EvalReport evaluate_agents(const RunConfig& run, std::vector<DdpgAgent>& agents, const std::filesystem::path& out_dir);

struct BenchReport {
  BenchRow policy;
  BenchRow baseline;
  BenchRow improvement;
  std::vector<MetricsRecord> policy_records;
  std::vector<MetricsRecord> baseline_records;
};

/// Runs the policy and the baseline planner on the same `run.eval_episodes`
/// seeds from the benchmark stream. Writes bench.csv (policy, baseline and
/// improvement rows), bench_episodes.csv and manifest.json.
BenchReport bench(const RunConfig& run, const std::filesystem::path& checkpoint, const std::filesystem::path& out_dir,
                  const PsoParams& baseline_params);
BenchReport bench_agents(const RunConfig& run, std::vector<DdpgAgent>& agents, const std::filesystem::path& out_dir,
                         const PsoParams& baseline_params);

/// Aggregates a method's episodes into one comparison row.
BenchRow bench_row(const std::string& method, const std::vector<MetricsRecord>& records,
                   const std::vector<double>& decision_s, double collision_distance);

/// Writes the potential field of the scenario after `steps` straight-flight
/// steps from reset as field_grid.csv, plus the matching trajectory CSV.
void export_field(const RunConfig& run, std::size_t steps, std::size_t resolution,
                  const std::filesystem::path& out_dir);

}  // namespace contourlab
