#include "contourlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "contourlab/baseline.hpp"
#include "contourlab/checkpoint.hpp"
#include "contourlab/env.hpp"
#include "contourlab/errors.hpp"

namespace contourlab {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Scenarios and seeds

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"2U1O", "3U1O", "5U1O", "7U1O", "10U1O", "3U2O", "5U2O", "7U2O"};
  return names;
}

ScenarioConfig named_scenario(const std::string& name) {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw InvalidArgument(fmt::format("unknown scenario '{}' (known: {})", name, fmt::join(names, ", ")));
  }
  static const std::regex pattern(R"((\d+)U(\d+)O)");
  std::smatch m;
  std::regex_match(name, m, pattern);
  ScenarioConfig c;
  c.n_uavs = std::stoul(m[1].str());
  c.n_obstacles = std::stoul(m[2].str());
  return c;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t key = mix(master + stream * 0xd1b54a32d192ed03ULL);
  return mix(key + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

// ---------------------------------------------------------------------------
// Configuration files

#define CONTOURLAB_TRAIN_FIELDS(X) \
  X(episodes) X(warmup_steps) X(update_every) X(checkpoint_every) X(learning) X(explore)

void to_json(json& j, const TrainOptions& t) {
  j = json::object();
#define X(name) j[#name] = t.name;
  CONTOURLAB_TRAIN_FIELDS(X)
#undef X
}

void from_json(const json& j, TrainOptions& t) {
  if (!j.is_object()) throw FormatError("train options must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define X(name)                                                              \
  if (key == #name) {                                                        \
    try {                                                                    \
      value.get_to(t.name);                                                  \
    } catch (const json::exception& e) {                                     \
      throw FormatError(fmt::format("train key '{}': {}", key, e.what()));   \
    }                                                                        \
    known = true;                                                            \
  }
    CONTOURLAB_TRAIN_FIELDS(X)
#undef X
    if (!known) throw FormatError(fmt::format("unknown train key '{}'", key));
  }
  if (t.update_every == 0) throw FormatError("train.update_every must be positive");
  if (t.checkpoint_every == 0) throw FormatError("train.checkpoint_every must be positive");
}

void to_json(json& j, const RunConfig& r) {
  j = json{{"scenario_name", r.scenario_name}, {"scenario", r.scenario}, {"agent", r.agent},
           {"train", r.train},                 {"eval_episodes", r.eval_episodes}, {"seed", r.seed}};
}

void from_json(const json& j, RunConfig& r) {
  if (!j.is_object()) throw FormatError("run config must be a JSON object");
  static const std::vector<std::string> keys = {"scenario_name", "scenario", "agent", "train", "eval_episodes",
                                                "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw FormatError(fmt::format("unknown run config key '{}'", key));
    }
  }
  try {
    if (j.contains("scenario_name")) {
      r.scenario_name = j.at("scenario_name").get<std::string>();
      if (r.scenario_name != "custom") r.scenario = named_scenario(r.scenario_name);
    }
    if (j.contains("scenario")) {
      json merged = r.scenario;
      merged.update(j.at("scenario"));
      r.scenario = merged.get<ScenarioConfig>();
    }
    if (j.contains("agent")) r.agent = j.at("agent").get<DdpgConfig>();
    if (j.contains("train")) r.train = j.at("train").get<TrainOptions>();
    if (j.contains("eval_episodes")) r.eval_episodes = j.at("eval_episodes").get<std::size_t>();
    if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("run config: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("run config: {}", e.what()));
  }
  r.scenario.validate();
  r.agent.validate();
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open run config {}", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
  RunConfig r;
  from_json(j, r);
  return r;
}

void write_manifest(const fs::path& path, const std::string& command, const RunConfig& run, const json& extra) {
  json m = extra.is_object() ? extra : json::object();
  m["command"] = command;
  m["run"] = run;
  m["checkpoint_format_version"] = kCheckpointVersion;
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << m.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Rollouts

namespace {

// Running per-episode metric sums shared by training and evaluation.
class EpisodeAccumulator {
 public:
  EpisodeAccumulator(const EpisodeState& s, std::size_t episode) {
    record_.episode = episode;
    record_.seed = s.config.seed;
    std::tie(record_.min_d_u2o, record_.min_d_u2u) = min_distances(s);
    swarming_.assign(s.uavs.size(), 0.0);
    total_.assign(s.uavs.size(), 0.0);
  }

  void add(const StepResult& r) {
    for (std::size_t i = 0; i < r.rewards.size(); ++i) {
      swarming_[i] += r.rewards[i].swarming();
      total_[i] += r.rewards[i].total;
    }
    record_.min_d_u2o = std::min(record_.min_d_u2o, r.info.min_u2o);
    record_.min_d_u2u = std::min(record_.min_d_u2u, r.info.min_u2u);
  }

  MetricsRecord finish(const EpisodeState& s) {
    const double n = static_cast<double>(swarming_.size());
    for (std::size_t i = 0; i < swarming_.size(); ++i) {
      record_.return_swarming += swarming_[i] / n;
      record_.return_total += total_[i] / n;
    }
    record_.steps = s.step;
    record_.termination = s.reason;
    record_.success = s.reason == Termination::Success;
    record_.energy = path_energies(s);
    return record_;
  }

 private:
  MetricsRecord record_;
  std::vector<double> swarming_;
  std::vector<double> total_;
};

void check_agents_fit(const std::vector<DdpgAgent>& agents, const ScenarioConfig& sc) {
  if (agents.size() != sc.n_uavs) {
    throw InvalidArgument(fmt::format("checkpoint has {} agents, scenario has {} UAVs", agents.size(), sc.n_uavs));
  }
  for (const auto& a : agents) {
    if (a.obs_dim() != sc.observation_dim()) {
      throw InvalidArgument(fmt::format("checkpoint observation size {} does not match scenario size {}",
                                        a.obs_dim(), sc.observation_dim()));
    }
  }
}

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << header << '\n';
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(fmt::format("cannot create output directory {}", dir.string()));
}

}  // namespace

EpisodeLog run_episode(const ScenarioConfig& scenario, std::size_t episode, const Controller& controller,
                       const RolloutOptions& options, const QProbe& probe) {
  auto [state, obs] = reset(scenario);
  EpisodeAccumulator acc(state, episode);
  EpisodeLog log;
  if (options.record_trajectory) append_trajectory_rows(state, episode, log.trajectory);
  while (!state.done) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Action> actions = controller(state, obs);
    const auto t1 = std::chrono::steady_clock::now();
    if (options.time_decisions) {
      log.timing.push_back({episode, state.step, std::chrono::duration<double, std::milli>(t1 - t0).count()});
    }
    if (probe) {
      for (std::size_t i = 0; i < actions.size(); ++i) {
        const double a = std::clamp(actions[i].heading_delta, -kMaxHeadingDelta, kMaxHeadingDelta);
        log.qvalues.push_back({episode, state.step, i, a, probe(i, obs[i], a)});
      }
    }
    StepResult r = step(state, actions, options.reward_mode);
    acc.add(r);
    obs = std::move(r.observations);
    if (options.record_trajectory) append_trajectory_rows(state, episode, log.trajectory);
  }
  log.metrics = acc.finish(state);
  return log;
}

Controller policy_controller(std::vector<DdpgAgent>& agents) {
  return [&agents](const EpisodeState& state, const std::vector<Observation>& obs) {
    std::vector<Action> actions;
    actions.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      actions.push_back(agents[i].act(encode_observation(obs[i], state.config), false));
    }
    return actions;
  };
}

Controller baseline_controller(std::uint64_t seed, PsoParams params) {
  return [seed, params](const EpisodeState& state, const std::vector<Observation>&) mutable {
    params.seed = derive_seed(seed ^ state.config.seed, static_cast<std::uint64_t>(SeedStream::Baseline), state.step);
    return plan_step(state, build_field(state), params).actions;
  };
}

std::vector<DdpgAgent> make_agents(const RunConfig& run) {
  std::vector<DdpgAgent> agents;
  agents.reserve(run.scenario.n_uavs);
  for (std::size_t i = 0; i < run.scenario.n_uavs; ++i) {
    agents.emplace_back(run.scenario.observation_dim(), run.agent,
                        derive_seed(run.seed, static_cast<std::uint64_t>(SeedStream::Agent), i));
  }
  return agents;
}

// ---------------------------------------------------------------------------
// Training

Trainer::Trainer(RunConfig run) : run_(std::move(run)) {
  run_.scenario.validate();
  run_.agent.validate();
  agents_ = make_agents(run_);
}

MetricsRecord Trainer::run_episode() {
  const TrainOptions& t = run_.train;
  ScenarioConfig sc = run_.scenario;
  sc.seed = derive_seed(run_.seed, static_cast<std::uint64_t>(SeedStream::Train), episode_);
  auto [state, obs] = reset(sc);
  EpisodeAccumulator acc(state, episode_);

  const std::size_t n = agents_.size();
  std::vector<Eigen::VectorXd> enc(n);
  for (std::size_t i = 0; i < n; ++i) enc[i] = encode_observation(obs[i], sc);
  std::vector<Action> actions(n);

  while (!state.done) {
    for (std::size_t i = 0; i < n; ++i) actions[i] = agents_[i].act(enc[i], t.explore);
    StepResult r = step(state, actions, RewardMode::Training);
    acc.add(r);
    // Only a collision ends the game for the agents; success and the step
    // limit cut the episode short without making the state terminal.
    const bool terminal = r.done && r.info.reason == Termination::Collision;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd next = encode_observation(r.observations[i], sc);
      if (t.learning) agents_[i].remember(enc[i], actions[i].heading_delta, r.rewards[i].total, next, terminal);
      enc[i] = std::move(next);
    }
    ++total_steps_;
    if (t.learning && total_steps_ >= t.warmup_steps && total_steps_ % t.update_every == 0) {
      for (auto& a : agents_) a.learn();
    }
  }
  if (t.explore) {
    for (auto& a : agents_) a.end_episode();
  }
  ++episode_;
  return acc.finish(state);
}

void Trainer::save(const fs::path& path) const {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write checkpoint {}", tmp.string()));
    BinaryWriter w(out);
    w.header();
    w.tag("TRNR");
    w.str(json(run_).dump());
    w.u64(episode_);
    w.u64(total_steps_);
    w.u64(agents_.size());
    for (const auto& a : agents_) a.save(w);
    out.flush();
    if (!out) throw Error(fmt::format("failed writing checkpoint {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

Trainer Trainer::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open checkpoint {}", path.string()));
  BinaryReader r(in);
  r.header();
  r.tag("TRNR");
  Trainer t;
  try {
    from_json(json::parse(r.str()), t.run_);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("checkpoint run config unreadable: {}", e.what()));
  }
  t.episode_ = r.u64();
  t.total_steps_ = r.u64();
  const std::uint64_t n = r.u64();
  if (n != t.run_.scenario.n_uavs) throw FormatError("checkpoint agent count does not match its scenario");
  for (std::uint64_t i = 0; i < n; ++i) t.agents_.push_back(DdpgAgent::load(r));
  check_agents_fit(t.agents_, t.run_.scenario);
  return t;
}

namespace {

// Everything that must agree for a resumed run to continue the original one.
json resume_key(const RunConfig& r) {
  json j = r;
  j["train"].erase("episodes");
  j["train"].erase("checkpoint_every");
  j.erase("eval_episodes");
  return j;
}

// Keeps the header and the rows of episodes before `keep_below`.
void truncate_metrics(const fs::path& path, std::size_t keep_below) {
  std::vector<std::string> kept;
  {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line) || line != metrics_csv_header()) {
      throw FormatError(fmt::format("{}: unexpected metrics header", path.string()));
    }
    kept.push_back(line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoull(line.substr(0, line.find(','))) < keep_below) kept.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : kept) out << l << '\n';
}

}  // namespace

TrainReport train(const RunConfig& run, const fs::path& out_dir) {
  ensure_dir(out_dir);
  TrainReport report;
  report.checkpoint = out_dir / "checkpoint.bin";
  const fs::path metrics_path = out_dir / "metrics.csv";

  Trainer trainer(run);
  if (fs::exists(report.checkpoint)) {
    Trainer saved = Trainer::load(report.checkpoint);
    if (resume_key(saved.run()) != resume_key(run)) {
      throw InvalidArgument(fmt::format("{} was written by a different configuration", report.checkpoint.string()));
    }
    trainer = std::move(saved);
    report.resumed = true;
    spdlog::info("resuming from {} at episode {}", report.checkpoint.string(), trainer.episode());
  }
  const std::size_t target = run.train.episodes;
  const std::size_t checkpoint_every = run.train.checkpoint_every;

  if (report.resumed && fs::exists(metrics_path)) {
    truncate_metrics(metrics_path, trainer.episode());
    report.records = read_metrics_csv(metrics_path);
    if (report.records.size() != trainer.episode()) {
      throw FormatError(fmt::format("{} holds {} episodes, checkpoint expects {}", metrics_path.string(),
                                    report.records.size(), trainer.episode()));
    }
  } else {
    open_csv(metrics_path, metrics_csv_header());
  }
  write_manifest(out_dir / "manifest.json", "train", run,
                 json{{"start_episode", trainer.episode()}, {"resumed", report.resumed}});

  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw Error(fmt::format("cannot append to {}", metrics_path.string()));
  while (trainer.episode() < target) {
    MetricsRecord rec = trainer.run_episode();
    metrics << metrics_csv_row(rec) << '\n';
    metrics.flush();
    spdlog::debug("episode {} steps {} {} swarming {:.3f}", rec.episode, rec.steps, to_string(rec.termination),
                  rec.return_swarming);
    report.records.push_back(std::move(rec));
    if (trainer.episode() % checkpoint_every == 0 || trainer.episode() == target) trainer.save(report.checkpoint);
  }
  if (!fs::exists(report.checkpoint)) trainer.save(report.checkpoint);
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation and comparison

EvalReport evaluate_agents(const RunConfig& run, std::vector<DdpgAgent>& agents, const fs::path& out_dir) {
  check_agents_fit(agents, run.scenario);
  ensure_dir(out_dir);
  auto metrics = open_csv(out_dir / "eval_metrics.csv", metrics_csv_header());
  auto traj = open_csv(out_dir / "eval_trajectory.csv", trajectory_csv_header());
  auto qcsv = open_csv(out_dir / "eval_qvalues.csv", qvalue_csv_header());
  auto timing = open_csv(out_dir / "eval_timing.csv", timing_csv_header());

  const Controller controller = policy_controller(agents);
  RolloutOptions options;
  options.record_trajectory = true;
  options.time_decisions = true;

  EvalReport report;
  for (std::size_t e = 0; e < run.eval_episodes; ++e) {
    ScenarioConfig sc = run.scenario;
    sc.seed = derive_seed(run.seed, static_cast<std::uint64_t>(SeedStream::Eval), e);
    const QProbe probe = [&](std::size_t i, const Observation& o, double a) {
      return agents[i].q_value(encode_observation(o, sc), a);
    };
    EpisodeLog log = run_episode(sc, e, controller, options, probe);
    metrics << metrics_csv_row(log.metrics) << '\n';
    for (const auto& r : log.trajectory) traj << trajectory_csv_row(r) << '\n';
    for (const auto& r : log.qvalues) qcsv << qvalue_csv_row(r) << '\n';
    for (const auto& r : log.timing) {
      timing << timing_csv_row(r) << '\n';
      report.decision_ms.push_back(r.decision_ms);
    }
    report.records.push_back(std::move(log.metrics));
  }
  if (!report.records.empty()) {
    report.summary = summarize_metrics(report.records, report.decision_ms);
    write_summary_csv(out_dir / "eval_summary.csv", report.summary);
  }
  write_manifest(out_dir / "manifest.json", "eval", run, json::object());
  return report;
}

EvalReport evaluate(const RunConfig& run, const fs::path& checkpoint, const fs::path& out_dir) {
  Trainer t = Trainer::load(checkpoint);
  return evaluate_agents(run, t.agents(), out_dir);
}

BenchRow bench_row(const std::string& method, const std::vector<MetricsRecord>& records,
                   const std::vector<double>& decision_s, double collision_distance) {
  if (records.empty()) throw InvalidArgument("bench needs at least one episode");
  BenchRow row;
  row.method = method;
  row.episodes = records.size();
  std::vector<std::uint64_t> seeds;
  std::vector<double> energies;
  row.min_d_u2o = std::numeric_limits<double>::infinity();
  row.min_d_u2u = std::numeric_limits<double>::infinity();
  std::size_t safe_o = 0, safe_u = 0, success = 0;
  for (const auto& r : records) {
    seeds.push_back(r.seed);
    energies.push_back(r.energy_mean());
    row.min_d_u2o = std::min(row.min_d_u2o, r.min_d_u2o);
    row.min_d_u2u = std::min(row.min_d_u2u, r.min_d_u2u);
    safe_o += r.min_d_u2o >= collision_distance ? 1 : 0;
    safe_u += r.min_d_u2u >= collision_distance ? 1 : 0;
    success += r.success ? 1 : 0;
  }
  const double n = static_cast<double>(records.size());
  row.first_seed = seeds.front();
  row.seed_digest = seed_digest(seeds);
  const Stat e = summarize(energies);
  row.energy_mean = e.mean;
  row.energy_std = e.std;
  if (!decision_s.empty()) {
    const Stat t = summarize(decision_s);
    row.reaction_s_mean = t.mean;
    row.reaction_s_std = t.std;
  }
  row.safe_u2o_fraction = static_cast<double>(safe_o) / n;
  row.safe_u2u_fraction = static_cast<double>(safe_u) / n;
  row.success_rate = static_cast<double>(success) / n;
  return row;
}

BenchReport bench_agents(const RunConfig& run, std::vector<DdpgAgent>& agents, const fs::path& out_dir,
                         const PsoParams& baseline_params) {
  check_agents_fit(agents, run.scenario);
  ensure_dir(out_dir);
  RolloutOptions options;
  options.time_decisions = true;

  auto timing = open_csv(out_dir / "bench_timing.csv", "method," + timing_csv_header());
  auto run_method = [&](const char* method, const Controller& controller, std::vector<MetricsRecord>& records) {
    std::vector<double> decision_s;
    for (std::size_t e = 0; e < run.eval_episodes; ++e) {
      ScenarioConfig sc = run.scenario;
      sc.seed = derive_seed(run.seed, static_cast<std::uint64_t>(SeedStream::Bench), e);
      EpisodeLog log = run_episode(sc, e, controller, options);
      for (const auto& t : log.timing) {
        decision_s.push_back(t.decision_ms / 1000.0);
        timing << method << ',' << timing_csv_row(t) << '\n';
      }
      records.push_back(std::move(log.metrics));
    }
    return decision_s;
  };

  BenchReport report;
  const auto policy_s = run_method("policy", policy_controller(agents), report.policy_records);
  const auto baseline_s = run_method("baseline", baseline_controller(run.seed, baseline_params), report.baseline_records);
  const double d_col = run.scenario.collision_distance;
  report.policy = bench_row("policy", report.policy_records, policy_s, d_col);
  report.baseline = bench_row("baseline", report.baseline_records, baseline_s, d_col);
  report.improvement = improvement_row(report.policy, report.baseline);

  auto table = open_csv(out_dir / "bench.csv", bench_csv_header());
  for (const auto* r : {&report.policy, &report.baseline, &report.improvement}) table << bench_csv_row(*r) << '\n';
  auto episodes = open_csv(out_dir / "bench_episodes.csv", "method," + metrics_csv_header());
  for (const auto& r : report.policy_records) episodes << "policy," << metrics_csv_row(r) << '\n';
  for (const auto& r : report.baseline_records) episodes << "baseline," << metrics_csv_row(r) << '\n';
  write_manifest(out_dir / "manifest.json", "bench", run,
                 json{{"baseline", {{"n_particles", baseline_params.n_particles},
                                    {"n_iters", baseline_params.n_iters},
                                    {"c1", baseline_params.c1},
                                    {"c2", baseline_params.c2}}}});
  return report;
}

BenchReport bench(const RunConfig& run, const fs::path& checkpoint, const fs::path& out_dir,
                  const PsoParams& baseline_params) {
  Trainer t = Trainer::load(checkpoint);
  return bench_agents(run, t.agents(), out_dir, baseline_params);
}

void export_field(const RunConfig& run, std::size_t steps, std::size_t resolution, const fs::path& out_dir) {
  ensure_dir(out_dir);
  ScenarioConfig sc = run.scenario;
  sc.seed = derive_seed(run.seed, static_cast<std::uint64_t>(SeedStream::Eval), 0);
  auto [state, obs] = reset(sc);
  std::vector<TrajectoryRow> rows;
  append_trajectory_rows(state, 0, rows);
  const std::vector<Action> straight(state.uavs.size());
  for (std::size_t k = 0; k < steps && !state.done; ++k) {
    step(state, straight);
    append_trajectory_rows(state, 0, rows);
  }
  std::ofstream grid(out_dir / "field_grid.csv");
  if (!grid) throw Error(fmt::format("cannot write {}", (out_dir / "field_grid.csv").string()));
  write_field_grid_csv(grid, build_field(state), sc.arena_width, sc.arena_length, resolution, resolution);
  auto traj = open_csv(out_dir / "field_trajectory.csv", trajectory_csv_header());
  for (const auto& r : rows) traj << trajectory_csv_row(r) << '\n';
  write_manifest(out_dir / "manifest.json", "export", run, json{{"steps", state.step}, {"resolution", resolution}});
}

}  // namespace contourlab
