#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "contourlab/field.hpp"
#include "contourlab/scenario.hpp"

namespace contourlab {

/// One row of the per-episode metrics CSV.
struct MetricsRecord {
  std::size_t episode = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  Termination termination = Termination::None;
  bool success = false;
  /// Sum over steps of the per-UAV reward, averaged over UAVs.
  double return_swarming = 0.0;
  double return_total = 0.0;
  double min_d_u2o = 0.0;
  double min_d_u2u = 0.0;
  std::vector<double> energy;  // per UAV

  double energy_mean() const;
};

/// Header and row formatting of the metrics CSV. Columns:
/// episode,seed,steps,termination,success,return_swarming,return_total,
/// min_d_u2o,min_d_u2u,energy_mean,energy_per_uav (semicolon separated).
/// Doubles are written in shortest round-trip form.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);

/// Parses a metrics CSV written by the functions above.
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// Curvature energy of each UAV's flown path, resampled at the scenario spacing.
/// Paths shorter than three resampled points have zero energy.
std::vector<double> path_energies(const EpisodeState& state);

struct TrajectoryRow {
  std::size_t episode = 0;
  std::size_t step = 0;
  std::string entity_type;  // uav | obstacle | virtual_center
  std::size_t entity_id = 0;
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

/// Appends one row per UAV, obstacle and the virtual center at the current step.
void append_trajectory_rows(const EpisodeState& state, std::size_t episode, std::vector<TrajectoryRow>& out);
std::string trajectory_csv_header();
std::string trajectory_csv_row(const TrajectoryRow& r);

struct QValueRow {
  std::size_t episode = 0;
  std::size_t step = 0;
  std::size_t uav = 0;
  double action = 0.0;
  double q = 0.0;
};
std::string qvalue_csv_header();
std::string qvalue_csv_row(const QValueRow& r);

/// Decision latency of one joint decision (all UAVs of one step).
struct TimingRow {
  std::size_t episode = 0;
  std::size_t step = 0;
  double decision_ms = 0.0;
};
std::string timing_csv_header();
std::string timing_csv_row(const TimingRow& r);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};
/// Throws InvalidArgument on an empty sample.
Stat summarize(const std::vector<double>& values);

/// Named column statistics of a metrics table, written as
/// metric,mean,std,min,max,count.
struct SummaryRow {
  std::string metric;
  Stat stat;
};
std::vector<SummaryRow> summarize_metrics(const std::vector<MetricsRecord>& records,
                                          const std::vector<double>& decision_ms);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

/// One method's row of the policy-vs-baseline comparison table.
struct BenchRow {
  std::string method;
  std::size_t episodes = 0;
  std::uint64_t first_seed = 0;
  std::uint64_t seed_digest = 0;  // order-sensitive hash of all episode seeds
  double reaction_s_mean = 0.0;
  double reaction_s_std = 0.0;
  double energy_mean = 0.0;
  double energy_std = 0.0;
  double min_d_u2o = 0.0;
  double min_d_u2u = 0.0;
  double safe_u2o_fraction = 0.0;
  double safe_u2u_fraction = 0.0;
  double success_rate = 0.0;
};

/// Relative reduction (baseline - ours) / baseline * 100 of reaction time,
/// energy, min d_U2O and min d_U2U; the other columns are copied from `ours`.
BenchRow improvement_row(const BenchRow& ours, const BenchRow& baseline);
std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& r);

std::uint64_t seed_digest(const std::vector<std::uint64_t>& seeds);

/// Samples Phi and its gradient on a regular grid: columns x,y,phi,grad_x,grad_y.
/// The grid spans [0, width] x [0, length] with `nx` x `ny` nodes.
void write_field_grid_csv(std::ostream& out, const PotentialField& field, double width, double length,
                          std::size_t nx, std::size_t ny);

}  // namespace contourlab
