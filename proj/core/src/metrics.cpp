#include "contourlab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "contourlab/errors.hpp"
#include "contourlab/trajectory.hpp"

namespace contourlab {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream s(line);
  while (std::getline(s, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError(fmt::format("column '{}': '{}' is not a number", column, s));
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* column) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(fmt::format("column '{}': '{}' is not an unsigned integer", column, s));
  }
  return v;
}

Termination parse_termination(const std::string& s) {
  for (auto t : {Termination::None, Termination::Collision, Termination::Success, Termination::Timeout}) {
    if (s == to_string(t)) return t;
  }
  throw FormatError(fmt::format("column 'termination': unknown value '{}'", s));
}

}  // namespace

double MetricsRecord::energy_mean() const {
  if (energy.empty()) return 0.0;
  return std::accumulate(energy.begin(), energy.end(), 0.0) / static_cast<double>(energy.size());
}

std::string metrics_csv_header() {
  return "episode,seed,steps,termination,success,return_swarming,return_total,min_d_u2o,min_d_u2u,energy_mean,"
         "energy_per_uav";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", r.episode, r.seed, r.steps, to_string(r.termination),
                     r.success ? 1 : 0, r.return_swarming, r.return_total, r.min_d_u2o, r.min_d_u2u,
                     r.energy_mean(), fmt::join(r.energy, ";"));
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open metrics file {}", path.string()));
  std::string line;
  if (!std::getline(in, line) || line != metrics_csv_header()) {
    throw FormatError(fmt::format("{}: unexpected metrics header", path.string()));
  }
  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw FormatError(fmt::format("{}: row has {} fields, expected 11", path.string(), f.size()));
    MetricsRecord r;
    r.episode = parse_u64(f[0], "episode");
    r.seed = parse_u64(f[1], "seed");
    r.steps = parse_u64(f[2], "steps");
    r.termination = parse_termination(f[3]);
    r.success = parse_u64(f[4], "success") != 0;
    r.return_swarming = parse_double(f[5], "return_swarming");
    r.return_total = parse_double(f[6], "return_total");
    r.min_d_u2o = parse_double(f[7], "min_d_u2o");
    r.min_d_u2u = parse_double(f[8], "min_d_u2u");
    if (!f[10].empty()) {
      for (const auto& e : split(f[10], ';')) r.energy.push_back(parse_double(e, "energy_per_uav"));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> path_energies(const EpisodeState& state) {
  std::vector<double> out;
  out.reserve(state.uavs.size());
  const double ds = state.config.trajectory_spacing();
  for (const auto& u : state.uavs) {
    if (u.history.size() < 2 || polyline_length(u.history) <= 0.0) {
      out.push_back(0.0);
      continue;
    }
    const Trajectory t = resample_uniform(u.history, ds);
    out.push_back(t.size() >= 3 ? energy(t) : 0.0);
  }
  return out;
}

void append_trajectory_rows(const EpisodeState& state, std::size_t episode, std::vector<TrajectoryRow>& out) {
  for (std::size_t i = 0; i < state.uavs.size(); ++i) {
    const Vec2 v = state.uav_velocity(i);
    const Vec2& p = state.uavs[i].position;
    out.push_back({episode, state.step, "uav", i, p.x(), p.y(), v.x(), v.y()});
  }
  for (std::size_t k = 0; k < state.obstacles.size(); ++k) {
    const auto& o = state.obstacles[k];
    out.push_back({episode, state.step, "obstacle", k, o.position.x(), o.position.y(), o.velocity.x(),
                   o.velocity.y()});
  }
  out.push_back({episode, state.step, "virtual_center", 0, state.virtual_center.x(), state.virtual_center.y(),
                 state.virtual_velocity.x(), state.virtual_velocity.y()});
}

std::string trajectory_csv_header() { return "episode,step,entity_type,entity_id,x,y,vx,vy"; }

std::string trajectory_csv_row(const TrajectoryRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{}", r.episode, r.step, r.entity_type, r.entity_id, r.x, r.y, r.vx, r.vy);
}

std::string qvalue_csv_header() { return "episode,step,uav,action,q"; }

std::string qvalue_csv_row(const QValueRow& r) {
  return fmt::format("{},{},{},{},{}", r.episode, r.step, r.uav, r.action, r.q);
}

std::string timing_csv_header() { return "episode,step,decision_ms"; }

std::string timing_csv_row(const TimingRow& r) { return fmt::format("{},{},{}", r.episode, r.step, r.decision_ms); }

Stat summarize(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("cannot summarize an empty sample");
  Stat s;
  s.count = values.size();
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

std::vector<SummaryRow> summarize_metrics(const std::vector<MetricsRecord>& records,
                                          const std::vector<double>& decision_ms) {
  if (records.empty()) throw InvalidArgument("no episodes to summarize");
  auto column = [&](auto get) {
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(get(r));
    return v;
  };
  std::vector<SummaryRow> out;
  out.push_back({"steps", summarize(column([](const MetricsRecord& r) { return double(r.steps); }))});
  out.push_back({"success", summarize(column([](const MetricsRecord& r) { return r.success ? 1.0 : 0.0; }))});
  out.push_back({"return_swarming", summarize(column([](const MetricsRecord& r) { return r.return_swarming; }))});
  out.push_back({"return_total", summarize(column([](const MetricsRecord& r) { return r.return_total; }))});
  out.push_back({"min_d_u2o", summarize(column([](const MetricsRecord& r) { return r.min_d_u2o; }))});
  out.push_back({"min_d_u2u", summarize(column([](const MetricsRecord& r) { return r.min_d_u2u; }))});
  out.push_back({"energy_mean", summarize(column([](const MetricsRecord& r) { return r.energy_mean(); }))});
  if (!decision_ms.empty()) out.push_back({"decision_ms", summarize(decision_ms)});
  return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << "metric,mean,std,min,max,count\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.metric, r.stat.mean, r.stat.std, r.stat.min, r.stat.max,
                       r.stat.count);
  }
}

BenchRow improvement_row(const BenchRow& ours, const BenchRow& baseline) {
  auto pct = [](double mine, double base) { return (base - mine) / base * 100.0; };
  BenchRow r = ours;
  r.method = "improvement_pct";
  r.reaction_s_mean = pct(ours.reaction_s_mean, baseline.reaction_s_mean);
  r.energy_mean = pct(ours.energy_mean, baseline.energy_mean);
  r.min_d_u2o = pct(ours.min_d_u2o, baseline.min_d_u2o);
  r.min_d_u2u = pct(ours.min_d_u2u, baseline.min_d_u2u);
  r.reaction_s_std = 0.0;
  r.energy_std = 0.0;
  return r;
}

std::string bench_csv_header() {
  return "method,episodes,first_seed,seed_digest,reaction_s_mean,reaction_s_std,energy_mean,energy_std,min_d_u2o,"
         "min_d_u2u,safe_u2o_fraction,safe_u2u_fraction,success_rate";
}

std::string bench_csv_row(const BenchRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", r.method, r.episodes, r.first_seed, r.seed_digest,
                     r.reaction_s_mean, r.reaction_s_std, r.energy_mean, r.energy_std, r.min_d_u2o, r.min_d_u2u,
                     r.safe_u2o_fraction, r.safe_u2u_fraction, r.success_rate);
}

std::uint64_t seed_digest(const std::vector<std::uint64_t>& seeds) {
  // FNV-1a over the little-endian bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t s : seeds) {
    for (int b = 0; b < 8; ++b) {
      h ^= (s >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void write_field_grid_csv(std::ostream& out, const PotentialField& field, double width, double length,
                          std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw InvalidArgument("field grid needs at least 2 x 2 nodes");
  out << "x,y,phi,grad_x,grad_y\n";
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = length * static_cast<double>(j) / static_cast<double>(ny - 1);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = width * static_cast<double>(i) / static_cast<double>(nx - 1);
      const Vec2 q(x, y);
      const Vec2 g = field.gradient(q);
      out << fmt::format("{},{},{},{},{}\n", x, y, field.intensity(q), g.x(), g.y());
    }
  }
}

}  // namespace contourlab
