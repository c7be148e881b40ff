#include "contourlab/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace contourlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> bound_for(const PsoParams& p, std::size_t d) {
  return p.bounds.size() == 1 ? p.bounds.front() : p.bounds[d];
}

struct Score {
  double cost = kInf;
  double violation = kInf;
};

// Feasible (finite cost) beats infeasible; among infeasible, lower violation wins.
bool better(const Score& a, const Score& b) {
  const bool fa = std::isfinite(a.cost);
  const bool fb = std::isfinite(b.cost);
  if (fa && fb) return a.cost < b.cost;
  if (fa != fb) return fa;
  return a.violation < b.violation;
}

}  // namespace

void PsoParams::validate(std::size_t dims) const {
  if (dims == 0) throw InvalidArgument("PSO needs at least one dimension");
  if (n_particles < 2) throw InvalidArgument("PSO needs at least two particles");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidArgument("PSO coefficients c1, c2 must be positive");
  if (!(inertia_range.first >= 0.0 && inertia_range.first <= inertia_range.second &&
        inertia_range.second <= 1.0)) {
    throw InvalidArgument("PSO inertia range must lie inside [0, 1]");
  }
  if (bounds.size() != 1 && bounds.size() != dims) {
    throw InvalidArgument(fmt::format("PSO bounds: expected 1 or {} intervals, got {}", dims, bounds.size()));
  }
  for (const auto& [lo, hi] : bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw InvalidArgument(fmt::format("PSO bound [{}, {}] is not a finite interval", lo, hi));
    }
  }
}

PsoResult optimize(const CostFn& cost_fn, std::size_t dims, const PsoParams& params,
                   const PsoOptions& options) {
  params.validate(dims);
  const std::size_t n = params.n_particles;
  if (options.initial_positions.size() > n) {
    throw InvalidArgument("PSO got more initial positions than particles");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> x(n, std::vector<double>(dims));
  std::vector<std::vector<double>> v(n, std::vector<double>(dims, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      const auto [lo, hi] = bound_for(params, d);
      if (i >= options.initial_positions.size()) {
        x[i][d] = lo + (hi - lo) * unit(rng);
      } else {
        if (options.initial_positions[i].size() != dims) {
          throw InvalidArgument("PSO initial position has wrong dimension");
        }
        x[i][d] = std::clamp(options.initial_positions[i][d], lo, hi);
      }
    }
  }

  PsoResult result;
  auto evaluate = [&](const std::vector<double>& pos) {
    Score s;
    s.cost = cost_fn(pos);
    ++result.evaluations;
    if (std::isnan(s.cost)) throw NumericError("PSO cost function returned NaN");
    if (std::isfinite(s.cost)) {
      s.violation = 0.0;
    } else if (options.violation) {
      s.violation = options.violation(pos);
    }
    return s;
  };

  std::vector<std::vector<double>> personal = x;
  std::vector<Score> personal_score(n);
  std::size_t global = 0;
  for (std::size_t i = 0; i < n; ++i) {
    personal_score[i] = evaluate(x[i]);
    if (better(personal_score[i], personal_score[global])) global = i;
  }
  std::vector<double> global_pos = personal[global];
  Score global_score = personal_score[global];

  result.cost_history.reserve(params.n_iters + 1);
  result.cost_history.push_back(global_score.cost);

  const auto [mu_lo, mu_hi] = params.inertia_range;
  for (std::size_t it = 0; it < params.n_iters; ++it) {
    // With no feasible point yet and no violation measure to rank by, the swarm
    // has no direction to follow; infeasible particles restart uniformly.
    const bool blind = !options.violation && !std::isfinite(global_score.cost);
    for (std::size_t i = 0; i < n; ++i) {
      if (blind && !std::isfinite(personal_score[i].cost)) {
        for (std::size_t d = 0; d < dims; ++d) {
          const auto [lo, hi] = bound_for(params, d);
          x[i][d] = lo + (hi - lo) * unit(rng);
          v[i][d] = 0.0;
        }
        continue;
      }
      const double mu = mu_lo + (mu_hi - mu_lo) * unit(rng);
      for (std::size_t d = 0; d < dims; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        const auto [lo, hi] = bound_for(params, d);
        const double span = hi - lo;
        double vel = mu * v[i][d] + params.c1 * r1 * (personal[i][d] - x[i][d]) +
                     params.c2 * r2 * (global_pos[d] - x[i][d]);
        vel = std::clamp(vel, -span, span);
        double pos = x[i][d] + vel;
        if (pos < lo || pos > hi) {
          pos = std::clamp(pos, lo, hi);
          vel = 0.0;
        }
        v[i][d] = vel;
        x[i][d] = pos;
      }
    }
    // Evaluation is a barrier after all particles moved; the global best is
    // only refreshed here so the update above sees a consistent p_g.
    for (std::size_t i = 0; i < n; ++i) {
      const Score s = evaluate(x[i]);
      if (better(s, personal_score[i])) {
        personal_score[i] = s;
        personal[i] = x[i];
      }
      if (better(personal_score[i], global_score)) {
        global_score = personal_score[i];
        global_pos = personal[i];
      }
    }
    result.cost_history.push_back(global_score.cost);
  }

  result.best_position = std::move(global_pos);
  result.best_cost = global_score.cost;
  return result;
}

double min_pairwise_distance(std::span<const Vec2> positions) {
  double best = kInf;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      best = std::min(best, (positions[i] - positions[j]).norm());
    }
  }
  return best;
}

double separation_repair_cost(std::span<const Vec2> original, std::span<const Vec2> candidate,
                              double min_separation) {
  const double sep = min_pairwise_distance(candidate);
  if (sep < min_separation) return kInf;
  double shift = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    shift = std::max(shift, (candidate[i] - original[i]).norm());
  }
  return sep + shift;
}

namespace {

std::vector<Vec2> unpack(std::span<const double> flat) {
  std::vector<Vec2> out(flat.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Vec2(flat[2 * i], flat[2 * i + 1]);
  return out;
}

double separation_violation(std::span<const Vec2> candidate, double min_separation) {
  double total = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    for (std::size_t j = i + 1; j < candidate.size(); ++j) {
      total += std::max(0.0, min_separation - (candidate[i] - candidate[j]).norm());
    }
  }
  return total;
}

}  // namespace

SeparationRepair adjust_uav_positions(std::span<const Vec2> positions, const PotentialField& field,
                                      double min_separation, const PsoParams& params) {
  if (positions.size() < 2) throw InvalidArgument("separation repair needs at least two UAVs");
  if (!(min_separation > 0.0)) throw InvalidArgument("separation threshold must be positive");
  for (const auto& p : positions) {
    if (!p.allFinite()) throw InvalidArgument("UAV positions must be finite");
  }

  SeparationRepair out;
  const std::vector<Vec2> original(positions.begin(), positions.end());
  const double input_sep = min_pairwise_distance(original);
  if (input_sep >= min_separation) {
    out.positions = original;
    out.min_separation = input_sep;
    for (const auto& p : original) out.contour_levels.push_back(phi_total(p, field));
    return out;
  }

  const std::size_t dims = 2 * original.size();
  PsoParams p = params;
  if (p.bounds.empty()) {
    p.bounds.resize(dims);
    for (std::size_t i = 0; i < original.size(); ++i) {
      for (int c = 0; c < 2; ++c) {
        const double centre = original[i][c];
        p.bounds[2 * i + c] = {centre - 2.0 * min_separation, centre + 2.0 * min_separation};
      }
    }
  }

  // Particle 0 is the unperturbed input; the rest are jittered by up to
  // min_separation per coordinate.
  PsoOptions options;
  options.initial_positions.resize(p.n_particles, std::vector<double>(dims));
  std::mt19937_64 init_rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-min_separation, min_separation);
  for (std::size_t k = 0; k < p.n_particles; ++k) {
    for (std::size_t i = 0; i < original.size(); ++i) {
      for (int c = 0; c < 2; ++c) {
        options.initial_positions[k][2 * i + c] = original[i][c] + (k == 0 ? 0.0 : jitter(init_rng));
      }
    }
  }
  options.violation = [&](std::span<const double> flat) {
    return separation_violation(unpack(flat), min_separation);
  };

  const auto cost = [&](std::span<const double> flat) {
    return separation_repair_cost(original, unpack(flat), min_separation);
  };
  const PsoResult r = optimize(cost, dims, p, options);

  std::vector<Vec2> best = unpack(r.best_position);
  if (!std::isfinite(r.best_cost)) {
    throw InfeasibleRepair(
        fmt::format("separation repair found no configuration with all pairs >= {}", min_separation),
        std::move(best));
  }
  out.positions = std::move(best);
  out.min_separation = min_pairwise_distance(out.positions);
  for (std::size_t i = 0; i < original.size(); ++i) {
    out.max_shift = std::max(out.max_shift, (out.positions[i] - original[i]).norm());
    out.contour_levels.push_back(phi_total(out.positions[i], field));
  }
  out.adjusted = true;
  return out;
}

}  // namespace contourlab
