#include "mobfl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mobfl/analytic.hpp"

namespace mobfl::optimizer {

namespace {

constexpr int kMaxBisectionSteps = 256;

void require_traffic(const SystemParams& params) {
  if (h_max(params) < 1) {
    throw InfeasibleError("infeasible environment: no H satisfies T_min(H) < T0");
  }
  if (!(params.arrival_rate() > 0.0)) {
    throw InfeasibleError("no arrivals: g is identically zero");
  }
}

bool better(const PerHResult& a, const PerHResult& b) {
  if (a.g != b.g) return a.g > b.g;
  if (a.h != b.h) return a.h < b.h;
  return a.t < b.t;
}

}  // namespace

OptimizerConfig::OptimizerConfig(double gamma, double grid_step)
    : gamma_(gamma), grid_step_(grid_step) {
  if (!std::isfinite(gamma_) || gamma_ <= 0.0) {
    throw ValidationError("gamma must be positive");
  }
  if (!std::isfinite(grid_step_) || grid_step_ <= 0.0) {
    throw ValidationError("grid step must be positive");
  }
}

int h_max(const SystemParams& params) {
  const double t0 = params.dwell_time();
  const double budget = t0 - params.tau_down() - params.tau_up();
  if (budget <= 0.0) return 0;
  int h = static_cast<int>(std::floor(budget / params.alpha()));
  // The floor can land one off either way in floating point, and condition
  // (Xi > 0) is strict, so settle on the exact boundary.
  while (h > 0 && analytic::t_min(params, h) >= t0) --h;
  while (analytic::t_min(params, h + 1) < t0) ++h;
  return h;
}

PerHResult optimize_t_for_h(const SystemParams& params, int h, const OptimizerConfig& cfg) {
  if (h < 1 || h > h_max(params)) {
    throw InfeasibleError("h = " + std::to_string(h) + " outside [1, h_max]");
  }
  PerHResult out;
  out.h = h;
  out.t_min = analytic::t_min(params, h);
  out.t_max = analytic::t_max(params, h);
  if (!(out.t_max > out.t_min)) {
    throw InfeasibleError("empty search interval for h = " + std::to_string(h));
  }

  const double open_edge = out.t_min + std::max(cfg.gamma() / 10.0, 1e-9);
  double lo = out.t_min;
  double hi = out.t_max;
  double t = 0.5 * (lo + hi);
  while (hi - lo > cfg.gamma() && out.steps < kMaxBisectionSteps) {
    const double probe = std::max(t, open_edge);
    ++out.steps;
    if (analytic::dg_dt(params, Schedule(h, probe)) > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    t = 0.5 * (lo + hi);
  }
  out.t = t;
  out.g = analytic::g(params, Schedule(h, t));
  return out;
}

OptimizationResult select_best(std::vector<PerHResult> per_h) {
  if (per_h.empty()) throw InfeasibleError("no candidate schedules");
  std::sort(per_h.begin(), per_h.end(),
            [](const PerHResult& a, const PerHResult& b) { return a.h < b.h; });
  OptimizationResult out;
  const PerHResult* best = &per_h.front();
  for (const auto& row : per_h) {
    if (better(row, *best)) best = &row;
    out.search_steps += row.steps;
  }
  out.h_star = best->h;
  out.t_star = best->t;
  out.g_star = best->g;
  out.per_h = std::move(per_h);
  return out;
}

OptimizationResult mobfl_optimize(const SystemParams& params, const OptimizerConfig& cfg) {
  require_traffic(params);
  const int top = h_max(params);
  std::vector<PerHResult> table;
  table.reserve(static_cast<std::size_t>(top));
  for (int h = 1; h <= top; ++h) {
    auto row = optimize_t_for_h(params, h, cfg);
    ++row.steps;  // final objective evaluation
    table.push_back(row);
  }
  return select_best(std::move(table));
}

OptimizationResult brute_force_argmax(const SystemParams& params, const OptimizerConfig& cfg) {
  require_traffic(params);
  const int top = h_max(params);
  const double step = cfg.grid_step();
  std::vector<PerHResult> table;
  table.reserve(static_cast<std::size_t>(top));
  for (int h = 1; h <= top; ++h) {
    PerHResult row;
    row.h = h;
    row.t_min = analytic::t_min(params, h);
    row.t_max = analytic::t_max(params, h);
    row.g = -1.0;
    for (long i = 1;; ++i) {
      const double t = row.t_min + static_cast<double>(i) * step;
      if (t > row.t_max) break;
      const double value = analytic::g(params, Schedule(h, t));
      ++row.steps;
      if (value > row.g) {
        row.g = value;
        row.t = t;
      }
    }
    if (row.steps == 0) {
      // Interval narrower than one grid step: fall back to its right end.
      row.t = row.t_max;
      row.g = analytic::g(params, Schedule(h, row.t));
      row.steps = 1;
    }
    table.push_back(row);
  }
  return select_best(std::move(table));
}

}  // namespace mobfl::optimizer
