#pragma once

#include <vector>

#include "mobfl/types.hpp"

// Joint (H, T) maximization of g. For every feasible H the derivative sign of
// g in T changes at most once, so the per-H optimum is found by bisection on
// that sign inside (T_min(H), T_max(H)]; the outer loop takes the best H.
namespace mobfl::optimizer {

class OptimizerConfig {
 public:
  /// gamma: bisection stops once the bracket is no wider than this.
  /// grid_step: spacing of the brute-force oracle grid.
  explicit OptimizerConfig(double gamma = 1e-3, double grid_step = 1e-2);

  double gamma() const { return gamma_; }
  double grid_step() const { return grid_step_; }

 private:
  double gamma_;
  double grid_step_;
};

struct PerHResult {
  int h = 0;
  double t = 0.0;
  double g = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  long steps = 0;  // derivative (or objective) evaluations
};

struct OptimizationResult {
  int h_star = 0;
  double t_star = 0.0;
  double g_star = 0.0;
  std::vector<PerHResult> per_h;
  long search_steps = 0;
};

/// Largest H with T_min(H) < T0, or 0 when no H qualifies.
int h_max(const SystemParams& params);

/// Bisection on the sign of dg/dT over [T_min(h), T_max(h)].
PerHResult optimize_t_for_h(const SystemParams& params, int h, const OptimizerConfig& cfg);

/// Pick the best entry: largest g, ties toward smaller h then smaller t.
/// Independent of the order of `per_h`. Throws on an empty table.
OptimizationResult select_best(std::vector<PerHResult> per_h);

/// Throws InfeasibleError when h_max == 0 or there is no traffic.
OptimizationResult mobfl_optimize(const SystemParams& params, const OptimizerConfig& cfg);

/// Exhaustive scan of T_min(h) + i * grid_step <= T_max(h), i >= 1, for every
/// feasible h. Verification oracle for mobfl_optimize.
OptimizationResult brute_force_argmax(const SystemParams& params, const OptimizerConfig& cfg);

}  // namespace mobfl::optimizer
