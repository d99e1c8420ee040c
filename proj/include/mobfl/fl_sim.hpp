#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobfl/optimizer.hpp"
#include "mobfl/random.hpp"
#include "mobfl/types.hpp"

// Synthetic FedAvg over the simulated vehicle timeline. The task is linear
// regression with loss F(w, S) = 1/(2|S|) sum_{i in S} (<w, x_i> + b - y_i)^2.
namespace mobfl::fl {

struct FLConfig {
  double learning_rate = 0.1;
  int batch_size = 64;
  int samples_per_vehicle = 1024;
  int feature_dim = 10;
  int global_pool_size = 16384;
  int validation_size = 2048;
  double horizon = 2000.0;
  std::uint64_t seed = 1;
  double noise_std = 0.0;
  /// Feature j is scaled by (j + 1)^-feature_decay; 0 gives standard normal
  /// features. A positive decay spreads the Hessian spectrum so that progress
  /// stays visible over long horizons instead of hitting round-off.
  double feature_decay = 0.0;

  /// Throws ValidationError.
  void validate() const;
};

/// Row-major features plus targets.
struct Dataset {
  int dim = 0;
  std::vector<double> features;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

struct Task {
  Dataset pool;
  Dataset validation;
  /// feature_dim weights followed by the bias.
  std::vector<double> true_weights;
};

/// `weights` holds feature_dim coefficients followed by the bias.
struct ModelState {
  std::vector<double> weights;
  std::int64_t round_index = 0;

  static ModelState zeros(int feature_dim);
  bool finite() const;
};

struct LocalUpdate {
  ModelState model;
  int dataset_size = 0;
};

struct LossPoint {
  double time = 0.0;
  std::int64_t round = 0;
  double val_loss = 0.0;
  double l_min = 0.0;
};

struct FLRunResult {
  Schedule schedule{1, 1.0};
  std::vector<LossPoint> loss_curve;
  long rounds_total = 0;
  long rounds_valid = 0;
  bool diverged = false;
  std::string diagnostic;
  ModelState final_model;

  /// L_min at the end of the horizon (NaN when diverged).
  double final_l_min() const;
};

Task generate_task(const FLConfig& cfg, Rng& rng);

/// Mean-squared loss over the given rows (all rows when `rows` is empty).
double loss(const ModelState& model, const Dataset& data, std::span<const std::size_t> rows = {});

/// Gradient of loss() over the given rows.
std::vector<double> gradient(const ModelState& model, const Dataset& data,
                             std::span<const std::size_t> rows);

/// H mini-batch SGD steps; each batch is sampled without replacement from
/// `rows`. Throws DivergenceError on non-finite weights.
ModelState local_sgd(const ModelState& start, const Dataset& data,
                     std::span<const std::size_t> rows, int local_iterations,
                     const FLConfig& cfg, Rng& rng);

/// Dataset-size weighted average of the uploaded models. Throws
/// InfeasibleError on an empty round.
ModelState aggregate(std::span<const LocalUpdate> updates);

/// One FedAvg run over floor(horizon / T) rounds. `stream_index` selects the
/// arrival/compute/SGD streams so grid points are independent; the task is
/// drawn from the seed alone and is shared by all grid points.
FLRunResult run_fl(const SystemParams& params, const Schedule& sched, const FLConfig& cfg,
                   std::uint64_t stream_index = 0);

/// run_fl over a schedule list; divergent runs come back flagged instead of
/// throwing.
std::vector<FLRunResult> run_fl_grid(const SystemParams& params,
                                     std::span<const Schedule> schedules, const FLConfig& cfg);

/// For each h, schedules at factor * T^[h] with T^[h] the per-h optimum.
std::vector<Schedule> proxy_grid(const SystemParams& params, std::span<const int> hs,
                                 std::span<const double> factors,
                                 const optimizer::OptimizerConfig& opt_cfg);

/// Spearman rank correlation with average ranks for ties; nullopt when
/// either side is constant.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct CorrelationResult {
  std::optional<double> rho;
  std::size_t runs_used = 0;
  std::size_t runs_excluded = 0;
  std::string note;
};

/// Spearman correlation between g(H, T) and -L_min(horizon) across runs.
/// Diverged runs are excluded. Throws ValidationError with fewer than 8
/// usable runs.
CorrelationResult proxy_correlation(std::span<const FLRunResult> results,
                                    const SystemParams& params);

}  // namespace mobfl::fl
