#include "mobfl/fl_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mobfl/analytic.hpp"
#include "mobfl/mc_sim.hpp"

namespace mobfl::fl {

namespace {

Dataset sample_dataset(std::size_t n, const std::vector<double>& truth, double noise_std,
                       double decay, int dim, Rng& rng) {
  std::vector<double> scale(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) scale[static_cast<std::size_t>(j)] = std::pow(j + 1.0, -decay);
  Dataset data;
  data.dim = dim;
  data.features.resize(n * static_cast<std::size_t>(dim));
  data.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = truth.back();
    for (int j = 0; j < dim; ++j) {
      const double x = scale[static_cast<std::size_t>(j)] * rng.normal();
      data.features[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] = x;
      y += truth[static_cast<std::size_t>(j)] * x;
    }
    if (noise_std > 0.0) y += noise_std * rng.normal();
    data.targets[i] = y;
  }
  return data;
}

double residual(const ModelState& model, const Dataset& data, std::size_t i) {
  const auto x = data.row(i);
  double pred = model.weights.back();
  for (std::size_t j = 0; j < x.size(); ++j) pred += model.weights[j] * x[j];
  return pred - data.targets[i];
}

// Uniform subset of `count` distinct pool indices (partial Fisher-Yates).
std::vector<std::size_t> draw_rows(std::size_t pool, std::size_t count, Rng& rng) {
  std::vector<std::size_t> all(pool);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t j = 0; j < count; ++j) {
    const auto pick = j + static_cast<std::size_t>(rng.below(pool - j));
    std::swap(all[j], all[pick]);
  }
  all.resize(count);
  return all;
}

}  // namespace

void FLConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be positive");
  }
  if (batch_size < 1) throw ValidationError("batch size must be positive");
  if (samples_per_vehicle < 1) throw ValidationError("samples per vehicle must be positive");
  if (batch_size > samples_per_vehicle) {
    throw ValidationError("batch size must not exceed samples per vehicle");
  }
  if (feature_dim < 1) throw ValidationError("feature dimension must be positive");
  if (global_pool_size < samples_per_vehicle) {
    throw ValidationError("global pool must hold at least samples_per_vehicle samples");
  }
  if (validation_size < 1) throw ValidationError("validation size must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be positive");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ValidationError("noise std must be non-negative");
  }
  if (!(feature_decay >= 0.0) || !std::isfinite(feature_decay)) {
    throw ValidationError("feature decay must be non-negative");
  }
}

ModelState ModelState::zeros(int feature_dim) {
  ModelState m;
  m.weights.assign(static_cast<std::size_t>(feature_dim) + 1, 0.0);
  return m;
}

bool ModelState::finite() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

double FLRunResult::final_l_min() const {
  if (diverged || loss_curve.empty()) return NAN;
  return loss_curve.back().l_min;
}

Task generate_task(const FLConfig& cfg, Rng& rng) {
  cfg.validate();
  Task task;
  task.true_weights.resize(static_cast<std::size_t>(cfg.feature_dim) + 1);
  for (auto& w : task.true_weights) w = rng.normal();
  // Pool and validation are separate draws, hence disjoint samples.
  task.pool = sample_dataset(static_cast<std::size_t>(cfg.global_pool_size), task.true_weights,
                             cfg.noise_std, cfg.feature_decay, cfg.feature_dim, rng);
  task.validation = sample_dataset(static_cast<std::size_t>(cfg.validation_size),
                                   task.true_weights, cfg.noise_std, cfg.feature_decay,
                                   cfg.feature_dim, rng);
  return task;
}

double loss(const ModelState& model, const Dataset& data, std::span<const std::size_t> rows) {
  double sum = 0.0;
  if (rows.empty()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double r = residual(model, data, i);
      sum += r * r;
    }
    return 0.5 * sum / static_cast<double>(data.size());
  }
  for (std::size_t i : rows) {
    const double r = residual(model, data, i);
    sum += r * r;
  }
  return 0.5 * sum / static_cast<double>(rows.size());
}

std::vector<double> gradient(const ModelState& model, const Dataset& data,
                             std::span<const std::size_t> rows) {
  std::vector<double> grad(model.weights.size(), 0.0);
  const std::size_t dim = static_cast<std::size_t>(data.dim);
  for (std::size_t i : rows) {
    const double r = residual(model, data, i);
    const auto x = data.row(i);
    for (std::size_t j = 0; j < dim; ++j) grad[j] += r * x[j];
    grad[dim] += r;
  }
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (auto& v : grad) v *= scale;
  return grad;
}

ModelState local_sgd(const ModelState& start, const Dataset& data,
                     std::span<const std::size_t> rows, int local_iterations,
                     const FLConfig& cfg, Rng& rng) {
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  if (rows.size() < batch) throw ValidationError("local dataset smaller than batch size");
  ModelState w = start;
  std::vector<std::size_t> scratch(rows.begin(), rows.end());
  for (int step = 0; step < local_iterations; ++step) {
    for (std::size_t j = 0; j < batch; ++j) {
      const auto pick = j + static_cast<std::size_t>(rng.below(scratch.size() - j));
      std::swap(scratch[j], scratch[pick]);
    }
    const auto grad = gradient(w, data, std::span(scratch).first(batch));
    for (std::size_t j = 0; j < grad.size(); ++j) w.weights[j] -= cfg.learning_rate * grad[j];
    if (!w.finite()) {
      throw DivergenceError("local SGD diverged at step " + std::to_string(step + 1) +
                            "; reduce the learning rate");
    }
  }
  return w;
}

ModelState aggregate(std::span<const LocalUpdate> updates) {
  if (updates.empty()) throw InfeasibleError("invalid round: no uploaded models");
  // Running weighted mean; identical inputs reproduce the input exactly.
  ModelState out = updates.front().model;
  double total = updates.front().dataset_size;
  for (std::size_t i = 1; i < updates.size(); ++i) {
    const auto& u = updates[i];
    total += u.dataset_size;
    const double share = u.dataset_size / total;
    for (std::size_t j = 0; j < out.weights.size(); ++j) {
      out.weights[j] += share * (u.model.weights[j] - out.weights[j]);
    }
  }
  return out;
}

FLRunResult run_fl(const SystemParams& params, const Schedule& sched, const FLConfig& cfg,
                   std::uint64_t stream_index) {
  cfg.validate();
  const double t = sched.round_duration();
  const auto rounds = static_cast<std::int64_t>(std::floor(cfg.horizon / t));
  if (rounds < 1) throw ValidationError("horizon shorter than one round");

  Rng task_rng = Rng::derive(cfg.seed, "fl-task");
  const Task task = generate_task(cfg, task_rng);

  Rng arrival_rng = Rng::derive(cfg.seed, "fl-arrivals", stream_index);
  Rng compute_rng = Rng::derive(cfg.seed, "fl-computing-delay", stream_index);
  Rng data_rng = Rng::derive(cfg.seed, "fl-data", stream_index);
  Rng sgd_rng = Rng::derive(cfg.seed, "fl-sgd", stream_index);

  const auto vehicles = mc::generate_arrivals(params, static_cast<double>(rounds) * t,
                                              arrival_rng, cfg.samples_per_vehicle);
  std::vector<std::vector<std::size_t>> local_rows;
  local_rows.reserve(vehicles.size());
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    local_rows.push_back(draw_rows(task.pool.size(),
                                   static_cast<std::size_t>(cfg.samples_per_vehicle), data_rng));
  }

  FLRunResult result;
  result.schedule = sched;
  result.rounds_total = rounds;
  ModelState w = ModelState::zeros(cfg.feature_dim);
  double best = loss(w, task.validation);
  result.loss_curve.push_back({0.0, 0, best, best});

  std::size_t cursor = 0;
  std::vector<LocalUpdate> uploads;
  for (std::int64_t k = 0; k < rounds; ++k) {
    const auto members = mc::round_members(vehicles, params, sched, k, cursor);
    cursor = members.first;
    uploads.clear();
    for (std::size_t i = members.first; i < members.last; ++i) {
      const double compute =
          mc::sample_computing_delay(params, sched.local_iterations(), compute_rng);
      const auto attempt = mc::evaluate_attempt(params, sched, k, vehicles[i], compute,
                                                params.tau_down(), params.tau_up());
      if (!attempt.success) continue;
      uploads.push_back({local_sgd(w, task.pool, local_rows[i], sched.local_iterations(), cfg,
                                   sgd_rng),
                         vehicles[i].dataset_size});
    }
    if (!uploads.empty()) {
      w = aggregate(uploads);
      ++result.rounds_valid;
    }
    w.round_index = k + 1;
    const double val = loss(w, task.validation);
    best = std::min(best, val);
    result.loss_curve.push_back({static_cast<double>(k + 1) * t, k + 1, val, best});
  }
  result.final_model = std::move(w);
  return result;
}

std::vector<FLRunResult> run_fl_grid(const SystemParams& params,
                                     std::span<const Schedule> schedules, const FLConfig& cfg) {
  std::vector<FLRunResult> out;
  out.reserve(schedules.size());
  for (std::size_t i = 0; i < schedules.size(); ++i) {
    try {
      out.push_back(run_fl(params, schedules[i], cfg, i));
    } catch (const DivergenceError& e) {
      FLRunResult failed;
      failed.schedule = schedules[i];
      failed.diverged = true;
      failed.diagnostic = e.what();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

std::vector<Schedule> proxy_grid(const SystemParams& params, std::span<const int> hs,
                                 std::span<const double> factors,
                                 const optimizer::OptimizerConfig& opt_cfg) {
  std::vector<Schedule> out;
  for (int h : hs) {
    const auto best = optimizer::optimize_t_for_h(params, h, opt_cfg);
    for (double f : factors) out.emplace_back(h, f * best.t);
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean_a) * (rb[i] - mean_b);
    var_a += (ra[i] - mean_a) * (ra[i] - mean_a);
    var_b += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

CorrelationResult proxy_correlation(std::span<const FLRunResult> results,
                                    const SystemParams& params) {
  CorrelationResult out;
  std::vector<double> gs;
  std::vector<double> neg_loss;
  for (const auto& run : results) {
    const double l_min = run.final_l_min();
    if (run.diverged || !std::isfinite(l_min)) {
      ++out.runs_excluded;
      continue;
    }
    gs.push_back(analytic::g(params, run.schedule));
    neg_loss.push_back(-l_min);
  }
  out.runs_used = gs.size();
  if (out.runs_used < 8) {
    throw ValidationError("proxy correlation needs at least 8 usable runs, got " +
                          std::to_string(out.runs_used));
  }
  out.rho = spearman(gs, neg_loss);
  if (!out.rho) out.note = "degenerate: g or L_min constant across runs";
  return out;
}

}  // namespace mobfl::fl
