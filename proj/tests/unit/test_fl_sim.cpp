#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "mobfl/analytic.hpp"
#include "mobfl/fl_sim.hpp"

using namespace mobfl;
using namespace mobfl::fl;

namespace {

FLConfig tiny_config() {
  FLConfig cfg;
  cfg.feature_dim = 4;
  cfg.samples_per_vehicle = 128;
  cfg.batch_size = 16;
  cfg.global_pool_size = 2048;
  cfg.validation_size = 512;
  cfg.horizon = 600.0;
  cfg.learning_rate = 0.05;
  return cfg;
}

ModelState constant_model(std::vector<double> w) {
  ModelState m;
  m.weights = std::move(w);
  return m;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

TEST_CASE("aggregate is the dataset-size weighted mean") {
  std::vector<LocalUpdate> ups = {{constant_model({0.0, 0.0}), 10}, {constant_model({4.0, 8.0}), 10}};
  auto out = aggregate(ups);
  CHECK(out.weights[0] == 2.0);
  CHECK(out.weights[1] == 4.0);

  ups = {{constant_model({0.0, 0.0}), 1}, {constant_model({4.0, -4.0}), 3}};
  out = aggregate(ups);
  CHECK(out.weights[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(out.weights[1] == doctest::Approx(-3.0).epsilon(1e-15));

  ups = {{constant_model({1.5, -2.25}), 7}};
  CHECK(aggregate(ups).weights == ups[0].model.weights);

  CHECK_THROWS_AS(aggregate(std::vector<LocalUpdate>{}), InfeasibleError);
}

TEST_CASE("aggregate properties") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    const std::vector<double> w = {rng.normal(), rng.normal(), rng.normal()};
    std::vector<LocalUpdate> same;
    std::vector<LocalUpdate> mixed;
    std::vector<double> lo(3, INFINITY), hi(3, -INFINITY);
    for (int i = 0; i < n; ++i) {
      const int size = 1 + static_cast<int>(rng.below(2000));
      same.push_back({constant_model(w), size});
      std::vector<double> v = {rng.normal(), rng.normal(), rng.normal()};
      for (int j = 0; j < 3; ++j) {
        lo[j] = std::min(lo[j], v[j]);
        hi[j] = std::max(hi[j], v[j]);
      }
      mixed.push_back({constant_model(v), size});
    }
    // identical uploads reproduce the model bit for bit
    CHECK(aggregate(same).weights == w);
    // a convex combination stays inside the coordinate hull
    const auto avg = aggregate(mixed);
    for (int j = 0; j < 3; ++j) {
      CHECK(avg.weights[j] >= lo[j] - 1e-12);
      CHECK(avg.weights[j] <= hi[j] + 1e-12);
    }
  }
}

TEST_CASE("gradient matches central differences") {
  auto cfg = tiny_config();
  Rng rng(2);
  const auto task = generate_task(cfg, rng);
  std::vector<std::size_t> rows(40);
  std::iota(rows.begin(), rows.end(), std::size_t{100});
  for (int trial = 0; trial < 20; ++trial) {
    ModelState w = ModelState::zeros(cfg.feature_dim);
    for (auto& v : w.weights) v = rng.normal();
    const auto grad = gradient(w, task.pool, rows);
    for (std::size_t j = 0; j < w.weights.size(); ++j) {
      const double h = 1e-5;
      auto up = w;
      auto down = w;
      up.weights[j] += h;
      down.weights[j] -= h;
      const double fd = (loss(up, task.pool, rows) - loss(down, task.pool, rows)) / (2 * h);
      CHECK(std::abs(fd - grad[j]) <= 1e-6 * std::max(1.0, std::abs(grad[j])));
    }
  }
}

TEST_CASE("loss at the generating weights") {
  auto cfg = tiny_config();
  Rng rng(4);
  const auto clean = generate_task(cfg, rng);
  CHECK(loss(constant_model(clean.true_weights), clean.validation) < 1e-25);

  cfg.noise_std = 0.5;
  const auto noisy = generate_task(cfg, rng);
  const double value = loss(constant_model(noisy.true_weights), noisy.validation);
  const double target = 0.5 * 0.25;
  CHECK(std::abs(value - target) / target < 4.0 * std::sqrt(2.0 / cfg.validation_size));
}

TEST_CASE("local SGD") {
  auto cfg = tiny_config();
  Rng rng(6);
  const auto task = generate_task(cfg, rng);
  std::vector<std::size_t> rows(128);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto start = ModelState::zeros(cfg.feature_dim);

  // H = 0 is the identity
  CHECK(local_sgd(start, task.pool, rows, 0, cfg, rng).weights == start.weights);

  // full batch: plain gradient descent, monotone on a quadratic
  auto full = cfg;
  full.batch_size = 128;
  ModelState w = start;
  double previous = loss(w, task.pool, rows);
  for (int i = 0; i < 50; ++i) {
    w = local_sgd(w, task.pool, rows, 1, full, rng);
    const double now = loss(w, task.pool, rows);
    CHECK(now <= previous);
    previous = now;
  }

  auto wild = cfg;
  wild.learning_rate = 1e6;
  CHECK_THROWS_AS(local_sgd(start, task.pool, rows, 500, wild, rng), DivergenceError);

  CHECK_THROWS_AS(local_sgd(start, task.pool, std::span(rows).first(8), 1, cfg, rng),
                  ValidationError);
}

TEST_CASE("run_fl without traffic never moves the model") {
  const auto cfg = tiny_config();
  const auto run = run_fl(testing::with_rate(0.0), Schedule(8, 10.0), cfg);
  CHECK(run.rounds_total == 60);
  CHECK(run.rounds_valid == 0);
  REQUIRE(run.loss_curve.size() == 61);
  for (const auto& point : run.loss_curve) {
    CHECK(point.val_loss == run.loss_curve.front().val_loss);
  }
  CHECK(run.final_model.weights == ModelState::zeros(cfg.feature_dim).weights);
}

TEST_CASE("run_fl makes progress on the noiseless task") {
  const auto p = testing::reference_params();
  const auto cfg = tiny_config();
  const auto run = run_fl(p, Schedule(8, 6.0), cfg);
  REQUIRE_FALSE(run.diverged);
  CHECK(run.rounds_valid > 0);
  CHECK(run.final_l_min() * 10.0 <= run.loss_curve.front().val_loss);
  for (std::size_t i = 1; i < run.loss_curve.size(); ++i) {
    CHECK(run.loss_curve[i].l_min <= run.loss_curve[i - 1].l_min);
    CHECK(run.loss_curve[i].round == static_cast<std::int64_t>(i));
    CHECK(run.loss_curve[i].time == doctest::Approx(6.0 * i));
  }
  CHECK_THROWS_AS(run_fl(p, Schedule(8, 700.0), cfg), ValidationError);
}

TEST_CASE("valid-round frequency tracks 1 - exp(-Lambda)") {
  const auto p = testing::reference_params();
  auto cfg = tiny_config();
  cfg.horizon = 40000.0;
  cfg.learning_rate = 0.01;
  const Schedule sched(4, 10.0);
  const auto run = run_fl(p, sched, cfg, 3);
  const double expected = analytic::success_probability(p, sched);
  const double n = static_cast<double>(run.rounds_total);
  const double freq = run.rounds_valid / n;
  CHECK(std::abs(freq - expected) <= 3.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST_CASE("run_fl is reproducible") {
  const auto p = testing::reference_params();
  const auto cfg = tiny_config();
  const auto a = run_fl(p, Schedule(16, 9.0), cfg, 2);
  const auto b = run_fl(p, Schedule(16, 9.0), cfg, 2);
  REQUIRE(a.loss_curve.size() == b.loss_curve.size());
  for (std::size_t i = 0; i < a.loss_curve.size(); ++i) {
    CHECK(a.loss_curve[i].val_loss == b.loss_curve[i].val_loss);
  }
}

TEST_CASE("run_fl_grid flags divergence instead of throwing") {
  const auto p = testing::reference_params();
  auto cfg = tiny_config();
  cfg.learning_rate = 50.0;
  const std::vector<Schedule> grid = {Schedule(8, 6.0)};
  const auto runs = run_fl_grid(p, grid, cfg);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].diverged);
  CHECK_FALSE(runs[0].diagnostic.empty());
  CHECK(std::isnan(runs[0].final_l_min()));
}

TEST_CASE("spearman") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> b = {10, 20, 30, 40, 50};
  const std::vector<double> c = {5, 4, 3, 2, 1};
  CHECK(*spearman(a, b) == doctest::Approx(1.0));
  CHECK(*spearman(a, c) == doctest::Approx(-1.0));
  const std::vector<double> flat = {2, 2, 2, 2, 2};
  CHECK_FALSE(spearman(a, flat).has_value());
  // ties take average ranks: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4)
  const std::vector<double> tied = {1, 2, 2, 3};
  const std::vector<double> plain = {1, 2, 3, 4};
  CHECK(*spearman(tied, plain) == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
}

TEST_CASE("proxy correlation needs eight usable runs") {
  const auto p = testing::reference_params();
  std::vector<FLRunResult> runs;
  for (int i = 0; i < 9; ++i) {
    FLRunResult r;
    r.schedule = Schedule(8 + i, 10.0);
    r.loss_curve.push_back({0.0, 0, 1.0, 1.0 / (i + 1)});
    runs.push_back(r);
  }
  runs[0].diverged = true;
  const auto ok = proxy_correlation(runs, p);
  CHECK(ok.runs_used == 8);
  CHECK(ok.runs_excluded == 1);
  REQUIRE(ok.rho.has_value());

  runs[1].diverged = true;
  CHECK_THROWS_AS(proxy_correlation(runs, p), ValidationError);

  for (auto& r : runs) {
    r.diverged = false;
    r.loss_curve.back().l_min = 0.5;
  }
  const auto flat = proxy_correlation(runs, p);
  CHECK_FALSE(flat.rho.has_value());
  CHECK_FALSE(flat.note.empty());
}

TEST_CASE("proxy grid scales the per-h optimum") {
  const auto p = testing::reference_params();
  const std::vector<int> hs = {8, 24};
  const std::vector<double> factors = {0.5, 1.0};
  const optimizer::OptimizerConfig opt;
  const auto grid = proxy_grid(p, hs, factors, opt);
  REQUIRE(grid.size() == 4);
  const double t24 = optimizer::optimize_t_for_h(p, 24, opt).t;
  CHECK(grid[2].local_iterations() == 24);
  CHECK(grid[2].round_duration() == 0.5 * t24);
  CHECK(grid[3].round_duration() == t24);
}

TEST_CASE("FLConfig validation") {
  auto cfg = tiny_config();
  cfg.batch_size = 1000;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = tiny_config();
  cfg.global_pool_size = 10;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = tiny_config();
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
