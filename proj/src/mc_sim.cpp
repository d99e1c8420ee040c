#include "mobfl/mc_sim.hpp"

#include <algorithm>
#include <cmath>

#include "mobfl/analytic.hpp"

namespace mobfl::mc {

void SimConfig::validate() const {
  if (num_rounds < 1) throw ValidationError("num_rounds must be at least 1");
  if (warmup_rounds < 0) throw ValidationError("warmup_rounds must be non-negative");
}

double SimSummary::frequency(int m_suc) const {
  const auto it = histogram.find(m_suc);
  if (it == histogram.end() || num_rounds == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(num_rounds);
}

double sample_computing_delay(const SystemParams& params, int local_iterations, Rng& rng) {
  const double h = local_iterations;
  return params.alpha() * h - params.beta() * h * std::log1p(-rng.uniform01());
}

std::vector<VehicleTrace> generate_arrivals(const SystemParams& params, double horizon,
                                            Rng& rng, int dataset_size) {
  std::vector<VehicleTrace> out;
  const double rate = params.arrival_rate();
  if (!(rate > 0.0)) return out;
  const double t0 = params.dwell_time();
  out.reserve(static_cast<std::size_t>(rate * (horizon + t0) * 1.1) + 16);
  double t = -t0;
  for (std::int64_t id = 0;; ++id) {
    t += rng.exponential(rate);
    if (!(t < horizon)) break;
    VehicleTrace v;
    v.id = id;
    v.arrival_time = t;
    v.departure_time = t + t0;
    v.dataset_size = dataset_size;
    out.push_back(v);
  }
  return out;
}

UploadAttempt evaluate_attempt(const SystemParams& params, const Schedule& sched,
                               std::int64_t round_index, const VehicleTrace& vehicle,
                               double computing_delay, double tau_down, double tau_up) {
  const double t = sched.round_duration();
  const double round_start = static_cast<double>(round_index) * t;
  const double round_end = static_cast<double>(round_index + 1) * t;
  UploadAttempt a;
  a.round_index = round_index;
  a.vehicle_id = vehicle.id;
  a.start_time = std::max(round_start, vehicle.arrival_time);
  a.computing_delay = computing_delay;
  a.completion = a.start_time + tau_down + computing_delay + tau_up;
  a.deadline = std::min(vehicle.arrival_time + params.dwell_time(), round_end);
  a.success = a.completion <= a.deadline;
  return a;
}

int subinterval_of(const SystemParams& params, const Schedule& sched,
                   std::int64_t round_index, double arrival_time) {
  const double t = sched.round_duration();
  const double t0 = params.dwell_time();
  const double start = static_cast<double>(round_index) * t;
  const double late_edge = static_cast<double>(round_index + 1) * t - t0;
  const double first_cut = std::min(start, late_edge);
  const double second_cut = std::max(start, late_edge);
  if (arrival_time < first_cut) return 0;
  if (arrival_time < second_cut) return 1;
  return 2;
}

Membership round_members(const std::vector<VehicleTrace>& vehicles, const SystemParams& params,
                         const Schedule& sched, std::int64_t round_index,
                         std::size_t search_from) {
  const double t = sched.round_duration();
  const double open_lo = static_cast<double>(round_index) * t - params.dwell_time();
  const double open_hi = static_cast<double>(round_index + 1) * t;
  Membership m;
  m.first = std::min(search_from, vehicles.size());
  while (m.first < vehicles.size() && !(vehicles[m.first].arrival_time > open_lo)) ++m.first;
  m.last = m.first;
  while (m.last < vehicles.size() && vehicles[m.last].arrival_time < open_hi) ++m.last;
  return m;
}

SimSummary simulate_rounds(const SystemParams& params, const Schedule& sched,
                           const SimConfig& cfg) {
  cfg.validate();
  const double t = sched.round_duration();
  const std::int64_t first_round = cfg.warmup_rounds;
  const std::int64_t end_round = cfg.warmup_rounds + cfg.num_rounds;

  Rng arrival_rng = Rng::derive(cfg.seed, "arrivals");
  Rng compute_rng = Rng::derive(cfg.seed, "computing-delay");
  Rng comm_rng = Rng::derive(cfg.seed, "communication-delay");
  const auto vehicles =
      generate_arrivals(params, static_cast<double>(end_round) * t, arrival_rng);

  SimSummary summary;
  summary.num_rounds = cfg.num_rounds;
  if (cfg.record_rounds) summary.rounds.reserve(static_cast<std::size_t>(cfg.num_rounds));

  long total_successes = 0;
  long positive_rounds = 0;
  std::size_t cursor = 0;
  for (std::int64_t k = first_round; k < end_round; ++k) {
    const auto members = round_members(vehicles, params, sched, k, cursor);
    cursor = members.first;

    RoundRecord record;
    record.round_index = k;
    record.participants = static_cast<int>(members.last - members.first);
    for (std::size_t i = members.first; i < members.last; ++i) {
      const auto& vehicle = vehicles[i];
      const double down = cfg.download_delay ? cfg.download_delay(comm_rng) : params.tau_down();
      const double up = cfg.upload_delay ? cfg.upload_delay(comm_rng) : params.tau_up();
      const double compute = sample_computing_delay(params, sched.local_iterations(), compute_rng);
      const auto attempt = evaluate_attempt(params, sched, k, vehicle, compute, down, up);

      const int bin = subinterval_of(params, sched, k, vehicle.arrival_time);
      ++summary.subintervals.attempts[static_cast<std::size_t>(bin)];
      if (attempt.success) {
        ++summary.subintervals.successes[static_cast<std::size_t>(bin)];
        ++record.successes;
      }
      if (cfg.record_rounds) record.attempts.push_back(attempt);
    }
    summary.total_participants += record.participants;
    total_successes += record.successes;
    if (record.successes > 0) ++positive_rounds;
    ++summary.histogram[record.successes];
    if (cfg.record_rounds) summary.rounds.push_back(std::move(record));
  }

  const auto n = static_cast<double>(cfg.num_rounds);
  summary.empirical_mean_msuc = static_cast<double>(total_successes) / n;
  summary.empirical_p_positive = static_cast<double>(positive_rounds) / n;
  return summary;
}

FitReport compare_to_poisson(const SimSummary& summary, double lambda) {
  if (summary.num_rounds < 1 || summary.histogram.empty()) {
    throw ValidationError("simulation summary is empty");
  }
  FitReport report;
  report.lambda_analytic = lambda;
  report.mean_empirical = summary.empirical_mean_msuc;
  report.p_pos_analytic = -std::expm1(-lambda);
  report.p_pos_empirical = summary.empirical_p_positive;
  report.p_pos_error = std::abs(report.p_pos_empirical - report.p_pos_analytic);
  if (lambda > 0.0) {
    report.mean_relative_error = std::abs(report.mean_empirical - lambda) / lambda;
  } else {
    report.mean_relative_error = report.mean_empirical == 0.0 ? 0.0 : INFINITY;
  }

  const int max_observed = summary.histogram.rbegin()->first;
  double pmf = std::exp(-lambda);
  double covered = 0.0;
  double abs_diff = 0.0;
  for (int m = 0;; ++m) {
    if (m > 0) pmf *= lambda / m;
    if (m > max_observed && pmf < 1e-9 && (m > lambda)) break;
    const double empirical = summary.frequency(m);
    report.rows.push_back({m, empirical, pmf});
    covered += pmf;
    abs_diff += std::abs(empirical - pmf);
  }
  report.tv_distance = 0.5 * (abs_diff + std::max(0.0, 1.0 - covered));
  return report;
}

}  // namespace mobfl::mc
