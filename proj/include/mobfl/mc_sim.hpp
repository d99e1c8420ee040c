#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mobfl/random.hpp"
#include "mobfl/types.hpp"

// Discrete-event Monte Carlo of the per-round pipeline: Poisson arrivals,
// fixed dwell windows, download -> local compute -> upload, and the success
// rule completion <= min{departure, round end}.
namespace mobfl::mc {

/// Optional replacement for a constant communication delay.
using DelaySampler = std::function<double(Rng&)>;

struct SimConfig {
  std::uint64_t seed = 1;
  long num_rounds = 100000;
  long warmup_rounds = 1;
  /// Keep every RoundRecord (memory grows with num_rounds).
  bool record_rounds = false;
  /// Stochastic delay hooks; empty means the constant tau from SystemParams.
  DelaySampler download_delay;
  DelaySampler upload_delay;

  /// Throws ValidationError.
  void validate() const;
};

/// Per sub-interval tallies of attempts, by where the arrival fell inside
/// the round's membership window. Index order matches SubintervalProbs.
struct SubintervalTally {
  std::array<long, 3> attempts{};
  std::array<long, 3> successes{};
};

struct SimSummary {
  long num_rounds = 0;
  std::vector<RoundRecord> rounds;  // filled only with record_rounds
  std::map<int, long> histogram;    // M_suc value -> number of rounds
  double empirical_mean_msuc = 0.0;
  double empirical_p_positive = 0.0;
  long total_participants = 0;
  SubintervalTally subintervals;

  double frequency(int m_suc) const;
};

struct HistogramRow {
  int m_suc = 0;
  double empirical = 0.0;
  double poisson = 0.0;
};

struct FitReport {
  double lambda_analytic = 0.0;
  double mean_empirical = 0.0;
  double tv_distance = 0.0;
  double mean_relative_error = 0.0;
  double p_pos_analytic = 0.0;
  double p_pos_empirical = 0.0;
  double p_pos_error = 0.0;
  std::vector<HistogramRow> rows;
};

/// alpha H - beta H ln(1 - U).
double sample_computing_delay(const SystemParams& params, int local_iterations, Rng& rng);

/// Poisson arrivals on (-T0, horizon), ids 0, 1, 2, ... in arrival order.
std::vector<VehicleTrace> generate_arrivals(const SystemParams& params, double horizon,
                                            Rng& rng, int dataset_size = 1024);

/// Timeline of one vehicle's attempt in round k given its compute delay.
UploadAttempt evaluate_attempt(const SystemParams& params, const Schedule& sched,
                               std::int64_t round_index, const VehicleTrace& vehicle,
                               double computing_delay, double tau_down, double tau_up);

/// Which of the three membership sub-intervals the arrival lies in (0..2).
int subinterval_of(const SystemParams& params, const Schedule& sched,
                   std::int64_t round_index, double arrival_time);

/// Half-open index range [first, last) of vehicles belonging to round k,
/// i.e. with arrival in (kT - T0, (k+1)T). `vehicles` must be sorted.
struct Membership {
  std::size_t first = 0;
  std::size_t last = 0;
};
Membership round_members(const std::vector<VehicleTrace>& vehicles, const SystemParams& params,
                         const Schedule& sched, std::int64_t round_index,
                         std::size_t search_from = 0);

SimSummary simulate_rounds(const SystemParams& params, const Schedule& sched,
                           const SimConfig& cfg);

/// Goodness of fit of the empirical M_suc law against Poisson(lambda). The
/// pmf is truncated once it drops below 1e-9 beyond the largest observed
/// count; the truncated tail mass is added to the TV distance.
FitReport compare_to_poisson(const SimSummary& summary, double lambda);

}  // namespace mobfl::mc
