#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobfl {

/// Raised when a value violates a domain constraint at construction time.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a schedule or environment admits no successful upload.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The search interval for T has no finite upper bound (no traffic).
class UnboundedIntervalError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

/// Local training produced non-finite weights.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unchecked field bundle; turn it into SystemParams with validate_params().
struct RawSystemParams {
  double length_m = 0.0;
  double speed_mps = 0.0;
  double arrival_rate = 0.0;
  double tau_down = 0.0;
  double tau_up = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Road section, traffic and delay model. Immutable once validated.
///
/// Times are seconds, rates are per second. `alpha` is the deterministic
/// per-iteration floor of the computing delay and `beta` the per-iteration
/// mean of its exponential tail.
class SystemParams {
 public:
  double length_m() const { return raw_.length_m; }
  double speed_mps() const { return raw_.speed_mps; }
  double arrival_rate() const { return raw_.arrival_rate; }
  double tau_down() const { return raw_.tau_down; }
  double tau_up() const { return raw_.tau_up; }
  double alpha() const { return raw_.alpha; }
  double beta() const { return raw_.beta; }

  /// Dwell time T0 = L / v of every vehicle inside the section.
  double dwell_time() const { return dwell_; }

  const RawSystemParams& raw() const { return raw_; }

 private:
  friend SystemParams validate_params(const RawSystemParams& raw);
  explicit SystemParams(const RawSystemParams& raw)
      : raw_(raw), dwell_(raw.length_m / raw.speed_mps) {}

  RawSystemParams raw_;
  double dwell_;
};

/// Throws ValidationError naming the first violated constraint.
SystemParams validate_params(const RawSystemParams& raw);

/// Decision variables: local iterations H and round duration T.
class Schedule {
 public:
  Schedule(int local_iterations, double round_duration);

  int local_iterations() const { return h_; }
  double round_duration() const { return t_; }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  int h_;
  double t_;
};

/// Every closed-form quantity for one (params, schedule) pair.
struct AnalyticSnapshot {
  double t0 = 0.0;
  double t_min = 0.0;
  double xi = 0.0;
  double lambda = 0.0;
  // c0, c1 and t_max are only defined when T0 > T_min(H); feasible_h says so.
  bool feasible_h = false;
  double c0 = 0.0;
  double c1 = 0.0;
  double t_max = 0.0;
  bool t_max_bounded = false;
  double g = 0.0;
  // Zero when xi <= 0 (derivative undefined there).
  double dg_dt = 0.0;
};

struct VehicleTrace {
  std::int64_t id = 0;
  double arrival_time = 0.0;
  double departure_time = 0.0;
  int dataset_size = 1024;
};

struct UploadAttempt {
  std::int64_t round_index = 0;
  std::int64_t vehicle_id = 0;
  double start_time = 0.0;
  double computing_delay = 0.0;
  double completion = 0.0;
  double deadline = 0.0;
  bool success = false;
};

struct RoundRecord {
  std::int64_t round_index = 0;
  int participants = 0;
  int successes = 0;
  std::vector<UploadAttempt> attempts;
};

}  // namespace mobfl
