#include "mobfl/types.hpp"

#include <cmath>

namespace mobfl {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ValidationError(std::string(name) + " must be finite");
  }
}

}  // namespace

SystemParams validate_params(const RawSystemParams& raw) {
  require_finite(raw.length_m, "section length");
  require_finite(raw.speed_mps, "speed");
  require_finite(raw.arrival_rate, "arrival rate");
  require_finite(raw.tau_down, "download delay");
  require_finite(raw.tau_up, "upload delay");
  require_finite(raw.alpha, "alpha");
  require_finite(raw.beta, "beta");

  if (raw.length_m <= 0.0) throw ValidationError("section length must be positive");
  if (raw.speed_mps <= 0.0) throw ValidationError("speed must be positive");
  if (raw.arrival_rate < 0.0) throw ValidationError("arrival rate must be non-negative");
  if (raw.tau_down < 0.0) throw ValidationError("download delay must be non-negative");
  if (raw.tau_up < 0.0) throw ValidationError("upload delay must be non-negative");
  if (raw.alpha <= 0.0) throw ValidationError("alpha must be positive");
  if (raw.beta <= 0.0) throw ValidationError("beta must be positive");

  SystemParams params(raw);
  if (!std::isfinite(params.dwell_time()) || params.dwell_time() <= 0.0) {
    throw ValidationError("dwell time L/v must be finite and positive");
  }
  return params;
}

Schedule::Schedule(int local_iterations, double round_duration)
    : h_(local_iterations), t_(round_duration) {
  if (h_ < 1) throw ValidationError("local iterations must be at least 1");
  if (!std::isfinite(t_) || t_ <= 0.0) {
    throw ValidationError("round duration must be finite and positive");
  }
}

}  // namespace mobfl
