#pragma once

#include <cmath>
#include <cstdint>

#include "mobfl/random.hpp"
#include "mobfl/types.hpp"

namespace mobfl::testing {

/// Constants of the reference experiment: L=400 m, v=20 m/s, lambda=0.1/s,
/// tau_down=tau_up=1 s, alpha=beta=0.2 s.
inline SystemParams reference_params() {
  return validate_params({400.0, 20.0, 0.1, 1.0, 1.0, 0.2, 0.2});
}

inline SystemParams with_rate(double rate) {
  auto raw = reference_params().raw();
  raw.arrival_rate = rate;
  return validate_params(raw);
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

/// Random environment with at least one feasible H and positive traffic.
inline SystemParams random_params(Rng& rng) {
  for (;;) {
    RawSystemParams raw;
    raw.length_m = uniform(rng, 100.0, 1000.0);
    raw.speed_mps = uniform(rng, 5.0, 40.0);
    raw.arrival_rate = uniform(rng, 0.01, 1.0);
    raw.tau_down = uniform(rng, 0.0, 2.0);
    raw.tau_up = uniform(rng, 0.0, 2.0);
    raw.alpha = uniform(rng, 0.05, 0.5);
    raw.beta = uniform(rng, 0.05, 0.5);
    const double t0 = raw.length_m / raw.speed_mps;
    if (t0 - raw.tau_down - raw.tau_up > 2.0 * raw.alpha) return validate_params(raw);
  }
}

/// Random feasible H for the given environment (T_min(H) < T0).
inline int random_h(const SystemParams& p, Rng& rng) {
  const double budget = p.dwell_time() - p.tau_down() - p.tau_up();
  int top = static_cast<int>(std::floor(budget / p.alpha()));
  while (top > 1 && p.alpha() * top >= budget) --top;
  return 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(top)));
}

}  // namespace mobfl::testing
