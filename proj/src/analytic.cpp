#include "mobfl/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mobfl::analytic {

namespace {

// 1 - e^{-x}
double one_minus_exp(double x) { return -std::expm1(-x); }

void require_feasible(double slack) {
  if (!(slack > 0.0)) {
    throw InfeasibleError("schedule infeasible: min{T, T0} - T_min(H) = " +
                          std::to_string(slack) + " <= 0");
  }
}

}  // namespace

double excess_over_expm1(double x) {
  if (std::abs(x) < 1e-2) {
    // x^2/2 - x^3/6 + x^4/24 - x^5/120 + x^6/720
    return x * x * (1.0 / 2 - x * (1.0 / 6 - x * (1.0 / 24 - x * (1.0 / 120 - x / 720))));
  }
  return x + std::expm1(-x);
}

double t_min(const SystemParams& params, int local_iterations) {
  return params.alpha() * local_iterations + params.tau_down() + params.tau_up();
}

double xi(const SystemParams& params, const Schedule& sched) {
  const double window = std::min(sched.round_duration(), params.dwell_time());
  return window - t_min(params, sched.local_iterations());
}

double lambda_param(const SystemParams& params, const Schedule& sched) {
  const double slack = xi(params, sched);
  if (!(slack > 0.0)) return 0.0;
  const double tail = params.beta() * sched.local_iterations();
  const double x = slack / tail;
  // 2 Xi - 2 beta H (1 - e^{-x}) + |T - T0| (1 - e^{-x}), grouped so that
  // every term is non-negative.
  const double gap = std::abs(sched.round_duration() - params.dwell_time());
  return params.arrival_rate() * (2.0 * tail * excess_over_expm1(x) + gap * one_minus_exp(x));
}

double success_probability(const SystemParams& params, const Schedule& sched) {
  return one_minus_exp(lambda_param(params, sched));
}

SubintervalProbs subinterval_probs(const SystemParams& params, const Schedule& sched) {
  const double slack = xi(params, sched);
  require_feasible(slack);
  const double tail = params.beta() * sched.local_iterations();
  const double x = slack / tail;
  const double t = sched.round_duration();
  const double t0 = params.dwell_time();

  SubintervalProbs out;
  out.p2 = one_minus_exp(x);
  if (t >= t0) {
    out.width1 = t0;
    out.width2 = t - t0;
    out.width3 = t0;
  } else {
    out.width1 = t;
    out.width2 = t0 - t;
    out.width3 = t;
  }
  // The edge sub-intervals have width min{T, T0}; success probability ramps
  // linearly in the available slack across them.
  out.p1 = tail * excess_over_expm1(x) / out.width1;
  out.p3 = out.p1;
  return out;
}

double g(const SystemParams& params, const Schedule& sched) {
  const double lambda = lambda_param(params, sched);
  if (lambda <= 0.0) return 0.0;
  return sched.local_iterations() / sched.round_duration() * one_minus_exp(lambda);
}

double dlambda_dt(const SystemParams& params, const Schedule& sched) {
  const double slack = xi(params, sched);
  require_feasible(slack);
  const double tail = params.beta() * sched.local_iterations();
  const double x = slack / tail;
  const double t = sched.round_duration();
  const double t0 = params.dwell_time();
  const double rate = params.arrival_rate();
  if (t >= t0) return rate * one_minus_exp(x);
  return rate * (one_minus_exp(x) + (t0 - t) / tail * std::exp(-x));
}

double dg_dt(const SystemParams& params, const Schedule& sched) {
  const double slope = dlambda_dt(params, sched);
  const double lambda = lambda_param(params, sched);
  const double t = sched.round_duration();
  const double q = t * slope - std::expm1(lambda);
  return sched.local_iterations() / (t * t) * std::exp(-lambda) * q;
}

DwellCoefficients c0_c1(const SystemParams& params, int local_iterations) {
  const double t0 = params.dwell_time();
  const double slack = t0 - t_min(params, local_iterations);
  if (!(slack > 0.0)) {
    throw InfeasibleError("H = " + std::to_string(local_iterations) +
                          " too large: T_min(H) >= T0");
  }
  const double tail = params.beta() * local_iterations;
  DwellCoefficients out;
  out.c0 = one_minus_exp(slack / tail);
  out.c1 = 2.0 * slack - (t0 + 2.0 * tail) * out.c0;
  return out;
}

double t_max(const SystemParams& params, int local_iterations) {
  const auto [c0, c1] = c0_c1(params, local_iterations);
  const double t0 = params.dwell_time();
  if (c1 >= 0.0) return t0;
  const double rate = params.arrival_rate();
  if (!(rate > 0.0)) {
    throw UnboundedIntervalError("search interval unbounded: no arrivals and C1(H) < 0");
  }
  return t0 + (1.0 - 12.0 * rate * c1) / (4.0 * rate * c0);
}

AnalyticSnapshot snapshot(const SystemParams& params, const Schedule& sched) {
  AnalyticSnapshot s;
  const int h = sched.local_iterations();
  s.t0 = params.dwell_time();
  s.t_min = t_min(params, h);
  s.xi = xi(params, sched);
  s.lambda = lambda_param(params, sched);
  s.g = g(params, sched);
  if (s.xi > 0.0) s.dg_dt = dg_dt(params, sched);
  s.feasible_h = s.t0 - s.t_min > 0.0;
  if (s.feasible_h) {
    const auto coeffs = c0_c1(params, h);
    s.c0 = coeffs.c0;
    s.c1 = coeffs.c1;
    if (coeffs.c1 >= 0.0 || params.arrival_rate() > 0.0) {
      s.t_max = t_max(params, h);
      s.t_max_bounded = true;
    }
  }
  return s;
}

}  // namespace mobfl::analytic
