#pragma once

#include "mobfl/types.hpp"

/// Closed-form model of per-round successful uploads and the valid-update
/// frequency g(H, T) = (H / T) * P{M_suc > 0}.
///
/// All functions are pure. Functions documented as requiring a feasible
/// schedule throw InfeasibleError when min{T, T0} - T_min(H) <= 0.
namespace mobfl::analytic {

/// Minimum pipeline time alpha*H + tau_down + tau_up.
double t_min(const SystemParams& params, int local_iterations);

/// Slack min{T, T0} - T_min(H). Non-positive means nobody can succeed.
double xi(const SystemParams& params, const Schedule& sched);

/// Poisson parameter of the per-round success count; 0 when xi <= 0.
double lambda_param(const SystemParams& params, const Schedule& sched);

/// 1 - exp(-Lambda).
double success_probability(const SystemParams& params, const Schedule& sched);

/// Conditional success probabilities for the three arrival sub-intervals of
/// a round's membership window (kT - T0, (k+1)T), with their widths.
///
/// For T >= T0 the sub-intervals are (kT-T0, kT), [kT, (k+1)T-T0) and
/// [(k+1)T-T0, (k+1)T). For T < T0 they are (kT-T0, (k+1)T-T0),
/// [(k+1)T-T0, kT) and [kT, (k+1)T). In both cases
/// lambda * sum_i width_i * p_i equals lambda_param().
struct SubintervalProbs {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double width1 = 0.0;
  double width2 = 0.0;
  double width3 = 0.0;
};

/// Requires a feasible schedule.
SubintervalProbs subinterval_probs(const SystemParams& params, const Schedule& sched);

/// Valid-update frequency; exactly 0 when xi <= 0.
double g(const SystemParams& params, const Schedule& sched);

/// dLambda/dT. Requires a feasible schedule.
double dlambda_dt(const SystemParams& params, const Schedule& sched);

/// dg/dT, evaluated through q = T dLambda/dT - (e^Lambda - 1), which has the
/// same sign. The T >= T0 branch is used at T == T0; both branches agree
/// there. Requires a feasible schedule.
double dg_dt(const SystemParams& params, const Schedule& sched);

struct DwellCoefficients {
  double c0 = 0.0;  // 1 - exp(-(T0 - T_min) / (beta H)), in (0, 1)
  double c1 = 0.0;  // seconds
};

/// Throws InfeasibleError when T_min(H) >= T0.
DwellCoefficients c0_c1(const SystemParams& params, int local_iterations);

/// Upper end of the search interval for T. Throws InfeasibleError when
/// T_min(H) >= T0 and UnboundedIntervalError when C1 < 0 with no traffic.
double t_max(const SystemParams& params, int local_iterations);

/// Evaluate everything at once; never throws for valid inputs.
AnalyticSnapshot snapshot(const SystemParams& params, const Schedule& sched);

/// x - (1 - e^{-x}) without cancellation for small x.
double excess_over_expm1(double x);

}  // namespace mobfl::analytic
