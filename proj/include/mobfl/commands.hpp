#pragma once

#include <iosfwd>

#include "mobfl/config.hpp"
#include "mobfl/fl_sim.hpp"
#include "mobfl/mc_sim.hpp"
#include "mobfl/optimizer.hpp"

namespace mobfl::commands {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kInfeasible = 2,
  kNumericalFailure = 3,
};

/// optimize.csv (h,t_opt_s,g_opt) and optimize_summary.csv.
optimizer::OptimizationResult cmd_optimize(const config::ExperimentConfig& cfg, std::ostream& log);

/// theorem1.csv (m_suc,empirical_freq,poisson_pmf) and fit_report.csv.
mc::FitReport cmd_validate(const config::ExperimentConfig& cfg, std::ostream& log);

/// surface.csv (h,t_s,g,lambda,p_success). Throws ConfigError on an empty grid.
void cmd_sweep(const config::ExperimentConfig& cfg, std::ostream& log);

/// fl_runs.csv (h,t_s,time_s,round,val_loss,l_min) and correlation.txt.
fl::CorrelationResult cmd_fl(const config::ExperimentConfig& cfg, std::ostream& log);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mobfl::commands
