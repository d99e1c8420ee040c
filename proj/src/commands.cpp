#include "mobfl/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "mobfl/analytic.hpp"
#include "mobfl/csv.hpp"

namespace mobfl::commands {

namespace {

using csv::format_number;

std::filesystem::path prepare_dir(const config::ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

std::string join(const auto& items) {
  std::string out;
  for (const auto& x : items) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(x)>>) {
      out += format_number(x);
    } else {
      out += std::to_string(x);
    }
  }
  return out;
}

}  // namespace

optimizer::OptimizationResult cmd_optimize(const config::ExperimentConfig& cfg, std::ostream& log) {
  const auto result = optimizer::mobfl_optimize(cfg.system, cfg.optimizer);
  const auto dir = prepare_dir(cfg);

  csv::Table table({"h", "t_opt_s", "g_opt"});
  for (const auto& row : result.per_h) {
    table.add_row({std::to_string(row.h), format_number(row.t), format_number(row.g)});
  }
  csv::write_atomic(dir / "optimize.csv", table.text());

  csv::Table summary({"h_star", "t_star_s", "g_star", "search_steps"});
  summary.add_row({std::to_string(result.h_star), format_number(result.t_star),
                   format_number(result.g_star), std::to_string(result.search_steps)});
  csv::write_atomic(dir / "optimize_summary.csv", summary.text());

  log << "H*=" << result.h_star << " T*=" << format_number(result.t_star)
      << " s g*=" << format_number(result.g_star) << " search_steps=" << result.search_steps
      << '\n';
  return result;
}

mc::FitReport cmd_validate(const config::ExperimentConfig& cfg, std::ostream& log) {
  const auto& sched = cfg.validate_schedule;
  const double lambda = analytic::lambda_param(cfg.system, sched);
  const auto summary = mc::simulate_rounds(cfg.system, sched, cfg.sim);
  const auto report = mc::compare_to_poisson(summary, lambda);
  const auto dir = prepare_dir(cfg);

  csv::Table hist({"m_suc", "empirical_freq", "poisson_pmf"});
  for (const auto& row : report.rows) {
    hist.add_row({std::to_string(row.m_suc), format_number(row.empirical),
                  format_number(row.poisson)});
  }
  csv::write_atomic(dir / "theorem1.csv", hist.text());

  csv::Table fit({"lambda_analytic", "mean_empirical", "tv_distance", "p_pos_analytic",
                  "p_pos_empirical"});
  fit.add_row({format_number(report.lambda_analytic), format_number(report.mean_empirical),
               format_number(report.tv_distance), format_number(report.p_pos_analytic),
               format_number(report.p_pos_empirical)});
  csv::write_atomic(dir / "fit_report.csv", fit.text());

  log << "H=" << sched.local_iterations() << " T=" << format_number(sched.round_duration())
      << " rounds=" << summary.num_rounds << " lambda=" << format_number(lambda)
      << " mean=" << format_number(report.mean_empirical)
      << " tv=" << format_number(report.tv_distance) << '\n';
  return report;
}

void cmd_sweep(const config::ExperimentConfig& cfg, std::ostream& log) {
  const auto& sweep = cfg.sweep;
  if (sweep.h_list.empty() || !(sweep.t_step > 0.0) || sweep.t_stop < sweep.t_start ||
      !(sweep.t_start > 0.0)) {
    throw config::ConfigError("empty t-grid: need 0 < t_start_s <= t_stop_s and t_step_s > 0");
  }
  const auto points =
      static_cast<long>(std::floor((sweep.t_stop - sweep.t_start) / sweep.t_step + 1e-9)) + 1;

  csv::Table table({"h", "t_s", "g", "lambda", "p_success"});
  for (int h : sweep.h_list) {
    if (h < 1) throw config::ConfigError("sweep.h_list entries must be positive");
    for (long i = 0; i < points; ++i) {
      const double t = sweep.t_start + static_cast<double>(i) * sweep.t_step;
      const Schedule sched(h, t);
      table.add_row({std::to_string(h), format_number(t),
                     format_number(analytic::g(cfg.system, sched)),
                     format_number(analytic::lambda_param(cfg.system, sched)),
                     format_number(analytic::success_probability(cfg.system, sched))});
    }
  }
  csv::write_atomic(prepare_dir(cfg) / "surface.csv", table.text());
  log << "surface: " << sweep.h_list.size() << " h values x " << points << " t values\n";
}

fl::CorrelationResult cmd_fl(const config::ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.fl_grid_h.empty() || cfg.fl_grid_t_factors.empty()) {
    throw config::ConfigError("fl grid is empty");
  }
  for (double f : cfg.fl_grid_t_factors) {
    if (!(f > 0.0)) throw config::ConfigError("fl.grid_t_factors entries must be positive");
  }
  const auto schedules =
      fl::proxy_grid(cfg.system, cfg.fl_grid_h, cfg.fl_grid_t_factors, cfg.optimizer);
  const auto runs = fl::run_fl_grid(cfg.system, schedules, cfg.fl);

  csv::Table table({"h", "t_s", "time_s", "round", "val_loss", "l_min"});
  for (const auto& run : runs) {
    const auto h = std::to_string(run.schedule.local_iterations());
    const auto t = format_number(run.schedule.round_duration());
    if (run.diverged) {
      log << "warning: run h=" << h << " t=" << t << " diverged (" << run.diagnostic
          << "); excluded from correlation\n";
      table.add_row({h, t, "nan", "nan", "nan", "nan"});
      continue;
    }
    for (const auto& p : run.loss_curve) {
      table.add_row({h, t, format_number(p.time), std::to_string(p.round),
                     format_number(p.val_loss), format_number(p.l_min)});
    }
  }
  const auto dir = prepare_dir(cfg);
  csv::write_atomic(dir / "fl_runs.csv", table.text());

  const auto corr = fl::proxy_correlation(runs, cfg.system);
  std::ostringstream text;
  text << "spearman_rho=" << (corr.rho ? format_number(*corr.rho) : std::string("undefined"))
       << '\n';
  if (!corr.note.empty()) text << "note=" << corr.note << '\n';
  text << "runs_used=" << corr.runs_used << '\n'
       << "runs_excluded=" << corr.runs_excluded << '\n'
       << "grid_h=" << join(cfg.fl_grid_h) << '\n'
       << "grid_t_factors=" << join(cfg.fl_grid_t_factors) << '\n'
       << "horizon_s=" << format_number(cfg.fl.horizon) << '\n'
       << "seed=" << cfg.fl.seed << '\n'
       << "h,t_s,g,l_min,rounds_valid,rounds_total\n";
  for (const auto& run : runs) {
    text << run.schedule.local_iterations() << ',' << format_number(run.schedule.round_duration())
         << ',' << format_number(analytic::g(cfg.system, run.schedule)) << ','
         << format_number(run.final_l_min()) << ',' << run.rounds_valid << ','
         << run.rounds_total << '\n';
  }
  csv::write_atomic(dir / "correlation.txt", text.str());

  log << "spearman(g, -L_min) = "
      << (corr.rho ? format_number(*corr.rho) : std::string("undefined")) << " over "
      << corr.runs_used << " runs\n";
  return corr;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  // Dotted "--section.key=value" tokens are config overrides, not CLI flags.
  std::vector<std::string> overrides;
  std::vector<const char*> rest;
  for (int i = 0; i < argc; ++i) {
    const std::string_view arg(argv[i]);
    const auto name = arg.substr(0, arg.find('='));
    if (i > 0 && arg.starts_with("--") && name.find('.') != std::string_view::npos) {
      overrides.emplace_back(arg);
    } else {
      rest.push_back(argv[i]);
    }
  }

  CLI::App app{"Mobility-aware federated learning schedule optimizer and simulators"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  for (const char* name : {"optimize", "validate", "sweep", "fl"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for sim and fl streams");
  }
  app.get_subcommand("optimize")->description("run the (H, T) optimizer");
  app.get_subcommand("validate")->description("Monte Carlo check of the success-count law");
  app.get_subcommand("sweep")->description("dense analytic g(H, T) surface");
  app.get_subcommand("fl")->description("synthetic FedAvg runs and proxy correlation");

  try {
    app.parse(static_cast<int>(rest.size()), rest.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);
    if (seed != 0 || app.get_subcommands().front()->count("--seed")) {
      overrides.push_back("sim.seed=" + std::to_string(seed));
      overrides.push_back("fl.seed=" + std::to_string(seed));
    }
    const auto cfg = config::parse_config(config_path, overrides);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "optimize") {
      cmd_optimize(cfg, out);
    } else if (name == "validate") {
      cmd_validate(cfg, out);
    } else if (name == "sweep") {
      cmd_sweep(cfg, out);
    } else {
      cmd_fl(cfg, out);
    }
    return kOk;
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const DivergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace mobfl::commands
