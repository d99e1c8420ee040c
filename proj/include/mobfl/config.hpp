#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mobfl/fl_sim.hpp"
#include "mobfl/mc_sim.hpp"
#include "mobfl/optimizer.hpp"
#include "mobfl/types.hpp"

namespace mobfl::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  std::vector<int> h_list;
  double t_start = 0.0;
  double t_stop = 0.0;
  double t_step = 0.0;
};

/// Everything a subcommand needs, validated as a whole.
struct ExperimentConfig {
  SystemParams system;
  optimizer::OptimizerConfig optimizer;
  mc::SimConfig sim;
  Schedule validate_schedule;
  SweepSpec sweep;
  fl::FLConfig fl;
  std::vector<int> fl_grid_h;
  std::vector<double> fl_grid_t_factors;
  std::filesystem::path output_dir;
};

/// Raw "section.key" -> value map from INI text. Throws ConfigError on
/// malformed lines or duplicate keys.
std::map<std::string, std::string> read_ini(std::string_view text, std::string_view source);

/// Parse INI text plus "section.key=value" overrides (overrides win).
/// Unknown keys, type mismatches, missing required keys and constraint
/// violations are all ConfigError.
ExperimentConfig parse_config_text(std::string_view text, std::span<const std::string> overrides,
                                   std::string_view source = "<inline>");

ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::span<const std::string> overrides = {});

/// Every accepted key, "section.key", in schema order.
std::vector<std::string> known_keys();

}  // namespace mobfl::config
