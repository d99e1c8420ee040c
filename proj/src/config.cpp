#include "mobfl/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mobfl::config {

namespace {

struct KeySpec {
  const char* name;
  const char* fallback;  // nullptr: required
};

// Schema order is also the order of "missing key" reports.
constexpr KeySpec kSchema[] = {
    {"system.length_m", nullptr},
    {"system.speed_mps", nullptr},
    {"system.arrival_rate_per_s", nullptr},
    {"system.tau_down_s", nullptr},
    {"system.tau_up_s", nullptr},
    {"system.alpha_s", nullptr},
    {"system.beta_s", nullptr},
    {"optimizer.gamma_s", "0.001"},
    {"optimizer.grid_step_s", "0.01"},
    {"sim.seed", "1"},
    {"sim.num_rounds", "100000"},
    {"sim.warmup_rounds", "1"},
    {"sim.h", "24"},
    {"sim.t_s", "11.8"},
    {"sweep.h_list", "24"},
    {"sweep.t_start_s", "7"},
    {"sweep.t_stop_s", "26"},
    {"sweep.t_step_s", "0.1"},
    {"fl.eta", "0.1"},
    {"fl.batch_size", "64"},
    {"fl.samples_per_vehicle", "1024"},
    {"fl.feature_dim", "10"},
    {"fl.global_pool_size", "16384"},
    {"fl.validation_size", "2048"},
    {"fl.horizon_s", "2000"},
    {"fl.seed", "1"},
    {"fl.noise_std", "0"},
    {"fl.feature_decay", "0"},
    {"fl.grid_h", "8,16,24,40"},
    {"fl.grid_t_factors", "0.6,1.0,1.6"},
    {"output.dir", "out"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const KeySpec* find_spec(std::string_view key) {
  for (const auto& spec : kSchema) {
    if (key == spec.name) return &spec;
  }
  return nullptr;
}

class Values {
 public:
  explicit Values(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

  const std::string& text(const char* key) const { return raw_.at(key); }

  double real(const char* key) const {
    const auto& s = text(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  template <typename Int>
  Int integer(const char* key) const {
    return parse_int<Int>(key, text(key));
  }

  std::vector<int> int_list(const char* key) const {
    std::vector<int> out;
    for (const auto& item : split(text(key))) out.push_back(parse_int<int>(key, item));
    return out;
  }

  std::vector<double> real_list(const char* key) const {
    std::vector<double> out;
    for (const auto& item : split(text(key))) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw ConfigError(std::string(key) + ": expected a list of numbers, got '" +
                          text(key) + "'");
      }
      out.push_back(v);
    }
    return out;
  }

 private:
  template <typename Int>
  static Int parse_int(const char* key, std::string_view s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto t = trim(item);
      if (!t.empty()) out.emplace_back(t);
    }
    return out;
  }

  std::map<std::string, std::string> raw_;
};

}  // namespace

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& spec : kSchema) out.emplace_back(spec.name);
  return out;
}

std::map<std::string, std::string> read_ini(std::string_view text, std::string_view source) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw_line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    auto line = trim(raw_line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
    const auto full = section + "." + std::string(key);
    if (!out.emplace(full, std::string(value)).second) {
      throw ConfigError(where + ": duplicate key " + full);
    }
  }
  return out;
}

ExperimentConfig parse_config_text(std::string_view text, std::span<const std::string> overrides,
                                   std::string_view source) {
  auto raw = read_ini(text, source);
  for (const auto& item : overrides) {
    auto body = std::string_view(item);
    if (body.starts_with("--")) body.remove_prefix(2);
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("override '" + item + "' must look like section.key=value");
    }
    raw[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
  }

  for (const auto& [key, value] : raw) {
    if (!find_spec(key)) throw ConfigError("unknown key: " + key);
  }
  std::string missing;
  for (const auto& spec : kSchema) {
    if (raw.count(spec.name)) continue;
    if (spec.fallback) {
      raw.emplace(spec.name, spec.fallback);
    } else {
      missing += missing.empty() ? "" : ", ";
      missing += spec.name;
    }
  }
  if (!missing.empty()) throw ConfigError("missing required keys: " + missing);

  const Values values(std::move(raw));
  try {
    RawSystemParams sys;
    sys.length_m = values.real("system.length_m");
    sys.speed_mps = values.real("system.speed_mps");
    sys.arrival_rate = values.real("system.arrival_rate_per_s");
    sys.tau_down = values.real("system.tau_down_s");
    sys.tau_up = values.real("system.tau_up_s");
    sys.alpha = values.real("system.alpha_s");
    sys.beta = values.real("system.beta_s");

    mc::SimConfig sim;
    sim.seed = values.integer<std::uint64_t>("sim.seed");
    sim.num_rounds = values.integer<long>("sim.num_rounds");
    sim.warmup_rounds = values.integer<long>("sim.warmup_rounds");
    sim.validate();

    SweepSpec sweep;
    sweep.h_list = values.int_list("sweep.h_list");
    sweep.t_start = values.real("sweep.t_start_s");
    sweep.t_stop = values.real("sweep.t_stop_s");
    sweep.t_step = values.real("sweep.t_step_s");

    fl::FLConfig fl;
    fl.learning_rate = values.real("fl.eta");
    fl.batch_size = values.integer<int>("fl.batch_size");
    fl.samples_per_vehicle = values.integer<int>("fl.samples_per_vehicle");
    fl.feature_dim = values.integer<int>("fl.feature_dim");
    fl.global_pool_size = values.integer<int>("fl.global_pool_size");
    fl.validation_size = values.integer<int>("fl.validation_size");
    fl.horizon = values.real("fl.horizon_s");
    fl.seed = values.integer<std::uint64_t>("fl.seed");
    fl.noise_std = values.real("fl.noise_std");
    fl.feature_decay = values.real("fl.feature_decay");
    fl.validate();

    ExperimentConfig cfg{
        .system = validate_params(sys),
        .optimizer = optimizer::OptimizerConfig(values.real("optimizer.gamma_s"),
                                                values.real("optimizer.grid_step_s")),
        .sim = sim,
        .validate_schedule = Schedule(values.integer<int>("sim.h"), values.real("sim.t_s")),
        .sweep = sweep,
        .fl = fl,
        .fl_grid_h = values.int_list("fl.grid_h"),
        .fl_grid_t_factors = values.real_list("fl.grid_t_factors"),
        .output_dir = values.text("output.dir"),
    };
    return cfg;
  } catch (const ValidationError& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), overrides, path.string());
}

}  // namespace mobfl::config
