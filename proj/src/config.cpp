#include "d2d/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace d2d {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw std::invalid_argument("config key '" + key + "': expected true or false, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[k]);
    else
      s += std::to_string(v[k]);
  }
  return s;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define D2D_STRING(name) \
  Field { #name, [](const ExperimentConfig& c) { return c.name; }, [](ExperimentConfig& c, const std::string& v) { c.name = v; } }
#define D2D_DOUBLE(name)                                                   \
  Field {                                                                  \
    #name, [](const ExperimentConfig& c) { return fmt(c.name); },         \
        [](ExperimentConfig& c, const std::string& v) { c.name = parse_number<double>(#name, v); } \
  }
#define D2D_INT(name, type)                                                       \
  Field {                                                                         \
    #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },     \
        [](ExperimentConfig& c, const std::string& v) { c.name = parse_number<type>(#name, v); } \
  }
#define D2D_BOOL(name)                                                                  \
  Field {                                                                               \
    #name, [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& v) { c.name = parse_bool(#name, v); }   \
  }
#define D2D_LIST(name, type)                                                       \
  Field {                                                                          \
    #name, [](const ExperimentConfig& c) { return join(c.name); },                \
        [](ExperimentConfig& c, const std::string& v) { c.name = parse_list<type>(#name, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      D2D_STRING(scenario),
      D2D_STRING(topology_file),
      Field{"topology_seed",
            [](const ExperimentConfig& c) { return c.topology_seed ? std::to_string(*c.topology_seed) : "none"; },
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "none")
                c.topology_seed.reset();
              else
                c.topology_seed = parse_number<std::uint64_t>("topology_seed", v);
            }},
      D2D_INT(num_uec, int),
      D2D_INT(num_ued, int),
      D2D_INT(num_channels, int),
      D2D_DOUBLE(cell_radius_m),
      D2D_DOUBLE(d2d_radius_m),
      D2D_DOUBLE(bandwidth_hz),
      D2D_DOUBLE(ue_power_dbm),
      D2D_DOUBLE(bs_power_dbm),
      D2D_DOUBLE(noise_psd_dbm_hz),
      D2D_DOUBLE(pathloss_exponent),
      D2D_DOUBLE(reference_distance_m),
      D2D_DOUBLE(shadowing_sigma_db),
      D2D_DOUBLE(sinr_min_db),
      D2D_DOUBLE(sinr_max_db),
      D2D_BOOL(split_bs_power),
      D2D_STRING(utility_mode),
      D2D_STRING(algorithm),
      D2D_STRING(schedule),
      D2D_DOUBLE(tau),
      D2D_STRING(noise),
      D2D_DOUBLE(noise_width),
      D2D_DOUBLE(noise_sigma),
      D2D_DOUBLE(noise_theta_max),
      D2D_DOUBLE(xi),
      D2D_INT(br_samples, std::uint64_t),
      D2D_INT(sample_cap, std::uint64_t),
      D2D_INT(horizon_slots, std::uint64_t),
      D2D_INT(realizations, std::uint64_t),
      D2D_INT(seed, std::uint64_t),
      D2D_INT(potential_mc, std::uint64_t),
      D2D_DOUBLE(final_window_fraction),
      D2D_BOOL(track_optimum),
      D2D_BOOL(write_trajectories),
      D2D_LIST(channel_counts, int),
      D2D_LIST(ued_counts, int),
      D2D_LIST(tau_grid, double),
      D2D_STRING(out_dir),
  };
  return f;
}

#undef D2D_STRING
#undef D2D_DOUBLE
#undef D2D_INT
#undef D2D_BOOL
#undef D2D_LIST

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string("config key '") + key + "': " + what);
}

}  // namespace

RadioParams ExperimentConfig::radio_params() const {
  RadioParams p;
  p.cell_radius_m = cell_radius_m;
  p.d2d_radius_m = d2d_radius_m;
  p.num_channels = num_channels;
  p.bandwidth_hz = bandwidth_hz;
  p.tx_power_ue_w = dbm_to_watt(ue_power_dbm);
  p.tx_power_bs_w = dbm_to_watt(bs_power_dbm);
  p.noise_power_w = thermal_noise_w(noise_psd_dbm_hz, bandwidth_hz);
  p.pathloss_exponent = pathloss_exponent;
  p.reference_distance_m = reference_distance_m;
  p.shadowing_sigma_db = shadowing_sigma_db;
  p.sinr_min_db = sinr_min_db;
  p.sinr_max_db = sinr_max_db;
  p.split_bs_power = split_bs_power;
  return p;
}

UtilityMode ExperimentConfig::mode() const {
  return utility_mode == "deterministic" ? UtilityMode::deterministic : UtilityMode::noisy;
}

TemperatureSchedule ExperimentConfig::temperature() const {
  return schedule == "log" ? TemperatureSchedule::log_decreasing(tau) : TemperatureSchedule::fixed(tau);
}

NoiseSpec ExperimentConfig::noise_spec() const {
  if (noise == "gaussian") return gaussian_noise(noise_sigma, noise_theta_max);
  return BoundedNoise{noise_width};
}

void ExperimentConfig::validate() const {
  require(scenario == "random" || scenario == "desk" || scenario == "symmetric-pair" || scenario == "file",
          "scenario", "expected random, desk, symmetric-pair or file");
  require(scenario != "file" || !topology_file.empty(), "topology_file", "required when scenario = file");
  require(num_uec >= 0, "num_uec", "must be >= 0");
  require(num_ued >= 0, "num_ued", "must be >= 0");
  require(num_channels >= 1, "num_channels", "must be >= 1");
  require(num_uec <= num_channels, "num_uec", "cannot exceed num_channels");
  require(utility_mode == "noisy" || utility_mode == "deterministic", "utility_mode", "expected noisy or deterministic");
  require(algorithm == "blla" || algorithm == "br", "algorithm", "expected blla or br");
  require(schedule == "fixed" || schedule == "log", "schedule", "expected fixed or log");
  require(tau > 0.0 && std::isfinite(tau), "tau", "must be positive");
  require(noise == "bounded" || noise == "gaussian", "noise", "expected bounded or gaussian");
  require(noise_width > 0.0, "noise_width", "must be positive");
  require(noise_sigma > 0.0, "noise_sigma", "must be positive");
  require(noise_theta_max > 0.0 && std::isfinite(noise_theta_max), "noise_theta_max", "must be positive");
  require(xi > 0.0 && xi < 1.0, "xi", "must lie in (0, 1)");
  require(br_samples >= 1, "br_samples", "must be >= 1");
  require(realizations >= 1, "realizations", "must be >= 1");
  require(potential_mc >= 1, "potential_mc", "must be >= 1");
  require(final_window_fraction > 0.0 && final_window_fraction <= 1.0, "final_window_fraction", "must lie in (0, 1]");
  for (int c : channel_counts) require(c >= std::max(num_uec, 1), "channel_counts", "every count must be >= num_uec");
  for (int u : ued_counts) require(u >= 0, "ued_counts", "counts must be >= 0");
  for (double t : tau_grid) require(t > 0.0, "tau_grid", "temperatures must be positive");
  for (std::size_t k = 1; k < tau_grid.size(); ++k)
    require(tau_grid[k] < tau_grid[k - 1], "tau_grid", "must be strictly decreasing");
  radio_params().validate();
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known = false;
    for (const Field& f : fields())
      if (key == f.key) {
        f.set(base, value);
        known = true;
        break;
      }
    if (!known) throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.out_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> preset_names() {
  return {"table1", "desk", "desk-decreasing", "desk-br", "desk-sweep", "symmetric"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "table1") {
    c.num_uec = 5;
    c.num_ued = 15;
    c.num_channels = 5;
    c.channel_counts = {5, 6, 7, 8, 9, 10};
    c.ued_counts = {5, 10, 15, 20, 30, 40};
    c.realizations = 1000;
    return c;
  }
  if (name == "desk" || name == "desk-decreasing" || name == "desk-br") {
    c.scenario = "desk";
    c.num_uec = 1;
    c.num_ued = 4;
    c.num_channels = 3;
    c.shadowing_sigma_db = 0.0;
    c.tau = 0.05;
    c.track_optimum = true;
    if (name == "desk-decreasing") {
      c.schedule = "log";
      c.tau = 0.1;
    }
    if (name == "desk-br") c.algorithm = "br";
    return c;
  }
  if (name == "desk-sweep") {
    c.num_uec = 1;
    c.num_ued = 8;
    c.num_channels = 4;
    c.channel_counts = {2, 3, 4};
    c.ued_counts = {2, 4, 8};
    return c;
  }
  if (name == "symmetric") {
    c.scenario = "symmetric-pair";
    c.num_uec = 0;
    c.num_ued = 2;
    c.num_channels = 2;
    c.shadowing_sigma_db = 0.0;
    c.utility_mode = "deterministic";
    c.realizations = 1;
    return c;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace d2d
