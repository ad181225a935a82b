#include "pulsecmp/config.hpp"

#include "pulsecmp/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace pulsecmp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::kConfigError, "config key '" + key + "': '" + value + "' is not " + expected);
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if (first != last && *first == '+') ++first;
  if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (value.empty() || ec != std::errc{} || ptr != last || std::isnan(v)) bad_value(key, value, "a number");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value, "a non-negative integer");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "a boolean");
}

struct Entry {
  std::string key;
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <typename F>
Entry real_entry(std::string key, F field) {
  return {std::move(key),
          [field](Config& c, const std::string& k, const std::string& v) { field(c) = to_double(k, v); },
          [field](const Config& c) { return format_double(field(c)); }};
}

template <typename F>
Entry size_entry(std::string key, F field) {
  return {std::move(key),
          [field](Config& c, const std::string& k, const std::string& v) {
            field(c) = static_cast<std::size_t>(to_u64(k, v));
          },
          [field](const Config& c) { return std::to_string(field(c)); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"filter.order",
                 [](Config& c, const std::string& k, const std::string& v) {
                   const auto n = to_u64(k, v);
                   if (n > 64) bad_value(k, v, "an order in 1..64");
                   c.filter.order = static_cast<int>(n);
                 },
                 [](const Config& c) { return std::to_string(c.filter.order); }});
    t.push_back(real_entry("filter.low_hz", [](auto& c) -> auto& { return c.filter.low_cut_hz; }));
    t.push_back(real_entry("filter.high_hz", [](auto& c) -> auto& { return c.filter.high_cut_hz; }));
    t.push_back(real_entry("beats.min_separation_s", [](auto& c) -> auto& { return c.peaks.min_separation_s; }));
    t.push_back(real_entry("beats.prominence_rel", [](auto& c) -> auto& { return c.peaks.prominence_rel; }));
    t.push_back(real_entry("beats.window_s", [](auto& c) -> auto& { return c.peaks.window_s; }));
    t.push_back(size_entry("beats.norm_len", [](auto& c) -> auto& { return c.norm_len; }));
    t.push_back(real_entry("align.max_lag_s", [](auto& c) -> auto& { return c.align.max_lag_s; }));
    t.push_back(real_entry("align.pair_tol_s", [](auto& c) -> auto& { return c.align.pair_tol_s; }));
    t.push_back(size_entry("radar.max_range_bins", [](auto& c) -> auto& { return c.max_range_bins; }));

    t.push_back(real_entry("synth.duration_s", [](auto& c) -> auto& { return c.synth.duration_s; }));
    t.push_back(real_entry("synth.fs_hz", [](auto& c) -> auto& { return c.synth.fs_hz; }));
    t.push_back(real_entry("synth.snr_db", [](auto& c) -> auto& { return c.synth.snr_db; }));
    t.push_back({"synth.seed",
                 [](Config& c, const std::string& k, const std::string& v) { c.synth.seed = to_u64(k, v); },
                 [](const Config& c) { return std::to_string(c.synth.seed); }});
    t.push_back(real_entry("synth.hr_mean_bpm", [](auto& c) -> auto& { return c.synth.model.hr_mean_bpm; }));
    t.push_back(real_entry("synth.ibi_sd_ms", [](auto& c) -> auto& { return c.synth.model.ibi_sd_ms; }));
    const char* names[3] = {"systolic", "augmentation", "dicrotic"};
    for (int k = 0; k < 3; ++k) {
      const std::string n = names[k];
      t.push_back(real_entry("synth." + n + "_amp", [k](auto& c) -> auto& { return c.synth.model.amps[k]; }));
      t.push_back(real_entry("synth." + n + "_center", [k](auto& c) -> auto& { return c.synth.model.centers[k]; }));
      t.push_back(real_entry("synth." + n + "_width", [k](auto& c) -> auto& { return c.synth.model.widths[k]; }));
    }
    t.push_back(real_entry("synth.runoff_amp", [](auto& c) -> auto& { return c.synth.model.runoff_amp; }));
    t.push_back(real_entry("synth.runoff_exp", [](auto& c) -> auto& { return c.synth.model.runoff_exp; }));
    t.push_back(real_entry("synth.displacement_amp_m", [](auto& c) -> auto& { return c.synth.model.displacement_amp_m; }));
    t.push_back(size_entry("synth.antennas", [](auto& c) -> auto& { return c.synth.geometry.antennas; }));
    t.push_back(size_entry("synth.chirps", [](auto& c) -> auto& { return c.synth.geometry.chirps; }));
    t.push_back(size_entry("synth.samples", [](auto& c) -> auto& { return c.synth.geometry.samples; }));
    t.push_back(size_entry("synth.target_antenna", [](auto& c) -> auto& { return c.synth.geometry.target_antenna; }));
    t.push_back(size_entry("synth.target_bin", [](auto& c) -> auto& { return c.synth.geometry.target_bin; }));
    t.push_back(real_entry("synth.fast_time_rate_hz", [](auto& c) -> auto& { return c.synth.geometry.fast_time_rate_hz; }));
    t.push_back(real_entry("synth.carrier_hz", [](auto& c) -> auto& { return c.synth.geometry.carrier_hz; }));
    t.push_back(real_entry("synth.range_offset_m", [](auto& c) -> auto& { return c.synth.geometry.range_offset_m; }));
    t.push_back(real_entry("synth.ppg_tau_s", [](auto& c) -> auto& { return c.synth.ppg.decay_tau_s; }));
    t.push_back(real_entry("synth.ppg_gain", [](auto& c) -> auto& { return c.synth.ppg.gain_counts; }));
    t.push_back(real_entry("synth.ppg_dc", [](auto& c) -> auto& { return c.synth.ppg.dc_offset; }));
    t.push_back(real_entry("synth.ppg_drift_amp", [](auto& c) -> auto& { return c.synth.ppg.drift_amp; }));
    t.push_back(real_entry("synth.ppg_drift_hz", [](auto& c) -> auto& { return c.synth.ppg.drift_hz; }));
    t.push_back(real_entry("synth.ppg_noise_sd", [](auto& c) -> auto& { return c.synth.ppg.noise_sd; }));
    t.push_back({"synth.ppg_inverted",
                 [](Config& c, const std::string& k, const std::string& v) { c.synth.ppg.inverted = to_bool(k, v); },
                 [](const Config& c) { return std::string(c.synth.ppg.inverted ? "true" : "false"); }});
    t.push_back(real_entry("synth.sbp", [](auto& c) -> auto& { return c.synth.sbp; }));
    t.push_back(real_entry("synth.dbp", [](auto& c) -> auto& { return c.synth.dbp; }));
    return t;
  }();
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : entries()) {
    if (e.key == key) return e;
  }
  throw Error(ErrorCode::kConfigError, "unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : entries()) keys.push_back(e.key);
  return keys;
}

void set_config_value(Config& config, const std::string& key, const std::string& value) {
  find_entry(key).set(config, key, trim(value));
}

std::string get_config_value(const Config& config, const std::string& key) {
  return find_entry(key).get(config);
}

void apply_config_text(Config& config, const std::string& text, const std::string& origin) {
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigError, origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(Config& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str(), path.string());
}

void apply_override(Config& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "override '" + assignment + "' is not key=value");
  }
  set_config_value(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::filesystem::path default_config_path() {
  const char* env = std::getenv("PULSECMP_CONFIG");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path();
}

void validate(const Config& config) {
  try {
    validate_bandpass(config.filter, kDefaultSampleRateHz);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfigError, std::string("invalid config: ") + what);
  };
  require(config.peaks.min_separation_s > 0.0, "beats.min_separation_s must be > 0");
  require(config.peaks.prominence_rel >= 0.0, "beats.prominence_rel must be >= 0");
  require(config.peaks.window_s > 0.0, "beats.window_s must be > 0");
  require(config.norm_len >= 7, "beats.norm_len must be >= 7");
  require(config.align.max_lag_s >= 0.0, "align.max_lag_s must be >= 0");
  require(config.align.pair_tol_s > 0.0, "align.pair_tol_s must be > 0");
}

Json config_to_json(const Config& config) {
  Json j = Json::object();
  for (const Entry& e : entries()) j[e.key] = e.get(config);
  return j;
}

}  // namespace pulsecmp
