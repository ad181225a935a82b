#pragma once

#include "pulsecmp/beats.hpp"
#include "pulsecmp/io.hpp"
#include "pulsecmp/signal.hpp"
#include "pulsecmp/synth.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pulsecmp {

struct Config {
  BandpassSpec filter;
  PeakParams peaks;
  std::size_t norm_len = kDefaultBeatLength;
  AlignParams align;
  std::size_t max_range_bins = 0;
  SimulationConfig synth;
};

// All recognised keys, in echo order.
std::vector<std::string> config_keys();

// Throws Error(kConfigError) for unknown keys and unparsable values.
void set_config_value(Config& config, const std::string& key, const std::string& value);
std::string get_config_value(const Config& config, const std::string& key);

// "key = value" lines; '#' starts a comment.
void apply_config_text(Config& config, const std::string& text, const std::string& origin = "config");
void apply_config_file(Config& config, const std::filesystem::path& path);
// "key=value"
void apply_override(Config& config, const std::string& assignment);

// Path from PULSECMP_CONFIG, empty when unset.
std::filesystem::path default_config_path();

void validate(const Config& config);

Json config_to_json(const Config& config);

}  // namespace pulsecmp
