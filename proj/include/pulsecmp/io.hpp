#pragma once

#include "pulsecmp/beats.hpp"
#include "pulsecmp/ppg.hpp"
#include "pulsecmp/radar.hpp"
#include "pulsecmp/signal.hpp"
#include "pulsecmp/synth.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pulsecmp {

using Json = nlohmann::ordered_json;

inline constexpr std::uint32_t kRadcVersion = 1;
// Upper bound on frames * antennas * chirps * samples accepted from a file.
inline constexpr std::uint64_t kMaxRadcElements = std::uint64_t{1} << 34;

// Layout (little-endian): "RADC" | version u32 | frames u32 | antennas u32 |
// chirps u32 | samples u32 | frame_rate f64 | fast_time_rate f64 |
// carrier_hz f64 | metadata_len u32 | metadata (key=value lines) |
// payload f32 in [frame][antenna][chirp][sample] order.
// Samples are stored as float; doubles that are not float-representable are
// rounded on write.
void write_radar_cube(const std::filesystem::path& path, const RadarCube& cube);
RadarCube read_radar_cube(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // one vector per column

  std::size_t rows() const { return values.empty() ? 0 : values.front().size(); }
  std::size_t column_index(const std::string& name) const;  // throws kMissingColumn
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Sample rate from the time_s column: 1 / median step, rounded to 12
// significant digits. Steps must be positive and within 1% of the median.
double sample_rate_from_times(std::span<const double> times);

TimeSeries read_series_csv(const std::filesystem::path& path, const std::string& column);
void write_series_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, const TimeSeries*>>& columns);

// Every non-time column becomes a channel.
PpgRecording read_ppg_csv(const std::filesystem::path& path);
void write_ppg_csv(const std::filesystem::path& path, const PpgRecording& rec);

Json truth_to_json(const SynthGroundTruth& truth);
SynthGroundTruth truth_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);

// Deterministic text: fixed key order, floats with 17 significant digits,
// non-finite numbers as null.
std::string dump_json(const Json& j, int indent = 2);
void write_json(const std::filesystem::path& path, const Json& j);

// Writes to a sibling temporary file, then renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_double(double v);

}  // namespace pulsecmp
