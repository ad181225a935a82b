#include "pulsecmp/io.hpp"

#include "pulsecmp/error.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

namespace pulsecmp {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "RADC I/O assumes a little-endian host");

namespace {

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  const fs::path tmp = path.parent_path() /
                       ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIoError, "write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename into " + path.string());
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::kTruncatedPayload, "truncated payload: header of " + path.string());
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffULL) {
    throw Error(ErrorCode::kDimensionOverflow, std::string("dimension overflow: ") + what);
  }
  return static_cast<std::uint32_t>(v);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view field, const fs::path& path, std::size_t line) {
  const std::string t = trim(field);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) +
                                            ": not a number: '" + t + "'");
  }
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump_value(const Json& j, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::null:
    case Json::value_t::discarded:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      break;
    }
    case Json::value_t::string:
    case Json::value_t::binary:
      out += j.dump();
      break;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const Json& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_value(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_value(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      break;
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  write_atomic(path, [&](std::ostream& out) { out.write(content.data(), static_cast<std::streamsize>(content.size())); });
}

void write_radar_cube(const fs::path& path, const RadarCube& cube) {
  validate(cube);
  std::string meta;
  for (const auto& [k, v] : cube.metadata) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "metadata key/value not representable: '" + k + "'");
    }
    meta += k + "=" + v + "\n";
  }
  const std::uint32_t frames = checked_u32(cube.frames, "frames");
  const std::uint32_t antennas = checked_u32(cube.antennas, "antennas");
  const std::uint32_t chirps = checked_u32(cube.chirps, "chirps");
  const std::uint32_t samples = checked_u32(cube.samples, "samples");
  const std::uint32_t meta_len = checked_u32(meta.size(), "metadata length");
  write_atomic(path, [&](std::ostream& out) {
    out.write("RADC", 4);
    put(out, kRadcVersion);
    put(out, frames);
    put(out, antennas);
    put(out, chirps);
    put(out, samples);
    put(out, cube.frame_rate_hz);
    put(out, cube.fast_time_rate_hz);
    put(out, cube.carrier_hz);
    put(out, meta_len);
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    std::vector<float> chunk;
    constexpr std::size_t kChunk = 1 << 16;
    for (std::size_t i = 0; i < cube.data.size(); i += kChunk) {
      const std::size_t n = std::min(kChunk, cube.data.size() - i);
      chunk.resize(n);
      for (std::size_t k = 0; k < n; ++k) chunk[k] = static_cast<float>(cube.data[i + k]);
      out.write(reinterpret_cast<const char*>(chunk.data()), static_cast<std::streamsize>(n * sizeof(float)));
    }
  });
}

RadarCube read_radar_cube(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::error_code ec;
  const std::uint64_t file_size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot stat " + path.string());

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RADC", 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "bad magic: " + path.string() + " is not a RADC file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kRadcVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported RADC version " + std::to_string(version));
  }
  RadarCube cube;
  cube.frames = get<std::uint32_t>(in, path);
  cube.antennas = get<std::uint32_t>(in, path);
  cube.chirps = get<std::uint32_t>(in, path);
  cube.samples = get<std::uint32_t>(in, path);
  cube.frame_rate_hz = get<double>(in, path);
  cube.fast_time_rate_hz = get<double>(in, path);
  cube.carrier_hz = get<double>(in, path);
  const auto meta_len = get<std::uint32_t>(in, path);

  // Four u32 dimensions cannot overflow 128 bits; check the product in steps.
  std::uint64_t elements = 1;
  for (std::uint64_t d : {cube.frames, cube.antennas, cube.chirps, cube.samples}) {
    if (d != 0 && elements > kMaxRadcElements / d) {
      throw Error(ErrorCode::kDimensionOverflow, "dimension overflow: declared cube exceeds 2^34 samples");
    }
    elements *= d;
  }
  const std::uint64_t header = 4 + 4 * 5 + 8 * 3 + 4;
  if (file_size < header + meta_len) {
    throw Error(ErrorCode::kTruncatedPayload, "truncated payload: metadata cut short in " + path.string());
  }
  std::string meta(meta_len, '\0');
  in.read(meta.data(), meta_len);
  std::istringstream lines(meta);
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, "malformed metadata line '" + line + "'");
    }
    cube.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }

  const std::uint64_t expected = header + meta_len + elements * sizeof(float);
  if (file_size < expected) {
    throw Error(ErrorCode::kTruncatedPayload,
                "truncated payload: expected " + std::to_string(elements) + " samples, found " +
                    std::to_string((file_size - header - meta_len) / sizeof(float)));
  }
  if (file_size > expected) {
    throw Error(ErrorCode::kTrailingData, "trailing data: " + std::to_string(file_size - expected) +
                                              " bytes after the payload");
  }
  cube.data.resize(elements);
  std::vector<float> chunk;
  constexpr std::size_t kChunk = 1 << 16;
  for (std::size_t i = 0; i < elements; i += kChunk) {
    const std::size_t n = std::min<std::size_t>(kChunk, elements - i);
    chunk.resize(n);
    in.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw Error(ErrorCode::kTruncatedPayload, "truncated payload in " + path.string());
    std::copy(chunk.begin(), chunk.end(), cube.data.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return cube;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    std::string available;
    for (const auto& c : columns) available += (available.empty() ? "" : ", ") + c;
    throw Error(ErrorCode::kMissingColumn,
                "missing column '" + name + "'; available columns: " + available);
  }
  return static_cast<std::size_t>(it - columns.begin());
}

CsvTable read_csv(const fs::path& path) {
  const std::string text = read_text(path);
  CsvTable table;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string_view> fields;
    std::string_view rest(s);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return fields;
  };
  while (std::getline(lines, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (table.columns.empty()) {
      for (auto f : fields) table.columns.push_back(trim(f));
      table.values.resize(table.columns.size());
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(table.columns.size()) + " fields, got " +
                                              std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      table.values[c].push_back(parse_double(fields[c], path, line_no));
    }
  }
  if (table.columns.empty()) throw Error(ErrorCode::kParseError, path.string() + ": missing header row");
  return table;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  if (table.values.size() != table.columns.size()) {
    throw Error(ErrorCode::kInvalidArgument, "csv table has mismatched columns");
  }
  for (const auto& col : table.values) {
    if (col.size() != table.rows()) throw Error(ErrorCode::kInvalidArgument, "csv columns differ in length");
  }
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(table.values[c][r]);
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

double sample_rate_from_times(std::span<const double> times) {
  if (times.size() < 2) throw Error(ErrorCode::kInputTooShort, "need at least 2 samples to infer a rate");
  std::vector<double> steps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    steps[i - 1] = times[i] - times[i - 1];
    if (!(steps[i - 1] > 0.0)) {
      throw Error(ErrorCode::kNonMonotonic,
                  "non-monotonic time column at row " + std::to_string(i + 1));
    }
  }
  std::vector<double> sorted = steps;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (sorted.size() % 2 == 0) median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
  for (double s : steps) {
    if (std::abs(s - median) > 0.01 * median) {
      throw Error(ErrorCode::kNonUniformSampling, "non-uniform sampling: step " + format_double(s) +
                                                      " s vs median " + format_double(median) + " s");
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", 1.0 / median);
  return std::strtod(buf, nullptr);
}

TimeSeries read_series_csv(const fs::path& path, const std::string& column) {
  const CsvTable table = read_csv(path);
  const auto& times = table.values[table.column_index("time_s")];
  const auto& values = table.values[table.column_index(column)];
  TimeSeries ts;
  ts.sample_rate_hz = sample_rate_from_times(times);
  ts.start_time_s = times.front();
  ts.samples = values;
  return ts;
}

void write_series_csv(const fs::path& path,
                      const std::vector<std::pair<std::string, const TimeSeries*>>& columns) {
  if (columns.empty()) throw Error(ErrorCode::kInvalidArgument, "no columns to write");
  const TimeSeries& first = *columns.front().second;
  CsvTable table;
  table.columns.push_back("time_s");
  std::vector<double> times(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) times[i] = first.time_at(i);
  table.values.push_back(std::move(times));
  for (const auto& [name, series] : columns) {
    if (series->size() != first.size() || series->sample_rate_hz != first.sample_rate_hz) {
      throw Error(ErrorCode::kInvalidArgument, "column '" + name + "' does not share the time base");
    }
    table.columns.push_back(name);
    table.values.push_back(series->samples);
  }
  write_csv(path, table);
}

PpgRecording read_ppg_csv(const fs::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t t_col = table.column_index("time_s");
  const double rate = sample_rate_from_times(table.values[t_col]);
  PpgRecording rec;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c == t_col) continue;
    TimeSeries ts;
    ts.sample_rate_hz = rate;
    ts.start_time_s = table.values[t_col].front();
    ts.samples = table.values[c];
    rec.channels[table.columns[c]] = std::move(ts);
  }
  if (rec.channels.empty()) throw Error(ErrorCode::kMissingChannel, "no PPG channels in " + path.string());
  return rec;
}

void write_ppg_csv(const fs::path& path, const PpgRecording& rec) {
  std::vector<std::pair<std::string, const TimeSeries*>> cols;
  for (const auto& [name, ts] : rec.channels) cols.emplace_back(name, &ts);
  write_series_csv(path, cols);
}

Json truth_to_json(const SynthGroundTruth& t) {
  Json j;
  j["seed"] = t.seed;
  j["target_antenna"] = t.target_antenna;
  j["target_range_bin"] = t.target_range_bin;
  j["beat_times_s"] = t.beat_times_s;
  j["ibi_ms"] = t.ibi_ms();
  const PulseModel& m = t.model;
  j["model"] = {
      {"hr_mean_bpm", m.hr_mean_bpm}, {"ibi_sd_ms", m.ibi_sd_ms},
      {"amps", m.amps},               {"centers", m.centers},
      {"widths", m.widths},           {"runoff_amp", m.runoff_amp},
      {"runoff_exp", m.runoff_exp},
      {"displacement_amp_m", m.displacement_amp_m},
  };
  j["displacement"] = {
      {"unit", "m"},
      {"sample_rate_hz", t.displacement.sample_rate_hz},
      {"start_time_s", t.displacement.start_time_s},
      {"samples", t.displacement.samples},
  };
  return j;
}

SynthGroundTruth truth_from_json(const Json& j) {
  try {
    SynthGroundTruth t;
    t.seed = j.at("seed").get<std::uint64_t>();
    t.target_antenna = j.at("target_antenna").get<std::size_t>();
    t.target_range_bin = j.at("target_range_bin").get<std::size_t>();
    t.beat_times_s = j.at("beat_times_s").get<std::vector<double>>();
    const Json& m = j.at("model");
    t.model.hr_mean_bpm = m.at("hr_mean_bpm").get<double>();
    t.model.ibi_sd_ms = m.at("ibi_sd_ms").get<double>();
    t.model.amps = m.at("amps").get<std::array<double, 3>>();
    t.model.centers = m.at("centers").get<std::array<double, 3>>();
    t.model.widths = m.at("widths").get<std::array<double, 3>>();
    t.model.runoff_amp = m.at("runoff_amp").get<double>();
    t.model.runoff_exp = m.at("runoff_exp").get<double>();
    t.model.displacement_amp_m = m.at("displacement_amp_m").get<double>();
    const Json& d = j.at("displacement");
    t.displacement.sample_rate_hz = d.at("sample_rate_hz").get<double>();
    t.displacement.start_time_s = d.at("start_time_s").get<double>();
    t.displacement.samples = d.at("samples").get<std::vector<double>>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed truth JSON: ") + e.what());
  }
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_value(j, indent, 0, out);
  out += '\n';
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  write_text_atomic(path, dump_json(j));
}

}  // namespace pulsecmp
