// RADC, CSV and JSON file formats.
#include "doctest.h"
#include "helpers.hpp"

#include "pulsecmp/error.hpp"
#include "pulsecmp/io.hpp"
#include "pulsecmp/synth.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace pulsecmp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pulsecmp_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

// Hand-built RADC header with no metadata.
std::string radc_header(std::uint32_t f, std::uint32_t a, std::uint32_t c, std::uint32_t s,
                        const char* magic = "RADC", std::uint32_t version = 1) {
  std::string out(magic, 4);
  put(out, version);
  put(out, f);
  put(out, a);
  put(out, c);
  put(out, s);
  put(out, 200.0);
  put(out, 2e6);
  put(out, 60e9);
  put(out, std::uint32_t{0});
  return out;
}

std::string with_floats(std::string bytes, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put(bytes, static_cast<float>(i) * 0.5f);
  return bytes;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RadarCube small_cube(std::mt19937_64& rng) {
  RadarCube c;
  c.frames = 7;
  c.antennas = 3;
  c.chirps = 2;
  c.samples = 8;
  c.frame_rate_hz = 250.0;
  c.fast_time_rate_hz = 1.5e6;
  c.carrier_hz = 77e9;
  c.metadata = {{"subject", "s01"}, {"note", "a b=c"}};
  for (double v : testutil::random_vector(rng, 7 * 3 * 2 * 8, -100.0, 100.0)) {
    c.data.push_back(static_cast<double>(static_cast<float>(v)));
  }
  return c;
}

}  // namespace

TEST_CASE("RADC: round trip") {
  TempDir dir;
  std::mt19937_64 rng(1);
  const RadarCube c = small_cube(rng);
  write_radar_cube(dir / "c.radc", c);
  CHECK(fs::file_size(dir / "c.radc") == 52 + 23 + 7 * 3 * 2 * 8 * 4);
  const RadarCube r = read_radar_cube(dir / "c.radc");
  CHECK(r.frames == 7);
  CHECK(r.antennas == 3);
  CHECK(r.chirps == 2);
  CHECK(r.samples == 8);
  CHECK(r.frame_rate_hz == 250.0);
  CHECK(r.fast_time_rate_hz == 1.5e6);
  CHECK(r.carrier_hz == 77e9);
  CHECK(r.metadata == c.metadata);
  CHECK(r.data == c.data);
}

TEST_CASE("RADC: hand-built file is readable") {
  TempDir dir;
  write_bytes(dir / "h.radc", with_floats(radc_header(2, 2, 2, 2), 16));
  const RadarCube r = read_radar_cube(dir / "h.radc");
  REQUIRE(r.data.size() == 16);
  CHECK(r.data[3] == 1.5);
  CHECK(r.chirp(1, 1, 1)[1] == 7.5);
}

TEST_CASE("RADC: malformed files") {
  TempDir dir;
  write_bytes(dir / "magic.radc", with_floats(radc_header(2, 2, 2, 2, "XXXX"), 16));
  CHECK(code_of([&] { read_radar_cube(dir / "magic.radc"); }) == ErrorCode::kBadMagic);

  write_bytes(dir / "version.radc", with_floats(radc_header(2, 2, 2, 2, "RADC", 9), 16));
  CHECK(code_of([&] { read_radar_cube(dir / "version.radc"); }) == ErrorCode::kUnsupportedVersion);

  write_bytes(dir / "short.radc", with_floats(radc_header(2, 2, 2, 2), 15));
  CHECK(code_of([&] { read_radar_cube(dir / "short.radc"); }) == ErrorCode::kTruncatedPayload);

  write_bytes(dir / "long.radc", with_floats(radc_header(2, 2, 2, 2), 16) + "x");
  CHECK(code_of([&] { read_radar_cube(dir / "long.radc"); }) == ErrorCode::kTrailingData);

  write_bytes(dir / "huge.radc", radc_header(1u << 20, 8, 1u << 10, 1u << 10));
  CHECK(code_of([&] { read_radar_cube(dir / "huge.radc"); }) == ErrorCode::kDimensionOverflow);

  write_bytes(dir / "stub.radc", std::string("RAD"));
  CHECK(code_of([&] { read_radar_cube(dir / "stub.radc"); }) == ErrorCode::kBadMagic);

  CHECK(code_of([&] { read_radar_cube(dir / "missing.radc"); }) == ErrorCode::kIoError);
}

TEST_CASE("RADC: random cubes round trip") {
  TempDir dir;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    RadarCube c;
    c.frames = dim(rng);
    c.antennas = dim(rng);
    c.chirps = dim(rng);
    c.samples = dim(rng) + 1;
    for (double v : testutil::random_vector(rng, c.frames * c.antennas * c.chirps * c.samples, -1e3, 1e3)) {
      c.data.push_back(static_cast<double>(static_cast<float>(v)));
    }
    write_radar_cube(dir / "r.radc", c);
    const RadarCube r = read_radar_cube(dir / "r.radc");
    CHECK(r.data == c.data);
    CHECK(r.samples == c.samples);
  }
}

TEST_CASE("CSV: sample rate from the time column") {
  TempDir dir;
  write_bytes(dir / "a.csv", "time_s,pressure_mmHg\n0,80\n0.005,81\n0.010,82\n");
  const TimeSeries ts = read_series_csv(dir / "a.csv", "pressure_mmHg");
  CHECK(ts.sample_rate_hz == 200.0);
  CHECK(ts.samples == std::vector<double>{80, 81, 82});
}

TEST_CASE("CSV: non-monotonic and non-uniform time") {
  TempDir dir;
  write_bytes(dir / "b.csv", "time_s,v\n0,1\n0.005,2\n0.004,3\n");
  CHECK(code_of([&] { read_series_csv(dir / "b.csv", "v"); }) == ErrorCode::kNonMonotonic);
  write_bytes(dir / "c.csv", "time_s,v\n0,1\n0.005,2\n0.011,3\n");
  CHECK(code_of([&] { read_series_csv(dir / "c.csv", "v"); }) == ErrorCode::kNonUniformSampling);
}

TEST_CASE("CSV: missing column lists the available ones") {
  TempDir dir;
  write_bytes(dir / "d.csv", "time_s,alpha,beta\n0,1,2\n0.005,2,3\n");
  try {
    read_series_csv(dir / "d.csv", "gamma");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingColumn);
    const std::string msg = e.what();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("beta") != std::string::npos);
  }
}

TEST_CASE("CSV: malformed content") {
  TempDir dir;
  write_bytes(dir / "e.csv", "time_s,v\n0,1\n0.005,abc\n");
  CHECK(code_of([&] { read_csv(dir / "e.csv"); }) == ErrorCode::kParseError);
  write_bytes(dir / "f.csv", "time_s,v\n0,1\n0.005\n");
  CHECK(code_of([&] { read_csv(dir / "f.csv"); }) == ErrorCode::kParseError);
}

TEST_CASE("CSV: series and PPG round trips") {
  TempDir dir;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    TimeSeries a;
    a.sample_rate_hz = trial % 2 ? 200.0 : 125.0;
    a.start_time_s = 0.0;
    a.samples = testutil::random_vector(rng, 20 + trial, -1e4, 1e4);
    write_series_csv(dir / "s.csv", {{"value", &a}});
    const TimeSeries b = read_series_csv(dir / "s.csv", "value");
    CHECK(b.samples == a.samples);
    CHECK(b.sample_rate_hz == a.sample_rate_hz);
  }
  PpgRecording rec;
  rec.channels["green_0"].samples = testutil::random_vector(rng, 50, 9000, 11000);
  rec.channels["red_0"].samples = testutil::random_vector(rng, 50, 9000, 11000);
  write_ppg_csv(dir / "p.csv", rec);
  const PpgRecording back = read_ppg_csv(dir / "p.csv");
  CHECK(back.channels.size() == 2);
  CHECK(back.channels.at("green_0").samples == rec.channels.at("green_0").samples);
  CHECK(back.channels.at("red_0").samples == rec.channels.at("red_0").samples);
  CHECK(back.channels.at("red_0").sample_rate_hz == 200.0);
}

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> exp10(-300.0, 300.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = std::pow(10.0, exp10(rng)) * (trial % 2 ? 1.0 : -1.0);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("JSON: deterministic dump with null for non-finite values") {
  Json j;
  j["b"] = 1.0 / 3.0;
  j["a"] = std::numeric_limits<double>::quiet_NaN();
  j["list"] = {1, 2.5, -0.0};
  j["nested"] = {{"inf", std::numeric_limits<double>::infinity()}, {"s", "x\"y"}};
  const std::string s = dump_json(j);
  CHECK(s == dump_json(j));
  CHECK(s.find("\"b\"") < s.find("\"a\""));
  CHECK(s.find("0.33333333333333331") != std::string::npos);
  CHECK(s.find("\"a\": null") != std::string::npos);
  CHECK(s.find("\"inf\": null") != std::string::npos);
  const Json back = Json::parse(s);
  CHECK(back["b"].get<double>() == 1.0 / 3.0);
  CHECK(back["nested"]["s"] == "x\"y");
}

TEST_CASE("JSON: ground truth round trip") {
  TempDir dir;
  SimulationConfig cfg;
  cfg.duration_s = 10.0;
  cfg.seed = 123;
  const SyntheticRecording rec = simulate(cfg);
  write_json(dir / "truth.json", truth_to_json(rec.truth));
  const SynthGroundTruth t = truth_from_json(read_json(dir / "truth.json"));
  CHECK(t.beat_times_s == rec.truth.beat_times_s);
  CHECK(t.displacement.samples == rec.truth.displacement.samples);
  CHECK(t.displacement.sample_rate_hz == rec.truth.displacement.sample_rate_hz);
  CHECK(t.target_range_bin == rec.truth.target_range_bin);
  CHECK(t.target_antenna == rec.truth.target_antenna);
  CHECK(t.seed == 123);
  CHECK(t.model.runoff_exp == rec.truth.model.runoff_exp);
  CHECK(t.model.centers == rec.truth.model.centers);
  write_json(dir / "again.json", truth_to_json(t));
  CHECK(read_text(dir / "truth.json") == read_text(dir / "again.json"));
}

TEST_CASE("JSON: parse errors carry a code") {
  TempDir dir;
  write_bytes(dir / "bad.json", "{\"a\": [1, 2,");
  CHECK(code_of([&] { read_json(dir / "bad.json"); }) == ErrorCode::kParseError);
}

TEST_CASE("write_text_atomic leaves no temporary files") {
  TempDir dir;
  write_text_atomic(dir / "x.txt", "hello\n");
  write_text_atomic(dir / "x.txt", "world\n");
  CHECK(read_text(dir / "x.txt") == "world\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  CHECK(entries == 1);
}
