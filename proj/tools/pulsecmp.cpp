#include "pulsecmp/acceptance.hpp"
#include "pulsecmp/compare.hpp"
#include "pulsecmp/config.hpp"
#include "pulsecmp/error.hpp"
#include "pulsecmp/io.hpp"
#include "pulsecmp/ppg.hpp"
#include "pulsecmp/radar.hpp"
#include "pulsecmp/synth.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace pulsecmp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "config file (default: $PULSECMP_CONFIG)");
  cmd->add_option("--set", opts.overrides, "override a config key, key=value (repeatable)");
}

Config load_config(const CommonOptions& opts) {
  Config config;
  const fs::path path = opts.config_path.empty() ? default_config_path() : fs::path(opts.config_path);
  if (!path.empty()) apply_config_file(config, path);
  for (const auto& o : opts.overrides) apply_override(config, o);
  validate(config);
  return config;
}

void write_process_outputs(const fs::path& out, const TimeSeries& waveform, const PeakParams& peaks) {
  fs::create_directories(out);
  write_series_csv(out / "waveform.csv", {{"waveform", &waveform}});
  const PeakTrain train = detect_peaks(waveform, peaks);
  CsvTable p;
  p.columns = {"time_s", "index", "is_systolic"};
  p.values.resize(3);
  std::vector<std::pair<std::size_t, bool>> events;
  for (std::size_t i : train.systolic_indices) events.emplace_back(i, true);
  for (std::size_t i : train.diastolic_indices) events.emplace_back(i, false);
  std::sort(events.begin(), events.end());
  for (const auto& [i, sys] : events) {
    p.values[0].push_back(waveform.time_at(i));
    p.values[1].push_back(static_cast<double>(i));
    p.values[2].push_back(sys ? 1.0 : 0.0);
  }
  write_csv(out / "peaks.csv", p);
  const IbiSeries ibi = extract_ibi(train);
  CsvTable t;
  t.columns = {"anchor_time_s", "ibi_ms"};
  t.values = {ibi.anchor_times_s, ibi.intervals_ms};
  write_csv(out / "ibi.csv", t);
  std::cout << "beats: " << train.systolic_indices.size() << ", intervals: " << ibi.size() << "\n";
}

fs::path resolve_input(const fs::path& in, const char* bundle_file) {
  return fs::is_directory(in) ? in / bundle_file : in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar, PPG and reference pulse waveform comparison"};
  app.require_subcommand(1);

  CommonOptions sim_common, proc_common, cmp_common;

  auto* sim = app.add_subcommand("simulate", "write a synthetic recording bundle");
  add_common(sim, sim_common);
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> sim_duration, sim_snr;
  sim->add_option("--out", sim_out, "bundle directory")->required();
  sim->add_option("--seed", sim_seed, "shortcut for --set synth.seed=N");
  sim->add_option("--duration", sim_duration, "shortcut for --set synth.duration_s=S");
  sim->add_option("--snr", sim_snr, "shortcut for --set synth.snr_db=DB");

  auto* proc = app.add_subcommand("process", "process one modality into waveform, peak and IBI CSVs");
  add_common(proc, proc_common);
  std::string modality, proc_in, proc_out, channel;
  proc->add_option("modality", modality, "radar | ppg | reference")
      ->required()
      ->check(CLI::IsMember({"radar", "ppg", "reference"}));
  proc->add_option("--in", proc_in, "input file or bundle directory")->required();
  proc->add_option("--out", proc_out, "output directory")->required();
  proc->add_option("--channel", channel, "PPG channel (default green_0)");

  auto* cmp = app.add_subcommand("compare", "compare modalities in one or more bundles");
  add_common(cmp, cmp_common);
  std::vector<std::string> bundles;
  std::string cmp_out, aggregate = "per-beat";
  unsigned jobs = 1;
  cmp->add_option("bundles", bundles, "bundle directories")->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--jobs", jobs, "parallel bundles")->check(CLI::Range(1u, 256u));
  cmp->add_option("--aggregate", aggregate, "per-beat | per-subject")
      ->check(CLI::IsMember({"per-beat", "per-subject"}));

  auto* self = app.add_subcommand("selftest", "run the oracle acceptance suite");
  std::vector<int> only;
  bool verbose = false;
  self->add_option("--only", only, "criterion ids to run")->delimiter(',');
  self->add_flag("-v,--verbose", verbose, "print every sub-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*sim) {
      Config config = load_config(sim_common);
      if (sim_seed) config.synth.seed = *sim_seed;
      if (sim_duration) config.synth.duration_s = *sim_duration;
      if (sim_snr) config.synth.snr_db = *sim_snr;
      RecordingBundle bundle = bundle_from_synthetic(simulate(config.synth), fs::path(sim_out).filename().string());
      save_bundle(sim_out, bundle);
      std::cout << "wrote " << sim_out << " (" << bundle.truth->beat_times_s.size() << " beats, seed "
                << config.synth.seed << ")\n";
      return kExitOk;
    }

    if (*proc) {
      const Config config = load_config(proc_common);
      const PulseOptions options{config.filter, config.peaks};
      if (modality == "radar") {
        RadarPulseResult r = process_radar(read_radar_cube(resolve_input(proc_in, "radar.radc")),
                                           RadarOptions{config.filter, config.peaks, config.max_range_bins});
        write_process_outputs(proc_out, r.waveform, config.peaks);
        Json sel = {{"antenna_index", r.selection.antenna_index},
                    {"range_bin", r.selection.range_bin},
                    {"peak_to_peak", r.selection.peak_to_peak},
                    {"inverted", r.selection.inverted},
                    {"per_bin_peak_to_peak", r.per_bin_p2p}};
        write_json(fs::path(proc_out) / "selection.json", sel);
        std::cout << "selected antenna " << r.selection.antenna_index << ", bin " << r.selection.range_bin << "\n";
      } else if (modality == "ppg") {
        const PpgRecording rec = read_ppg_csv(resolve_input(proc_in, "ppg.csv"));
        const std::string ch = channel.empty() ? default_channel(rec) : channel;
        write_process_outputs(proc_out, process_ppg(rec, ch, options), config.peaks);
      } else {
        const TimeSeries ref = read_series_csv(resolve_input(proc_in, "reference.csv"), "pressure_mmHg");
        write_process_outputs(proc_out, orient_pulse_waveform(ref, options).waveform, config.peaks);
      }
      return kExitOk;
    }

    if (*cmp) {
      const Config config = load_config(cmp_common);
      const Aggregation mode = parse_aggregation(aggregate);
      const bool single = bundles.size() == 1;
      std::vector<std::optional<AgreementReport>> reports(bundles.size());
      std::vector<std::string> errors(bundles.size());
      std::vector<int> codes(bundles.size(), kExitOk);
      std::atomic<std::size_t> next{0};
      std::mutex io_mutex;
      auto worker = [&] {
        for (std::size_t k = next++; k < bundles.size(); k = next++) {
          try {
            AgreementReport rep = run_compare(load_bundle(bundles[k]), config);
            const fs::path dir = single ? fs::path(cmp_out) : fs::path(cmp_out) / rep.subject_id;
            write_companion_csvs(dir, rep);
            write_json(dir / "report.json", report_to_json(rep));
            // Heavy per-beat data is only needed for pooling.
            if (single) rep.modalities.clear();
            reports[k] = std::move(rep);
            std::lock_guard lock(io_mutex);
            std::cout << "compared " << bundles[k] << "\n";
          } catch (const Error& e) {
            errors[k] = e.what();
            codes[k] = kExitInput;
          } catch (const std::exception& e) {
            errors[k] = e.what();
            codes[k] = kExitInternal;
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned t = 1; t < std::min<std::size_t>(jobs, bundles.size()); ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      int status = kExitOk;
      std::vector<AgreementReport> done;
      for (std::size_t k = 0; k < bundles.size(); ++k) {
        if (codes[k] != kExitOk) {
          std::cerr << "error: " << bundles[k] << ": " << errors[k] << "\n";
          status = std::max(status, codes[k]);
        } else {
          done.push_back(std::move(*reports[k]));
        }
      }
      if (!single && !done.empty()) {
        write_json(fs::path(cmp_out) / "aggregate.json", aggregate_reports(done, mode));
      }
      return status;
    }

    if (*self) {
      AcceptanceOptions opts;
      opts.only = only;
      opts.on_result = [&](const CriterionResult& r) {
        std::cout << format_result_line(r) << "\n";
        if (verbose || !r.pass) {
          for (const auto& d : r.details) std::cout << "    " << d << "\n";
        }
        std::cout.flush();
      };
      const auto results = run_acceptance(opts);
      const bool ok = acceptance_ok(results);
      std::cout << (ok ? "selftest passed" : "selftest FAILED") << "\n";
      return ok ? kExitOk : kExitInternal;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
