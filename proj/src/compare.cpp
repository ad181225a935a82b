#include "pulsecmp/compare.hpp"

#include "pulsecmp/error.hpp"

#include <algorithm>
#include <cmath>

namespace pulsecmp {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRadarFile = "radar.radc";
constexpr const char* kPpgFile = "ppg.csv";
constexpr const char* kReferenceFile = "reference.csv";
constexpr const char* kTruthFile = "truth.json";
constexpr const char* kPressureColumn = "pressure_mmHg";

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

void finish_modality(ModalityResult& m, const Config& config) {
  m.train = detect_peaks(m.waveform, config.peaks);
  m.ibi = extract_ibi(m.train);
  m.beats = segment_beats(m.waveform, m.train, config.norm_len);
  if (m.train.systolic_indices.size() < 2 || m.beats.size() < 2) {
    m.status = kStatusInsufficientBeats;
    return;
  }
  m.average = average_beats(m.beats);
  m.morphology = morphology_metrics(m.beats);
}

PulseOptions pulse_options(const Config& config) {
  return {config.filter, config.peaks};
}

PairResult pair_modalities(const ModalityResult& ref, const ModalityResult& test, const Config& config) {
  PairResult p;
  p.ref_name = ref.name;
  p.test_name = test.name;
  if (!ref.usable() || !test.usable()) {
    p.status = kStatusInsufficientBeats;
    return p;
  }
  const Alignment alignment = align_beat_events(ref.train, test.train, config.align);
  p.lag_s = alignment.lag_s;
  p.matched_events = alignment.pairs.size();
  for (const auto& [i, j] : pair_segments(ref.beats, test.beats, alignment)) {
    p.ref_beats.push_back(ref.beats[i]);
    p.test_beats.push_back(test.beats[j]);
  }
  for (const auto& [i, j] : pair_intervals(ref.ibi, test.ibi, alignment)) {
    p.ref_ibi_ms.push_back(ref.ibi.intervals_ms[i]);
    p.test_ibi_ms.push_back(test.ibi.intervals_ms[j]);
  }
  if (p.ref_beats.size() >= 2) p.morphology = compare_modalities(p.ref_beats, p.test_beats);
  if (p.ref_ibi_ms.size() >= 2) p.ibi_agreement = bland_altman(p.test_ibi_ms, p.ref_ibi_ms);
  if (!p.morphology || !p.ibi_agreement) p.status = "insufficient paired beats";
  return p;
}

Json ba_json(const BlandAltman& ba, const char* difference) {
  return {{"difference", difference}, {"n", ba.points.size()}, {"bias", ba.bias},
          {"sd", ba.sd},              {"loa_low", ba.loa_low}, {"loa_high", ba.loa_high}};
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json morphology_json(const MorphologyMetrics& m) {
  return {{"n_beats", m.n_beats},
          {"inflection_count_mean", m.inflection_count_mean},
          {"inflection_count_sd", m.inflection_count_sd},
          {"auc_mean", m.auc_mean},
          {"auc_sd", m.auc_sd}};
}

Json comparison_json(const PairwiseComparison& c) {
  return {{"n_pairs", c.n_pairs},
          {"cosine_mean", c.cosine_mean},
          {"cosine_sd", c.cosine_sd},
          {"inflections",
           {{"ref_minus_test", c.mean_diff_inflections},
            {"test_minus_ref", -c.mean_diff_inflections},
            {"p", optional_number(c.p_inflections)}}},
          {"auc",
           {{"test_minus_ref", c.mean_diff_auc},
            {"ref_minus_test", -c.mean_diff_auc},
            {"p", optional_number(c.p_auc)}}}};
}

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  }
  return out;
}

}  // namespace

RecordingBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "not a bundle directory: " + dir.string());
  RecordingBundle b;
  b.subject_id = dir.filename().string();
  if (b.subject_id.empty()) b.subject_id = dir.parent_path().filename().string();
  if (fs::exists(dir / kRadarFile)) b.radar = read_radar_cube(dir / kRadarFile);
  if (fs::exists(dir / kPpgFile)) b.ppg = read_ppg_csv(dir / kPpgFile);
  if (fs::exists(dir / kReferenceFile)) b.reference = read_series_csv(dir / kReferenceFile, kPressureColumn);
  if (fs::exists(dir / kTruthFile)) b.truth = truth_from_json(read_json(dir / kTruthFile));
  return b;
}

void save_bundle(const fs::path& dir, const RecordingBundle& b) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  if (b.radar) write_radar_cube(dir / kRadarFile, *b.radar);
  if (b.ppg) write_ppg_csv(dir / kPpgFile, *b.ppg);
  if (b.reference) write_series_csv(dir / kReferenceFile, {{kPressureColumn, &*b.reference}});
  if (b.truth) write_json(dir / kTruthFile, truth_to_json(*b.truth));
}

RecordingBundle bundle_from_synthetic(SyntheticRecording rec, std::string subject_id) {
  RecordingBundle b;
  b.radar = std::move(rec.radar);
  b.ppg = std::move(rec.ppg);
  b.reference = std::move(rec.reference);
  b.truth = std::move(rec.truth);
  b.subject_id = std::move(subject_id);
  return b;
}

const ModalityResult* AgreementReport::modality(const std::string& name) const {
  for (const auto& m : modalities) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const PairResult* AgreementReport::pair(const std::string& ref, const std::string& test) const {
  for (const auto& p : pairs) {
    if (p.ref_name == ref && p.test_name == test) return &p;
  }
  return nullptr;
}

const TruthCheck* AgreementReport::truth_check(const std::string& name) const {
  for (const auto& t : truth_checks) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

TruthCheck check_against_truth(const std::string& name, const PeakTrain& train, const IbiSeries& ibi,
                               const SynthGroundTruth& truth, const AlignParams& align) {
  TruthCheck tc;
  tc.name = name;
  tc.truth_beats = truth.beat_times_s.size();
  tc.detected_beats = train.diastolic_indices.size();
  if (train.diastolic_indices.empty() || truth.beat_times_s.empty()) return tc;

  const double fs = train.sample_rate_hz;
  PeakTrain truth_train;
  truth_train.sample_rate_hz = fs;
  IbiSeries truth_ibi;
  for (std::size_t k = 0; k < truth.beat_times_s.size(); ++k) {
    truth_train.diastolic_indices.push_back(
        static_cast<std::size_t>(std::max(0LL, std::llround(truth.beat_times_s[k] * fs))));
    if (k > 0) {
      truth_ibi.intervals_ms.push_back(1000.0 * (truth.beat_times_s[k] - truth.beat_times_s[k - 1]));
      truth_ibi.anchor_times_s.push_back(truth.beat_times_s[k - 1]);
      truth_ibi.anchor_indices.push_back(k - 1);
    }
  }

  const Alignment alignment = align_beat_events(truth_train, train, align);
  tc.matched_beats = alignment.pairs.size();
  if (alignment.pairs.empty()) return tc;
  std::vector<double> offsets;
  for (const auto& [i, j] : alignment.pairs) {
    offsets.push_back(train.diastolic_time(j) - truth.beat_times_s[i]);
  }
  tc.lag_s = median_of(offsets);
  double sum = 0.0;
  for (double o : offsets) {
    const double e = std::abs(o - tc.lag_s) * 1000.0;
    sum += e;
    tc.max_abs_timing_error_ms = std::max(tc.max_abs_timing_error_ms, e);
  }
  tc.mean_abs_timing_error_ms = sum / static_cast<double>(offsets.size());

  std::vector<double> detected, reference;
  for (const auto& [i, j] : pair_intervals(truth_ibi, ibi, alignment)) {
    reference.push_back(truth_ibi.intervals_ms[i]);
    detected.push_back(ibi.intervals_ms[j]);
  }
  tc.matched_intervals = detected.size();
  if (!detected.empty()) {
    double err = 0.0;
    for (std::size_t k = 0; k < detected.size(); ++k) err += std::abs(detected[k] - reference[k]);
    tc.mean_abs_ibi_error_ms = err / static_cast<double>(detected.size());
  }
  if (detected.size() >= 2) tc.ibi_agreement = bland_altman(detected, reference);
  return tc;
}

AgreementReport run_compare(RecordingBundle bundle, const Config& config) {
  validate(config);
  if (bundle.modality_count() < 2) {
    throw Error(ErrorCode::kNeedTwoModalities, "need two modalities: bundle '" + bundle.subject_id +
                                                   "' has " + std::to_string(bundle.modality_count()));
  }
  AgreementReport report;
  report.subject_id = bundle.subject_id;
  report.config_echo = config_to_json(config);

  if (bundle.reference) {
    ModalityResult m;
    m.name = "reference";
    OrientedWaveform w = orient_pulse_waveform(*bundle.reference, pulse_options(config));
    m.waveform = std::move(w.waveform);
    m.inverted = w.inverted;
    finish_modality(m, config);
    if (m.usable()) {
      try {
        report.blood_pressure = bp_summary(*bundle.reference, m.train);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInvalidPressures) throw;
      }
    }
    report.modalities.push_back(std::move(m));
  }
  if (bundle.ppg) {
    ModalityResult m;
    m.name = "ppg";
    m.channel = default_channel(*bundle.ppg);
    OrientedWaveform w = orient_pulse_waveform(bundle.ppg->channels.at(m.channel), pulse_options(config));
    m.waveform = std::move(w.waveform);
    m.inverted = w.inverted;
    finish_modality(m, config);
    report.modalities.push_back(std::move(m));
  }
  if (bundle.radar) {
    ModalityResult m;
    m.name = "radar";
    RadarPulseResult r = process_radar(std::move(*bundle.radar),
                                       RadarOptions{config.filter, config.peaks, config.max_range_bins});
    bundle.radar.reset();
    m.waveform = std::move(r.waveform);
    m.inverted = r.selection.inverted;
    m.selection = r.selection;
    finish_modality(m, config);
    report.modalities.push_back(std::move(m));
  }

  const ModalityResult& base = report.modalities.front();
  for (std::size_t k = 1; k < report.modalities.size(); ++k) {
    report.pairs.push_back(pair_modalities(base, report.modalities[k], config));
  }
  if (bundle.truth) {
    for (const ModalityResult& m : report.modalities) {
      if (m.train.diastolic_indices.empty()) continue;
      report.truth_checks.push_back(check_against_truth(m.name, m.train, m.ibi, *bundle.truth, config.align));
    }
  }
  return report;
}

Json report_to_json(const AgreementReport& r) {
  Json j;
  j["subject_id"] = r.subject_id;
  Json mods = Json::object();
  for (const ModalityResult& m : r.modalities) {
    Json mj;
    mj["status"] = m.status;
    mj["n_systolic_peaks"] = m.train.systolic_indices.size();
    mj["n_diastolic_peaks"] = m.train.diastolic_indices.size();
    mj["n_intervals"] = m.ibi.size();
    mj["n_segments"] = m.beats.size();
    mj["inverted"] = m.inverted;
    if (!m.channel.empty()) mj["channel"] = m.channel;
    if (m.selection) {
      mj["selection"] = {{"antenna_index", m.selection->antenna_index},
                         {"range_bin", m.selection->range_bin},
                         {"peak_to_peak", m.selection->peak_to_peak}};
    }
    mj["morphology"] = m.usable() ? morphology_json(m.morphology) : Json(nullptr);
    mods[m.name] = std::move(mj);
  }
  j["modalities"] = std::move(mods);
  if (r.blood_pressure) {
    j["blood_pressure"] = {{"sbp", r.blood_pressure->sbp},
                           {"dbp", r.blood_pressure->dbp},
                           {"map", r.blood_pressure->map}};
  } else {
    j["blood_pressure"] = nullptr;
  }
  Json pairs = Json::array();
  for (const PairResult& p : r.pairs) {
    Json pj;
    pj["ref"] = p.ref_name;
    pj["test"] = p.test_name;
    pj["status"] = p.status;
    pj["lag_s"] = p.lag_s;
    pj["matched_events"] = p.matched_events;
    pj["n_beat_pairs"] = p.ref_beats.size();
    pj["n_ibi_pairs"] = p.ref_ibi_ms.size();
    pj["morphology"] = p.morphology ? comparison_json(*p.morphology) : Json(nullptr);
    pj["ibi_bland_altman"] = p.ibi_agreement ? ba_json(*p.ibi_agreement, "test - ref") : Json(nullptr);
    pairs.push_back(std::move(pj));
  }
  j["comparisons"] = std::move(pairs);
  if (!r.truth_checks.empty()) {
    Json truth = Json::object();
    for (const TruthCheck& t : r.truth_checks) {
      truth[t.name] = {
          {"truth_beats", t.truth_beats},
          {"detected_beats", t.detected_beats},
          {"matched_beats", t.matched_beats},
          {"lag_s", t.lag_s},
          {"mean_abs_timing_error_ms", t.mean_abs_timing_error_ms},
          {"max_abs_timing_error_ms", t.max_abs_timing_error_ms},
          {"matched_intervals", t.matched_intervals},
          {"mean_abs_ibi_error_ms", t.mean_abs_ibi_error_ms},
          {"ibi_bland_altman", t.ibi_agreement ? ba_json(*t.ibi_agreement, "detected - truth") : Json(nullptr)},
      };
    }
    j["truth"] = std::move(truth);
  }
  j["config"] = r.config_echo;
  return j;
}

void write_companion_csvs(const fs::path& dir, const AgreementReport& r) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const PairResult& p : r.pairs) {
    if (!p.ibi_agreement) continue;
    CsvTable t;
    t.columns = {"mean_ms", "diff_ms"};
    t.values.resize(2);
    for (const auto& [mean, diff] : p.ibi_agreement->points) {
      t.values[0].push_back(mean);
      t.values[1].push_back(diff);
    }
    write_csv(dir / ("bland_altman_" + safe_name(p.test_name) + "_vs_" + safe_name(p.ref_name) + ".csv"), t);
  }
  for (const ModalityResult& m : r.modalities) {
    if (m.average) {
      CsvTable t;
      t.columns = {"phase", "mean", "sd", "lower_2sd", "upper_2sd"};
      t.values.resize(5);
      const std::size_t n = m.average->mean.size();
      for (std::size_t i = 0; i < n; ++i) {
        const double mu = m.average->mean[i];
        const double sd = m.average->sd[i];
        t.values[0].push_back(n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
        t.values[1].push_back(mu);
        t.values[2].push_back(sd);
        t.values[3].push_back(mu - 2.0 * sd);
        t.values[4].push_back(mu + 2.0 * sd);
      }
      write_csv(dir / ("average_beat_" + safe_name(m.name) + ".csv"), t);
    }
    CsvTable t;
    t.columns = {"anchor_time_s", "ibi_ms"};
    t.values = {m.ibi.anchor_times_s, m.ibi.intervals_ms};
    write_csv(dir / ("ibi_" + safe_name(m.name) + ".csv"), t);
  }
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "per-beat") return Aggregation::kPerBeat;
  if (s == "per-subject") return Aggregation::kPerSubject;
  throw Error(ErrorCode::kInvalidArgument, "aggregation must be per-beat or per-subject, got '" + s + "'");
}

Json aggregate_reports(const std::vector<AgreementReport>& reports, Aggregation mode) {
  Json j;
  j["mode"] = mode == Aggregation::kPerBeat ? "per-beat" : "per-subject";
  j["n_subjects"] = reports.size();

  std::vector<std::string> names;
  for (const auto& r : reports) {
    for (const auto& m : r.modalities) {
      if (std::find(names.begin(), names.end(), m.name) == names.end()) names.push_back(m.name);
    }
  }

  Json mods = Json::object();
  for (const std::string& name : names) {
    std::vector<BeatSegment> pooled;
    std::vector<double> infl_means, auc_means;
    for (const auto& r : reports) {
      const ModalityResult* m = r.modality(name);
      if (!m || !m->usable()) continue;
      pooled.insert(pooled.end(), m->beats.begin(), m->beats.end());
      infl_means.push_back(m->morphology.inflection_count_mean);
      auc_means.push_back(m->morphology.auc_mean);
    }
    if (mode == Aggregation::kPerBeat) {
      mods[name] = pooled.empty() ? Json(nullptr) : morphology_json(morphology_metrics(pooled));
    } else if (infl_means.empty()) {
      mods[name] = nullptr;
    } else {
      mods[name] = {{"n_subjects", infl_means.size()},
                    {"inflection_count_mean", mean(infl_means)},
                    {"inflection_count_sd", sample_sd(infl_means)},
                    {"auc_mean", mean(auc_means)},
                    {"auc_sd", sample_sd(auc_means)}};
    }
  }
  j["modalities"] = std::move(mods);

  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : reports) {
    for (const auto& p : r.pairs) {
      const auto key = std::make_pair(p.ref_name, p.test_name);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
  }
  Json pairs = Json::array();
  for (const auto& [ref, test] : keys) {
    Json pj;
    pj["ref"] = ref;
    pj["test"] = test;
    pj["morphology"] = nullptr;
    pj["ibi_bland_altman"] = nullptr;
    if (mode == Aggregation::kPerBeat) {
      std::vector<BeatSegment> rb, tb;
      std::vector<double> ri, ti;
      for (const auto& r : reports) {
        const PairResult* p = r.pair(ref, test);
        if (!p) continue;
        rb.insert(rb.end(), p->ref_beats.begin(), p->ref_beats.end());
        tb.insert(tb.end(), p->test_beats.begin(), p->test_beats.end());
        ri.insert(ri.end(), p->ref_ibi_ms.begin(), p->ref_ibi_ms.end());
        ti.insert(ti.end(), p->test_ibi_ms.begin(), p->test_ibi_ms.end());
      }
      if (rb.size() >= 2) pj["morphology"] = comparison_json(compare_modalities(rb, tb));
      if (ri.size() >= 2) pj["ibi_bland_altman"] = ba_json(bland_altman(ti, ri), "test - ref");
    } else {
      std::vector<double> d_infl, d_auc, cosines, ri, ti;
      for (const auto& r : reports) {
        const PairResult* p = r.pair(ref, test);
        if (!p) continue;
        if (p->morphology) {
          d_infl.push_back(p->morphology->mean_diff_inflections);
          d_auc.push_back(p->morphology->mean_diff_auc);
          cosines.push_back(p->morphology->cosine_mean);
        }
        if (p->ibi_agreement) {
          ri.push_back(mean(p->ref_ibi_ms));
          ti.push_back(mean(p->test_ibi_ms));
        }
      }
      auto p_value = [](const std::vector<double>& d) -> std::optional<double> {
        if (d.size() < 2) return std::nullopt;
        try {
          return paired_t_test(d).p;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kZeroVariance) return std::nullopt;
          throw;
        }
      };
      if (!d_infl.empty()) {
        PairwiseComparison c;
        c.n_pairs = d_infl.size();
        c.mean_diff_inflections = mean(d_infl);
        c.p_inflections = p_value(d_infl);
        c.mean_diff_auc = mean(d_auc);
        c.p_auc = p_value(d_auc);
        c.cosine_mean = mean(cosines);
        c.cosine_sd = sample_sd(cosines);
        pj["morphology"] = comparison_json(c);
      }
      if (ri.size() >= 2) pj["ibi_bland_altman"] = ba_json(bland_altman(ti, ri), "test - ref");
    }
    pairs.push_back(std::move(pj));
  }
  j["comparisons"] = std::move(pairs);
  return j;
}

}  // namespace pulsecmp
