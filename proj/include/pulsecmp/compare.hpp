#pragma once

#include "pulsecmp/beats.hpp"
#include "pulsecmp/config.hpp"
#include "pulsecmp/io.hpp"
#include "pulsecmp/metrics.hpp"
#include "pulsecmp/ppg.hpp"
#include "pulsecmp/radar.hpp"
#include "pulsecmp/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pulsecmp {

struct RecordingBundle {
  std::optional<RadarCube> radar;
  std::optional<PpgRecording> ppg;
  std::optional<TimeSeries> reference;
  std::optional<SynthGroundTruth> truth;
  std::string subject_id;

  std::size_t modality_count() const {
    return static_cast<std::size_t>(radar.has_value()) + ppg.has_value() + reference.has_value();
  }
};

// Directory layout: radar.radc, ppg.csv (time_s + channels), reference.csv
// (time_s, pressure_mmHg), truth.json. Missing files leave the member empty.
RecordingBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const std::filesystem::path& dir, const RecordingBundle& bundle);

RecordingBundle bundle_from_synthetic(SyntheticRecording rec, std::string subject_id);

inline constexpr const char* kStatusOk = "ok";
inline constexpr const char* kStatusInsufficientBeats = "insufficient beats";

struct ModalityResult {
  std::string name;  // "reference", "ppg" or "radar"
  std::string status = kStatusOk;
  TimeSeries waveform;
  PeakTrain train;
  IbiSeries ibi;
  std::vector<BeatSegment> beats;
  std::optional<AverageBeat> average;
  MorphologyMetrics morphology;
  bool inverted = false;
  std::optional<BinSelection> selection;  // radar only
  std::string channel;                    // ppg only

  bool usable() const { return status == kStatusOk; }
};

struct PairResult {
  std::string ref_name;
  std::string test_name;
  std::string status = kStatusOk;
  double lag_s = 0.0;
  std::size_t matched_events = 0;
  // Paired data kept for pooling across subjects.
  std::vector<BeatSegment> ref_beats;
  std::vector<BeatSegment> test_beats;
  std::vector<double> ref_ibi_ms;
  std::vector<double> test_ibi_ms;
  std::optional<PairwiseComparison> morphology;
  std::optional<BlandAltman> ibi_agreement;  // diff = test - ref
};

// Agreement of one modality's diastolic events with the generator's beat feet.
struct TruthCheck {
  std::string name;
  std::size_t matched_beats = 0;
  std::size_t truth_beats = 0;
  std::size_t detected_beats = 0;
  double lag_s = 0.0;
  double mean_abs_timing_error_ms = 0.0;  // after removing lag_s
  double max_abs_timing_error_ms = 0.0;
  std::size_t matched_intervals = 0;
  double mean_abs_ibi_error_ms = 0.0;
  std::optional<BlandAltman> ibi_agreement;  // diff = detected - truth
};

struct AgreementReport {
  std::string subject_id;
  std::vector<ModalityResult> modalities;
  std::vector<PairResult> pairs;
  std::vector<TruthCheck> truth_checks;
  std::optional<BpSummary> blood_pressure;
  Json config_echo;

  const ModalityResult* modality(const std::string& name) const;
  const PairResult* pair(const std::string& ref, const std::string& test) const;
  const TruthCheck* truth_check(const std::string& name) const;
};

// Processes every present modality, pairs each against the reference (or the
// radar when no reference is present) and checks against truth if given.
AgreementReport run_compare(RecordingBundle bundle, const Config& config);

TruthCheck check_against_truth(const std::string& name, const PeakTrain& train, const IbiSeries& ibi,
                               const SynthGroundTruth& truth, const AlignParams& align);

Json report_to_json(const AgreementReport& report);

// Bland-Altman points, average beats with +/-2 SD bands and IBI series.
void write_companion_csvs(const std::filesystem::path& dir, const AgreementReport& report);

enum class Aggregation { kPerBeat, kPerSubject };

Aggregation parse_aggregation(const std::string& s);

// Cross-subject statistics. Per-beat pools every paired beat and interval;
// per-subject reduces each subject to its means first.
Json aggregate_reports(const std::vector<AgreementReport>& reports, Aggregation mode);

}  // namespace pulsecmp
