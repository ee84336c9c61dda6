#pragma once

// End-to-end runs: corpus -> datasets per window size -> repeated holdout per
// algorithm -> reports on disk.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ergorisk/features.hpp"
#include "ergorisk/ml.hpp"
#include "ergorisk/niosh.hpp"
#include "ergorisk/synth.hpp"

namespace ergorisk {

struct PipelineConfig {
    UnitSystem unit = UnitSystem::USCustomary;
    RiskThresholds thresholds;
    std::vector<double> windows{1.0, 0.5, 0.25};
    std::vector<AlgorithmSpec> algorithms{DecisionTreeSpec{}, RandomForestSpec{}, KnnSpec{}, SvmSpec{}};
    HoldoutOptions holdout;
    std::uint64_t seed = 7;
    std::size_t k_max = 27;

    // Input: a manifest of recorded sessions, or else a synthetic protocol
    // (built-in experiment table unless a CSV is given).
    std::optional<std::filesystem::path> manifest;
    std::optional<std::filesystem::path> protocol;
    double session_seconds = 60.0;
    double jitter = 0.1;

    std::filesystem::path out = "ergorisk-out";
    unsigned threads = 1;
};

/// Checks every field; messages name the offending key.
void validate(const PipelineConfig& c);

/// Sets one field from its config-file key. Keys:
///   units=us|metric  thresholds=t_nom,t_high  windows=1,0.5,0.25
///   algorithms=dt,rf,knn,svm  reps=10  test_fraction=0.25
///   split=windows|sessions  validation=holdout|kfold  seed=7  k_max=27
///   manifest=<path>  protocol=<path>  session_seconds=60  jitter=0.1
///   out=<dir>  threads=1
void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value);

/// Flat key=value lines; '#' starts a comment, blank lines are ignored.
void apply_config_text(PipelineConfig& c, std::string_view text, const std::string& source = "<config>");
void apply_config_file(PipelineConfig& c, const std::filesystem::path& path);

/// Text for --help describing the config keys.
std::string config_help();

GeneratorParams generator_params(const PipelineConfig& c);
/// Recordings from the manifest, or the generated synthetic corpus.
std::vector<EmgRecording> load_corpus(const PipelineConfig& c);

struct LiAmplitudeRow {
    std::string session_id;
    double li = 0.0;
    double avg_peak_uv = 0.0;  // frequency-domain average peak over 1 s windows
    RiskLabel risk = RiskLabel::Nominal;
};

/// One row per session sorted by LI then session id.
std::vector<LiAmplitudeRow> li_amplitude_report(std::span<const EmgRecording> corpus,
                                                const RiskThresholds& thresholds,
                                                UnitSystem unit = UnitSystem::USCustomary);
/// Columns session_id,li,avg_peak_uv,risk.
std::string li_amplitude_to_csv(std::span<const LiAmplitudeRow> rows);

struct PipelineResult {
    std::vector<HoldoutReport> cells;  // window-major, algorithms in config order
    std::vector<LiAmplitudeRow> li_rows;
};

/// File stem of an algorithm's report: dt, rf, knn_k<k>, svm.
std::string cell_stem(const AlgorithmSpec& spec);
/// Directory name for a window size, e.g. "window_0.5s".
std::string window_dir(double window_seconds);

std::string render_cell_report(const HoldoutReport& r);
/// Accuracy table, algorithms as rows and window sizes as columns.
std::string render_summary(const PipelineConfig& c, std::span<const HoldoutReport> cells);
std::string summary_json(const PipelineConfig& c, std::span<const HoldoutReport> cells);

/// Writes li_amplitude.csv, per window `dataset.csv` and per cell
/// `<stem>.json` / `<stem>.txt`, then summary.txt and summary.json.
PipelineResult run_pipeline(const PipelineConfig& c);

}  // namespace ergorisk
