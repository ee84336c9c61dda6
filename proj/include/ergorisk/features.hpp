#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ergorisk/niosh.hpp"
#include "ergorisk/signal.hpp"

namespace ergorisk {

inline constexpr std::size_t kFeatureDim = 7;

using FeatureArray = std::array<double, kFeatureDim>;

/// Session constants (load, H) followed by five statistics of the window's
/// single-sided, DC-excluded magnitude spectrum.
struct FeatureVector {
    double weight = 0.0;
    double h = 0.0;
    double fft_max = 0.0;
    double fft_min = 0.0;
    double fft_mean = 0.0;
    double fft_median = 0.0;
    double fft_std = 0.0;

    FeatureArray as_array() const {
        return {weight, h, fft_max, fft_min, fft_mean, fft_median, fft_std};
    }
    static FeatureVector from_array(const FeatureArray& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::array<const char*, kFeatureDim> kFeatureNames = {
    "weight", "h", "fft_max", "fft_min", "fft_mean", "fft_median", "fft_std"};

struct LabeledExample {
    FeatureVector features;
    RiskLabel label = RiskLabel::Nominal;
    std::string session_id;
    std::size_t window_index = 0;
};

struct Dataset {
    std::vector<LabeledExample> examples;
    double window_seconds = 0.0;
    std::string provenance;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
    /// Counts per label, indexed by index_of(RiskLabel).
    std::array<std::size_t, 3> label_counts() const;
    /// Subset by example index, preserving metadata.
    Dataset subset(std::span<const std::size_t> indices) const;
};

/// Non-empty, finite features, fft_min <= fft_median <= fft_max, fft_std >= 0.
void validate(const Dataset& d);

/// Throws Error{InvalidParameter} if the padded window has no non-DC bin.
FeatureVector extract_window_features(const Window& w, double sample_rate, double weight,
                                      double h);

/// rectify -> segment -> per-window features. Every window is labelled with
/// the session's NIOSH risk class (origin RWL). Sessions shorter than one
/// window contribute nothing; an entirely empty result is an error.
/// `threads` only affects speed, never the output.
Dataset build_dataset(std::span<const EmgRecording> recordings, double window_seconds,
                      const RiskThresholds& thresholds,
                      UnitSystem unit = UnitSystem::USCustomary, std::string provenance = {},
                      unsigned threads = 1);

/// Columns: weight,h,fft_max,fft_min,fft_mean,fft_median,fft_std,label,session_id,window_index
std::string dataset_to_csv(const Dataset& d);
void write_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::string_view csv_text, const std::string& source_name = "<memory>");

}  // namespace ergorisk
