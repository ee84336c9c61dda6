#pragma once

// sEMG recordings: ingestion, rectification, fixed-window segmentation and
// single-sided FFT magnitude spectra.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergorisk/niosh.hpp"

namespace ergorisk {

struct RecordingMeta {
    std::string session_id;
    std::string site = "TH";
    std::optional<LiftingTask> task;
};

struct EmgRecording {
    double sample_rate = 0.0;     // Hz
    std::vector<double> samples;  // μV
    RecordingMeta meta;

    double duration() const { return sample_rate > 0 ? samples.size() / sample_rate : 0.0; }
};

/// sample_rate > 0 and every sample finite.
void validate(const EmgRecording& r);

struct Window {
    std::size_t start_index = 0;
    std::vector<double> values;

    std::size_t length() const { return values.size(); }
};

struct Spectrum {
    double bin_width = 0.0;          // Hz
    std::vector<double> magnitudes;  // single-sided, μV; index 0 is DC
};

/// Reads a `time_s,emg_uV` CSV. The sample rate is the reciprocal of the
/// median time step; every step must be within 1% of that median.
EmgRecording load_recording(const std::filesystem::path& path, RecordingMeta meta = {});
EmgRecording parse_recording(std::string_view csv_text, RecordingMeta meta = {},
                             const std::string& source_name = "<memory>");
void write_recording(const std::filesystem::path& path, const EmgRecording& r);

EmgRecording rectify(const EmgRecording& r);

/// round(window_seconds * sample_rate); throws if that is < 1.
std::size_t window_samples(double window_seconds, double sample_rate);

/// Consecutive non-overlapping windows; a trailing partial window is dropped.
std::vector<Window> segment(const EmgRecording& r, double window_seconds);

std::size_t next_pow2(std::size_t n);

enum class FftDirection { Forward, Inverse };

/// In-place iterative radix-2 transform. Size must be a power of two.
/// The inverse is unscaled (caller divides by N).
void fft(std::vector<std::complex<double>>& data, FftDirection dir = FftDirection::Forward);

/// Zero-pads to the next power of two N, then bin 0 = |X0|/N,
/// interior bins 2|Xk|/N and the Nyquist bin |X_{N/2}|/N.
Spectrum fft_magnitude(std::span<const double> values, double sample_rate);
inline Spectrum fft_magnitude(const Window& w, double sample_rate) {
    return fft_magnitude(std::span<const double>(w.values), sample_rate);
}

/// Mean of per-window maxima of the samples (callers pass rectified windows).
double average_peak_time(std::span<const Window> windows);
/// Mean of per-window maxima of the spectrum magnitudes, DC bin excluded.
double average_peak_frequency(std::span<const Window> windows, double sample_rate);

}  // namespace ergorisk
