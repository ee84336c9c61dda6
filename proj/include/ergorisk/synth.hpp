#pragma once

// Seeded synthetic sEMG lifting sessions. The experimental recordings are not
// public, so the generator stands in for them: band-limited Gaussian noise,
// gated by a raised-cosine burst once per lift cycle (silent in between) and
// scaled to a linear peak-vs-load model.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ergorisk/niosh.hpp"
#include "ergorisk/signal.hpp"

namespace ergorisk {

struct GeneratorParams {
    double sample_rate = 1000.0;
    double band_low = 20.0;        // Hz
    double band_high = 450.0;      // Hz
    double cycle_seconds = 6.0;    // 10 lifts/min
    double burst_seconds = 2.0;
    // peak(load) = amp_intercept + amp_slope * load; 150 μV at 10 lb, 250 μV at 35 lb.
    double amp_intercept = 110.0;
    double amp_slope = 4.0;
    double jitter = 0.1;           // per-cycle multiplicative burst amplitude noise
    std::uint64_t seed = 7;

    double peak_for(double load) const { return amp_intercept + amp_slope * load; }
};

void validate(const GeneratorParams& p);

/// Window length used for the amplitude calibration and the average-peak
/// report.
inline constexpr double kReferenceWindowSeconds = 1.0;

struct ProtocolRow {
    int session_count = 1;
    double load = 0.0;  // lb
    double h = 15.0;    // in
};

struct SessionProtocol {
    std::vector<ProtocolRow> rows;

    /// 9x(10 lb, H15), 10x(15,H15), 10x(20,H15), 10x(30,H15), 10x(35,H15), 5x(35,H17).
    static SessionProtocol table3();
    /// CSV with columns count,load_lb,h_in.
    static SessionProtocol from_csv(const std::filesystem::path& path);

    int total_sessions() const;
};

void validate(const SessionProtocol& p);

/// The fixed task geometry of the experiment (origin: V=14, D=18, A=0, good
/// coupling, 10 lifts/min, up to 1 h) with the given load and H.
LiftingTask protocol_task(double load, double h);

/// Generator with its amplitude calibration computed once. The calibration
/// is the mean per-window rectified peak of a unit-gain, jitter-free
/// realisation drawn from a fixed internal seed; it depends on the shape
/// parameters but not on `seed`.
class SessionGenerator {
public:
    explicit SessionGenerator(GeneratorParams params);

    const GeneratorParams& params() const { return params_; }
    double calibration() const { return calibration_; }

    /// Session with its own seed (overrides params().seed).
    EmgRecording generate(const LiftingTask& task, double duration_seconds, std::uint64_t seed,
                          std::string session_id = "S01") const;

    /// Unit-gain band-limited noise and envelope, exposed for tests.
    std::vector<double> band_noise(std::size_t n, std::uint64_t seed) const;
    std::vector<double> envelope(std::size_t n, std::uint64_t seed, double jitter) const;

private:
    GeneratorParams params_;
    double calibration_ = 1.0;
};

EmgRecording generate_session(const LiftingTask& task, double duration_seconds,
                              const GeneratorParams& params);

/// One recording per protocol row per count. Session k (1-based) uses seed
/// params.seed + k and is named "S01", "S02", ...
std::vector<EmgRecording> generate_corpus(const SessionProtocol& protocol,
                                          double duration_per_session,
                                          const GeneratorParams& params, unsigned threads = 1);

/// Writes `<dir>/<session_id>.csv` per recording plus `<dir>/manifest.csv`.
void write_corpus(const std::filesystem::path& dir, std::span<const EmgRecording> corpus);

/// Reads `manifest.csv` (session_id, load_lb, h_in, v_in, d_in, a_deg,
/// coupling, freq_per_min, duration_class) and the recordings next to it.
std::vector<EmgRecording> read_corpus(const std::filesystem::path& manifest);

}  // namespace ergorisk
