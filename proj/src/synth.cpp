#include "ergorisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ergorisk/csv.hpp"
#include "ergorisk/error.hpp"
#include "ergorisk/parallel.hpp"
#include "ergorisk/random.hpp"

namespace ergorisk {

namespace {

constexpr std::uint64_t kCalibrationSeed = 0x5EED'CA11'B8A7'E000ull;
constexpr double kCalibrationCycles = 20.0;

// Independent random streams per session.
constexpr std::uint64_t kNoiseStream = 0;
constexpr std::uint64_t kJitterStream = 1;

std::string session_name(int ordinal) {
    std::string s = std::to_string(ordinal);
    return "S" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

}  // namespace

void validate(const GeneratorParams& p) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidParameter, m); };
    if (!(p.sample_rate > 0.0)) fail("sample_rate must be > 0");
    if (!(p.band_low >= 0.0 && p.band_low < p.band_high)) fail("band must satisfy 0 <= low < high");
    if (!(p.sample_rate > 2.0 * p.band_high)) fail("sample_rate must exceed twice the band upper edge");
    if (!(p.burst_seconds > 0.0 && p.burst_seconds < p.cycle_seconds))
        fail("burst_seconds must lie in (0, cycle_seconds)");
    if (!(p.jitter >= 0.0 && p.jitter < 1.0)) fail("jitter must lie in [0, 1)");
    if (!(p.amp_slope >= 0.0) || !std::isfinite(p.amp_intercept)) fail("invalid amplitude model");
}

SessionProtocol SessionProtocol::table3() {
    return {{{9, 10, 15}, {10, 15, 15}, {10, 20, 15}, {10, 30, 15}, {10, 35, 15}, {5, 35, 17}}};
}

SessionProtocol SessionProtocol::from_csv(const std::filesystem::path& path) {
    auto t = csv::read(path);
    auto c = t.column("count");
    auto l = t.column("load_lb");
    auto h = t.column("h_in");
    SessionProtocol p;
    for (const auto& r : t.rows)
        p.rows.push_back({static_cast<int>(csv::to_int(r[c], "count")), csv::to_double(r[l], "load_lb"),
                          csv::to_double(r[h], "h_in")});
    validate(p);
    return p;
}

int SessionProtocol::total_sessions() const {
    int n = 0;
    for (const auto& r : rows) n += r.session_count;
    return n;
}

void validate(const SessionProtocol& p) {
    if (p.rows.empty()) throw Error(ErrorKind::InvalidParameter, "session protocol has no rows");
    for (const auto& r : p.rows) {
        if (r.session_count < 1)
            throw Error(ErrorKind::InvalidParameter, "protocol session_count must be >= 1");
        if (!(r.load > 0.0)) throw Error(ErrorKind::InvalidParameter, "protocol loads must be positive");
        if (!(r.h > 0.0)) throw Error(ErrorKind::InvalidParameter, "protocol H must be positive");
    }
}

LiftingTask protocol_task(double load, double h) {
    LiftingTask t;
    t.weight = load;
    t.h = h;
    t.v = 14.0;
    t.d = 18.0;
    t.a = 0.0;
    t.coupling = Coupling::Good;
    t.frequency = 10.0;
    t.duration = DurationClass::UpTo1h;
    return t;
}

// ---------------------------------------------------------------------------

SessionGenerator::SessionGenerator(GeneratorParams params) : params_(params) {
    validate(params_);
    const auto n = static_cast<std::size_t>(
        std::round(kCalibrationCycles * params_.cycle_seconds * params_.sample_rate));
    auto noise = band_noise(n, kCalibrationSeed);
    auto env = envelope(n, kCalibrationSeed, 0.0);
    EmgRecording unit;
    unit.sample_rate = params_.sample_rate;
    unit.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) unit.samples[i] = std::abs(noise[i] * env[i]);
    auto windows = segment(unit, kReferenceWindowSeconds);
    calibration_ = average_peak_time(windows);
}

std::vector<double> SessionGenerator::band_noise(std::size_t n, std::uint64_t seed) const {
    const std::size_t len = next_pow2(std::max<std::size_t>(n, 2));
    Rng rng(derive_seed(seed, kNoiseStream));
    std::vector<std::complex<double>> buf(len);
    for (auto& z : buf) z = rng.normal();
    fft(buf);

    const double bin = params_.sample_rate / static_cast<double>(len);
    for (std::size_t k = 0; k <= len / 2; ++k) {
        const double f = bin * static_cast<double>(k);
        if (f < params_.band_low || f > params_.band_high) {
            buf[k] = 0.0;
            if (k != 0 && k != len / 2) buf[len - k] = 0.0;
        }
    }
    fft(buf, FftDirection::Inverse);

    std::vector<double> out(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = buf[i].real();
        ss += out[i] * out[i];
    }
    const double rms = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(n, 1)));
    if (rms > 0.0)
        for (auto& x : out) x /= rms;
    return out;
}

std::vector<double> SessionGenerator::envelope(std::size_t n, std::uint64_t seed, double jitter) const {
    const auto& p = params_;
    Rng rng(derive_seed(seed, kJitterStream));
    std::vector<double> env(n);
    long current_cycle = -1;
    double gain = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / p.sample_rate;
        const long cycle = static_cast<long>(std::floor(t / p.cycle_seconds));
        while (current_cycle < cycle) {
            ++current_cycle;
            gain = 1.0 + jitter * (2.0 * rng.uniform() - 1.0);
        }
        const double tau = t - static_cast<double>(cycle) * p.cycle_seconds;
        double burst = 0.0;
        if (tau < p.burst_seconds)
            burst = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * tau / p.burst_seconds));
        env[i] = gain * burst;
    }
    return env;
}

EmgRecording SessionGenerator::generate(const LiftingTask& task, double duration_seconds,
                                        std::uint64_t seed, std::string session_id) const {
    validate(task);
    if (!(duration_seconds > 0.0) || !std::isfinite(duration_seconds))
        throw Error(ErrorKind::InvalidParameter, "session duration must be > 0");
    const auto n = static_cast<std::size_t>(std::round(duration_seconds * params_.sample_rate));
    if (n == 0) throw Error(ErrorKind::InvalidParameter, "session shorter than one sample");

    auto noise = band_noise(n, seed);
    auto env = envelope(n, seed, params_.jitter);
    const double scale = params_.peak_for(task.weight) / calibration_;

    EmgRecording rec;
    rec.sample_rate = params_.sample_rate;
    rec.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) rec.samples[i] = scale * env[i] * noise[i];
    rec.meta.session_id = std::move(session_id);
    rec.meta.site = "TH";
    rec.meta.task = task;
    return rec;
}

EmgRecording generate_session(const LiftingTask& task, double duration_seconds,
                              const GeneratorParams& params) {
    return SessionGenerator(params).generate(task, duration_seconds, params.seed);
}

std::vector<EmgRecording> generate_corpus(const SessionProtocol& protocol,
                                          double duration_per_session,
                                          const GeneratorParams& params, unsigned threads) {
    validate(protocol);
    const SessionGenerator gen(params);

    struct Job {
        LiftingTask task;
        int ordinal;
    };
    std::vector<Job> jobs;
    for (const auto& row : protocol.rows)
        for (int i = 0; i < row.session_count; ++i)
            jobs.push_back({protocol_task(row.load, row.h), static_cast<int>(jobs.size()) + 1});

    std::vector<EmgRecording> out(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const auto& j = jobs[i];
        out[i] = gen.generate(j.task, duration_per_session,
                              params.seed + static_cast<std::uint64_t>(j.ordinal),
                              session_name(j.ordinal));
    });
    return out;
}

void write_corpus(const std::filesystem::path& dir, std::span<const EmgRecording> corpus) {
    std::vector<ManifestRow> manifest;
    for (const auto& rec : corpus) {
        if (!rec.meta.task)
            throw Error(ErrorKind::MalformedInput,
                        "recording '" + rec.meta.session_id + "' has no lifting task");
        write_recording(dir / (rec.meta.session_id + ".csv"), rec);
        manifest.push_back({rec.meta.session_id, *rec.meta.task});
    }
    csv::write_atomic(dir / "manifest.csv", manifest_to_csv(manifest));
}

std::vector<EmgRecording> read_corpus(const std::filesystem::path& manifest) {
    auto rows = read_manifest(manifest);
    const auto dir = manifest.parent_path();
    std::vector<EmgRecording> out;
    out.reserve(rows.size());
    for (auto& row : rows) {
        RecordingMeta meta;
        meta.session_id = row.session_id;
        meta.task = row.task;
        out.push_back(load_recording(dir / (row.session_id + ".csv"), std::move(meta)));
    }
    return out;
}

}  // namespace ergorisk
