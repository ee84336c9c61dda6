#include "ergorisk/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ergorisk/csv.hpp"
#include "ergorisk/error.hpp"

namespace ergorisk {

namespace {

constexpr double kUniformityTolerance = 0.01;

double median_of(std::vector<double> v) {
    auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

void validate(const EmgRecording& r) {
    if (!(r.sample_rate > 0.0) || !std::isfinite(r.sample_rate))
        throw Error(ErrorKind::InvalidParameter, "recording sample rate must be > 0");
    for (double x : r.samples)
        if (!std::isfinite(x))
            throw Error(ErrorKind::MalformedInput,
                        "recording '" + r.meta.session_id + "' has a non-finite sample");
}

EmgRecording parse_recording(std::string_view csv_text, RecordingMeta meta,
                             const std::string& source_name) {
    auto table = csv::parse(csv_text, source_name);
    if (table.header.empty() || table.rows.empty())
        throw Error(ErrorKind::EmptyRecording, source_name + ": recording has no samples");
    auto tcol = table.column("time_s");
    auto vcol = table.column("emg_uV");
    if (table.rows.size() < 2)
        throw Error(ErrorKind::MalformedInput,
                    source_name + ": need at least two samples to infer the sample rate");

    std::vector<double> times;
    EmgRecording rec;
    rec.meta = std::move(meta);
    times.reserve(table.rows.size());
    rec.samples.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        times.push_back(csv::to_double(row[tcol], source_name + " time_s"));
        rec.samples.push_back(csv::to_double(row[vcol], source_name + " emg_uV"));
    }

    std::vector<double> steps(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
        steps[i - 1] = times[i] - times[i - 1];
        if (!(steps[i - 1] > 0.0))
            throw Error(ErrorKind::MalformedInput,
                        source_name + ": time_s is not strictly increasing at row " +
                            std::to_string(i + 1));
    }
    double step = median_of(steps);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (std::abs(steps[i] - step) > kUniformityTolerance * step)
            throw Error(ErrorKind::NonUniformSampling,
                        source_name + ": sampling step at row " + std::to_string(i + 2) +
                            " deviates more than 1% from the median step");
    }
    rec.sample_rate = 1.0 / step;
    validate(rec);
    return rec;
}

EmgRecording load_recording(const std::filesystem::path& path, RecordingMeta meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_recording(buf.str(), std::move(meta), path.string());
}

void write_recording(const std::filesystem::path& path, const EmgRecording& r) {
    std::string out = "time_s,emg_uV\n";
    out.reserve(r.samples.size() * 28);
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        out += csv::format(static_cast<double>(i) / r.sample_rate);
        out += ',';
        out += csv::format(r.samples[i]);
        out += '\n';
    }
    csv::write_atomic(path, out);
}

EmgRecording rectify(const EmgRecording& r) {
    EmgRecording out = r;
    for (auto& x : out.samples) x = std::abs(x);
    return out;
}

std::size_t window_samples(double window_seconds, double sample_rate) {
    if (!(window_seconds > 0.0) || !std::isfinite(window_seconds))
        throw Error(ErrorKind::InvalidParameter, "window length must be > 0 seconds");
    double n = std::round(window_seconds * sample_rate);
    if (n < 1.0)
        throw Error(ErrorKind::InvalidParameter, "window shorter than one sample");
    return static_cast<std::size_t>(n);
}

std::vector<Window> segment(const EmgRecording& r, double window_seconds) {
    auto len = window_samples(window_seconds, r.sample_rate);
    std::vector<Window> out;
    auto count = r.samples.size() / len;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        auto begin = r.samples.begin() + static_cast<std::ptrdiff_t>(w * len);
        out.push_back(Window{w * len, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(len))});
    }
    return out;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& a, FftDirection dir) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error(ErrorKind::InvalidParameter, "fft size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const double sign = dir == FftDirection::Forward ? -1.0 : 1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles computed directly per index rather than by recurrence, so
        // rounding error does not accumulate along the butterfly.
        std::vector<std::complex<double>> tw(half);
        for (std::size_t k = 0; k < half; ++k) {
            double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
            tw[k] = {std::cos(angle), std::sin(angle)};
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                auto u = a[i + k];
                auto v = a[i + k + half] * tw[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

Spectrum fft_magnitude(std::span<const double> values, double sample_rate) {
    if (values.empty()) throw Error(ErrorKind::InvalidParameter, "fft_magnitude: empty window");
    const std::size_t n = next_pow2(values.size());
    std::vector<std::complex<double>> buf(n);
    std::copy(values.begin(), values.end(), buf.begin());
    fft(buf);

    Spectrum s;
    s.bin_width = sample_rate / static_cast<double>(n);
    s.magnitudes.resize(n / 2 + 1);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        bool edge = (k == 0) || (k == n / 2);
        s.magnitudes[k] = std::abs(buf[k]) * inv * (edge ? 1.0 : 2.0);
    }
    if (n == 1) s.magnitudes.resize(1);
    return s;
}

double average_peak_time(std::span<const Window> windows) {
    if (windows.empty()) throw Error(ErrorKind::EmptyDataset, "average_peak: no windows");
    double sum = 0.0;
    for (const auto& w : windows) sum += max_of(w.values);
    return sum / static_cast<double>(windows.size());
}

double average_peak_frequency(std::span<const Window> windows, double sample_rate) {
    if (windows.empty()) throw Error(ErrorKind::EmptyDataset, "average_peak: no windows");
    double sum = 0.0;
    for (const auto& w : windows) {
        auto s = fft_magnitude(w, sample_rate);
        if (s.magnitudes.size() < 2)
            throw Error(ErrorKind::InvalidParameter, "average_peak: window has no non-DC bins");
        sum += max_of(std::span<const double>(s.magnitudes).subspan(1));
    }
    return sum / static_cast<double>(windows.size());
}

}  // namespace ergorisk
