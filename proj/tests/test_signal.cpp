#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "ergorisk/error.hpp"
#include "ergorisk/random.hpp"
#include "ergorisk/signal.hpp"
#include "oracle.hpp"

using namespace ergorisk;

namespace {

EmgRecording make(std::vector<double> s, double rate = 100.0) {
    EmgRecording r;
    r.sample_rate = rate;
    r.samples = std::move(s);
    r.meta.session_id = "T";
    return r;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("signal") {

TEST_CASE("sample rate from the median step") {
    auto r = parse_recording("time_s,emg_uV\n0.000,1\n0.001,2\n0.002,3\n");
    CHECK(r.sample_rate == doctest::Approx(1000.0));
    CHECK(r.samples == std::vector<double>{1, 2, 3});
}

TEST_CASE("recording parse errors") {
    CHECK(kind_of([] { parse_recording(""); }) == ErrorKind::EmptyRecording);
    CHECK(kind_of([] { parse_recording("time_s,emg_uV\n"); }) == ErrorKind::EmptyRecording);
    CHECK(kind_of([] { parse_recording("time_s,emg_uV\n0,1\n0.001,2\n0.005,3\n"); }) ==
          ErrorKind::NonUniformSampling);
    CHECK(kind_of([] { parse_recording("time_s,value\n0,1\n0.001,2\n"); }) == ErrorKind::MalformedInput);
    CHECK(kind_of([] { parse_recording("time_s,emg_uV\n0,1\n0.002,2\n0.001,3\n"); }) == ErrorKind::MalformedInput);
    CHECK(kind_of([] { parse_recording("time_s,emg_uV\n0,1\n0.001,x\n"); }) == ErrorKind::MalformedInput);
}

TEST_CASE("recording file round trip") {
    auto path = std::filesystem::temp_directory_path() / "ergorisk_signal_roundtrip.csv";
    auto r = make({0.5, -1.25, 3.0, 7.0}, 1000.0);
    write_recording(path, r);
    auto back = load_recording(path);
    CHECK(back.samples == r.samples);
    CHECK(back.sample_rate == doctest::Approx(1000.0));
    std::filesystem::remove(path);
    CHECK(kind_of([&] { load_recording(path); }) == ErrorKind::Io);
}

TEST_CASE("rectify") {
    CHECK(rectify(make({-3, 2, -1})).samples == std::vector<double>{3, 2, 1});
    auto pos = make({0, 1.5, 2});
    CHECK(rectify(pos).samples == pos.samples);
    CHECK(rectify(make({0, 0, 0})).samples == std::vector<double>{0, 0, 0});
    auto once = rectify(make({-1, 4, -9}));
    CHECK(rectify(once).samples == once.samples);
    CHECK(rectify(once).meta.session_id == "T");
}

TEST_CASE("segment counts") {
    CHECK(segment(make(std::vector<double>(1000)), 1.0).size() == 10);
    auto w = segment(make(std::vector<double>(1060)), 1.0);
    CHECK(w.size() == 10);
    CHECK(w.back().start_index == 900);
    CHECK(segment(make(std::vector<double>(1000)), 0.25).size() == 40);
    CHECK(segment(make(std::vector<double>(50)), 1.0).empty());
    CHECK(kind_of([] { segment(make(std::vector<double>(10)), 0.001); }) == ErrorKind::InvalidParameter);

    std::vector<double> ramp(1000);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    auto ws = segment(make(ramp), 0.5);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        CHECK(ws[i].length() == 50);
        CHECK(ws[i].values.front() == static_cast<double>(i * 50));
    }
}

TEST_CASE("window counts halve with window size") {
    auto r = make(std::vector<double>(60'000), 1000.0);
    auto n1 = segment(r, 1.0).size(), n05 = segment(r, 0.5).size(), n025 = segment(r, 0.25).size();
    CHECK(n05 == 2 * n1);
    CHECK(n025 == 4 * n1);
}

TEST_CASE("constant window has only DC") {
    std::vector<double> c(64, 3.5);
    auto s = fft_magnitude(c, 64.0);
    CHECK(s.magnitudes.size() == 33);
    CHECK(s.magnitudes[0] == doctest::Approx(3.5));
    for (std::size_t k = 1; k < s.magnitudes.size(); ++k) CHECK(std::abs(s.magnitudes[k]) < 1e-9);
    CHECK(s.bin_width == doctest::Approx(1.0));
}

TEST_CASE("bin-aligned sinusoid") {
    const std::size_t n = 256;
    const double a = 7.25;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a * std::sin(2 * std::numbers::pi * 20 * i / n);
    auto s = fft_magnitude(x, 256.0);
    auto ref = oracle::dft_magnitude(x, n);
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        if (k == 20)
            CHECK(s.magnitudes[k] == doctest::Approx(a).epsilon(1e-12));
        else
            CHECK(s.magnitudes[k] < 1e-9);
        CHECK(std::abs(s.magnitudes[k] - ref[k]) < 1e-9);
    }
}

TEST_CASE("padding and bin count") {
    CHECK(next_pow2(1) == 1);
    CHECK(next_pow2(425) == 512);
    CHECK(next_pow2(512) == 512);
    auto s = fft_magnitude(std::vector<double>(250, 1.0), 1000.0);
    CHECK(s.magnitudes.size() == 129);
    CHECK(s.bin_width == doctest::Approx(1000.0 / 256));
    CHECK(kind_of([] { fft_magnitude(std::vector<double>{}, 1.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("random windows match the direct DFT") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t len = 2 + rng.index(1024);
        std::vector<double> x(len);
        for (auto& v : x) v = std::abs(rng.normal()) * 100.0;
        const auto padded = oracle::pow2_at_least(len);
        auto s = fft_magnitude(x, 1000.0);
        auto ref = oracle::dft_magnitude(x, padded);
        REQUIRE(s.magnitudes.size() == ref.size());
        const double scale = *std::max_element(ref.begin(), ref.end());
        for (std::size_t k = 0; k < ref.size(); ++k)
            CHECK(std::abs(s.magnitudes[k] - ref[k]) <= 1e-9 * std::max(ref[k], 1e-3 * scale));
    }
}

TEST_CASE("forward then inverse restores the input; Parseval") {
    Rng rng(5);
    for (std::size_t n : {1u, 2u, 8u, 128u, 2048u}) {
        std::vector<std::complex<double>> x(n);
        for (auto& v : x) v = {rng.normal(), rng.normal()};
        auto y = x;
        fft(y);
        double e_time = 0, e_freq = 0;
        for (std::size_t i = 0; i < n; ++i) {
            e_time += std::norm(x[i]);
            e_freq += std::norm(y[i]);
        }
        CHECK(e_freq / n == doctest::Approx(e_time).epsilon(1e-12));
        fft(y, FftDirection::Inverse);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] / double(n) - x[i]) < 1e-12);
    }
}

TEST_CASE("magnitudes scale linearly") {
    Rng rng(3);
    std::vector<double> x(300);
    for (auto& v : x) v = rng.uniform();
    auto s1 = fft_magnitude(x, 100.0);
    for (auto& v : x) v *= 4.5;
    auto s2 = fft_magnitude(x, 100.0);
    for (std::size_t k = 0; k < s1.magnitudes.size(); ++k)
        CHECK(s2.magnitudes[k] == doctest::Approx(4.5 * s1.magnitudes[k]).epsilon(1e-12));
}

TEST_CASE("average peaks") {
    std::vector<Window> ws{{0, {1, 150, 3}}, {3, {160, 2, 0}}, {6, {0, 0, 140}}};
    CHECK(average_peak_time(ws) == doctest::Approx(150.0));
    CHECK(average_peak_time(std::span<const Window>(ws).first(1)) == 150.0);
    CHECK(kind_of([] { average_peak_time(std::vector<Window>{}); }) == ErrorKind::EmptyDataset);
    CHECK(kind_of([] { average_peak_frequency(std::vector<Window>{}, 100.0); }) == ErrorKind::EmptyDataset);

    // frequency variant ignores DC
    std::vector<Window> dc{{0, std::vector<double>(64, 5.0)}};
    CHECK(average_peak_frequency(dc, 64.0) < 1e-9);
}

}
