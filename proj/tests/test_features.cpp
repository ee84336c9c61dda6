#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ergorisk/error.hpp"
#include "ergorisk/features.hpp"
#include "ergorisk/random.hpp"
#include "ergorisk/synth.hpp"

using namespace ergorisk;

namespace {

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

EmgRecording session(double seconds, double rate, double load, double h, std::string id = "S01") {
    EmgRecording r;
    r.sample_rate = rate;
    r.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
    Rng rng(std::hash<std::string>{}(id));
    for (auto& v : r.samples) v = rng.normal() * 50;
    r.meta.session_id = id;
    r.meta.task = protocol_task(load, h);
    return r;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("fixed 8-sample window") {
    // frozen from a direct DFT: bins 1 and 3 are sqrt(5/4 +- 7 sqrt(2)/8), bins 2 and 4 vanish
    Window w{0, {1, 2, 3, 4, 4, 3, 2, 1}};
    auto f = extract_window_features(w, 8.0, 10, 15);
    CHECK(f.weight == 10);
    CHECK(f.h == 15);
    CHECK(f.fft_max == doctest::Approx(1.5771610149494750).epsilon(1e-13));
    CHECK(std::abs(f.fft_min) < 1e-12);
    CHECK(f.fft_mean == doctest::Approx(0.42231159931036657).epsilon(1e-13));
    CHECK(f.fft_median == doctest::Approx(0.056042691145995640).epsilon(1e-12));
    CHECK(f.fft_std == doctest::Approx(0.66832096562050213).epsilon(1e-13));
}

TEST_CASE("zero window") {
    Window w{0, std::vector<double>(32, 0.0)};
    auto f = extract_window_features(w, 100.0, 10, 15);
    CHECK(f == FeatureVector{10, 15, 0, 0, 0, 0, 0});
}

TEST_CASE("bin-aligned sinusoid") {
    const double a = 3.0;
    Window w{0, std::vector<double>(128)};
    for (std::size_t i = 0; i < 128; ++i) w.values[i] = a * std::cos(2 * std::numbers::pi * 8 * i / 128);
    auto f = extract_window_features(w, 128.0, 1, 1);
    CHECK(f.fft_max == doctest::Approx(a).epsilon(1e-12));
    CHECK(f.fft_min < 1e-9);
    CHECK(f.fft_mean == doctest::Approx(a / 64).epsilon(1e-9));
    CHECK(f.fft_median < 1e-9);
}

TEST_CASE("single-sample window has no spectral bins") {
    CHECK(kind_of([] { extract_window_features(Window{0, {1.0}}, 100.0, 1, 1); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("scaling and determinism") {
    Rng rng(9);
    Window w{0, std::vector<double>(200)};
    for (auto& v : w.values) v = std::abs(rng.normal());
    auto f1 = extract_window_features(w, 1000.0, 20, 15);
    CHECK(extract_window_features(w, 1000.0, 20, 15) == f1);
    auto scaled = w;
    for (auto& v : scaled.values) v *= 2.5;
    auto f2 = extract_window_features(scaled, 1000.0, 20, 15);
    CHECK(f2.weight == f1.weight);
    CHECK(f2.h == f1.h);
    CHECK(f2.fft_max == doctest::Approx(2.5 * f1.fft_max).epsilon(1e-12));
    CHECK(f2.fft_min == doctest::Approx(2.5 * f1.fft_min).epsilon(1e-9));
    CHECK(f2.fft_mean == doctest::Approx(2.5 * f1.fft_mean).epsilon(1e-12));
    CHECK(f2.fft_median == doctest::Approx(2.5 * f1.fft_median).epsilon(1e-12));
    CHECK(f2.fft_std == doctest::Approx(2.5 * f1.fft_std).epsilon(1e-12));
    CHECK(f1.fft_min <= f1.fft_median);
    CHECK(f1.fft_median <= f1.fft_max);
}

TEST_CASE("build_dataset: one session") {
    std::vector<EmgRecording> rs{session(10.0, 100.0, 10, 15)};
    auto d = build_dataset(rs, 1.0, RiskThresholds{});
    CHECK(d.size() == 10);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d.examples[i].label == RiskLabel::Nominal);
        CHECK(d.examples[i].window_index == i);
        CHECK(d.examples[i].session_id == "S01");
        CHECK(d.examples[i].features.weight == 10);
    }
    CHECK(d.window_seconds == 1.0);
}

TEST_CASE("build_dataset: sizes, labels and errors") {
    std::vector<EmgRecording> rs{session(10.6, 100.0, 10, 15, "A"), session(0.5, 100.0, 35, 15, "B"),
                                 session(4.0, 100.0, 35, 17, "C")};
    auto d = build_dataset(rs, 1.0, RiskThresholds{});
    CHECK(d.size() == 14);
    CHECK(d.label_counts() == std::array<std::size_t, 3>{10, 0, 4});
    CHECK(d.examples.back().session_id == "C");

    std::vector<EmgRecording> tiny{session(0.5, 100.0, 10, 15)};
    CHECK(kind_of([&] { build_dataset(tiny, 1.0, RiskThresholds{}); }) == ErrorKind::EmptyDataset);
    auto notask = rs;
    notask[0].meta.task.reset();
    CHECK(kind_of([&] { build_dataset(notask, 1.0, RiskThresholds{}); }) == ErrorKind::MalformedInput);

    // thread count never changes the result
    auto d4 = build_dataset(rs, 0.25, RiskThresholds{}, UnitSystem::USCustomary, "", 4);
    auto d1 = build_dataset(rs, 0.25, RiskThresholds{}, UnitSystem::USCustomary, "", 1);
    CHECK(dataset_to_csv(d4) == dataset_to_csv(d1));
}

TEST_CASE("dataset CSV round trip") {
    std::vector<EmgRecording> rs{session(3.0, 200.0, 20, 15, "X"), session(3.0, 200.0, 35, 17, "Y")};
    auto d = build_dataset(rs, 0.5, RiskThresholds{}, UnitSystem::USCustomary, "unit test");
    auto path = std::filesystem::temp_directory_path() / "ergorisk_dataset.csv";
    write_dataset(path, d);
    auto back = read_dataset(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.examples[i].features == d.examples[i].features);
        CHECK(back.examples[i].label == d.examples[i].label);
        CHECK(back.examples[i].session_id == d.examples[i].session_id);
        CHECK(back.examples[i].window_index == d.examples[i].window_index);
    }
    CHECK(dataset_to_csv(back) == dataset_to_csv(d));
    CHECK(dataset_to_csv(d).rfind("weight,h,fft_max,fft_min,fft_mean,fft_median,fft_std,label,session_id,window_index\n", 0) == 0);
    CHECK(kind_of([] { parse_dataset("weight,h\n1,2\n"); }) == ErrorKind::MalformedInput);
}

TEST_CASE("dataset validation") {
    Dataset d;
    CHECK(kind_of([&] { validate(d); }) == ErrorKind::EmptyDataset);
    d.examples.push_back({FeatureVector{1, 1, 1, 2, 1.5, 1.5, 0}, RiskLabel::Nominal, "S", 0});
    CHECK(kind_of([&] { validate(d); }) == ErrorKind::MalformedInput);
    d.examples[0].features = FeatureVector{1, 1, 2, 1, 1.5, 1.5, 0.2};
    validate(d);
}

}
