#include <doctest.h>

#include <filesystem>

#include "ergorisk/error.hpp"
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

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("parameter validation") {
    GeneratorParams p;
    validate(p);
    auto bad = [](auto mutate) {
        GeneratorParams q;
        mutate(q);
        return kind_of([&] { validate(q); });
    };
    CHECK(bad([](GeneratorParams& q) { q.sample_rate = 800; }) == ErrorKind::InvalidParameter);
    CHECK(bad([](GeneratorParams& q) { q.burst_seconds = 6; }) == ErrorKind::InvalidParameter);
    CHECK(bad([](GeneratorParams& q) { q.jitter = 1.0; }) == ErrorKind::InvalidParameter);
    CHECK(bad([](GeneratorParams& q) { q.band_low = 500; }) == ErrorKind::InvalidParameter);
}

TEST_CASE("10 lb session calibrates to about 150 uV") {
    GeneratorParams p;
    p.seed = 42;
    auto r = generate_session(protocol_task(10, 15), 60.0, p);
    CHECK(r.sample_rate == 1000.0);
    CHECK(r.samples.size() == 60'000);
    auto peak = average_peak_time(segment(rectify(r), kReferenceWindowSeconds));
    CHECK(peak >= 135.0);
    CHECK(peak <= 165.0);
}

TEST_CASE("peak grows with load") {
    GeneratorParams p;
    double prev = 0.0;
    for (double load : {10.0, 15.0, 20.0, 30.0, 35.0}) {
        auto r = generate_session(protocol_task(load, 15), 60.0, p);
        auto peak = average_peak_time(segment(rectify(r), kReferenceWindowSeconds));
        CHECK(peak > prev);
        prev = peak;
    }
}

TEST_CASE("determinism and errors") {
    GeneratorParams p;
    auto a = generate_session(protocol_task(20, 15), 12.0, p);
    auto b = generate_session(protocol_task(20, 15), 12.0, p);
    CHECK(a.samples == b.samples);
    p.seed = 8;
    auto c = generate_session(protocol_task(20, 15), 12.0, p);
    CHECK(a.samples != c.samples);
    CHECK(kind_of([&] { generate_session(protocol_task(20, 15), 0.0, p); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("band mask keeps out-of-band energy below 1%") {
    GeneratorParams p;
    auto r = generate_session(protocol_task(30, 15), 60.0, p);
    // the whole session in one transform
    auto s = fft_magnitude(r.samples, r.sample_rate);
    double in = 0, out = 0;
    for (std::size_t k = 1; k < s.magnitudes.size(); ++k) {
        const double f = k * s.bin_width, e = s.magnitudes[k] * s.magnitudes[k];
        (f >= p.band_low && f <= p.band_high ? in : out) += e;
    }
    CHECK(out / (in + out) < 0.01);
}

TEST_CASE("default corpus") {
    auto corpus = generate_corpus(SessionProtocol::table3(), 12.0, GeneratorParams{}, 4);
    REQUIRE(corpus.size() == 54);
    CHECK(corpus.front().meta.session_id == "S01");
    CHECK(corpus.back().meta.session_id == "S54");
    std::array<int, 3> labels{};
    for (const auto& r : corpus) ++labels[index_of(assess_session(*r.meta.task, UnitSystem::USCustomary, {}).label)];
    CHECK(labels == std::array<int, 3>{19, 20, 15});

    auto serial = generate_corpus(SessionProtocol::table3(), 12.0, GeneratorParams{}, 1);
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(serial[i].samples == corpus[i].samples);

    SessionProtocol one{{{1, 10, 15}}};
    CHECK(generate_corpus(one, 5.0, GeneratorParams{}).size() == 1);
    CHECK(kind_of([] { generate_corpus(SessionProtocol{}, 5.0, GeneratorParams{}); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("shipped protocol file equals the built-in table") {
    auto p = SessionProtocol::from_csv(std::string(ERGORISK_DATA_DIR) + "/table3_protocol.csv");
    auto t = SessionProtocol::table3();
    REQUIRE(p.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        CHECK(p.rows[i].session_count == t.rows[i].session_count);
        CHECK(p.rows[i].load == t.rows[i].load);
        CHECK(p.rows[i].h == t.rows[i].h);
    }
    CHECK(t.total_sessions() == 54);
}

TEST_CASE("corpus round trip through disk") {
    SessionProtocol proto{{{2, 10, 15}, {1, 35, 17}}};
    auto corpus = generate_corpus(proto, 3.0, GeneratorParams{});
    auto dir = std::filesystem::temp_directory_path() / "ergorisk_corpus_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_corpus(dir, corpus);
    auto back = read_corpus(dir / "manifest.csv");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].samples == corpus[i].samples);
        CHECK(back[i].sample_rate == doctest::Approx(1000.0));
        CHECK(back[i].meta.task->weight == corpus[i].meta.task->weight);
        CHECK(back[i].meta.task->h == corpus[i].meta.task->h);
    }
    std::filesystem::remove_all(dir);
}

}
