#include <doctest.h>

#include <cmath>

#include "ergorisk/error.hpp"
#include "ergorisk/niosh.hpp"

using namespace ergorisk;

namespace {

LiftingTask origin_task() { return {10, 15, 14, 18, 0, Coupling::Good, 10, DurationClass::UpTo1h}; }

double r2(double x) { return round_half_up(x, 2); }

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

TEST_SUITE("niosh") {

TEST_CASE("load constants") {
    CHECK(load_constant(UnitSystem::USCustomary) == 51.0);
    CHECK(load_constant(UnitSystem::Metric) == 23.0);
}

TEST_CASE("origin multipliers at two decimals") {
    auto m = compute_multipliers(origin_task(), UnitSystem::USCustomary);
    CHECK(r2(m.hm) == 0.67);
    CHECK(r2(m.vm) == 0.88);
    CHECK(r2(m.dm) == 0.92);
    CHECK(r2(m.am) == 1.00);
    CHECK(r2(m.fm) == 0.45);
    CHECK(r2(m.cm) == 1.00);
}

TEST_CASE("destination multipliers at two decimals") {
    auto t = origin_task();
    t.h = 24;
    t.v = 32;
    auto m = compute_multipliers(t, UnitSystem::USCustomary);
    CHECK(r2(m.hm) == 0.42);
    CHECK(r2(m.vm) == 0.99);
    CHECK(r2(m.dm) == 0.92);
    CHECK(r2(m.am) == 1.00);
    CHECK(r2(m.fm) == 0.45);
    CHECK(r2(m.cm) == 1.00);
}

TEST_CASE("neutral posture gives unit geometric multipliers") {
    LiftingTask t{10, 10, 30, 10, 0, Coupling::Good, 1, DurationClass::UpTo1h};
    auto m = compute_multipliers(t, UnitSystem::USCustomary);
    CHECK(m.hm == doctest::Approx(1.0));
    CHECK(m.vm == doctest::Approx(1.0));
    CHECK(m.dm == doctest::Approx(1.0));
    CHECK(m.am == doctest::Approx(1.0));
    LiftingTask metric{10, 25, 75, 25, 0, Coupling::Good, 1, DurationClass::UpTo1h};
    auto mm = compute_multipliers(metric, UnitSystem::Metric);
    CHECK(mm.hm == doctest::Approx(1.0));
    CHECK(mm.vm == doctest::Approx(1.0));
    CHECK(mm.dm == doctest::Approx(1.0));
}

TEST_CASE("out of range geometry zeroes the multiplier") {
    auto t = origin_task();
    t.h = 26;
    CHECK(compute_multipliers(t, UnitSystem::USCustomary).hm == 0.0);
    t = origin_task();
    t.v = 71;
    CHECK(compute_multipliers(t, UnitSystem::USCustomary).vm == 0.0);
    t = origin_task();
    t.d = 71;
    CHECK(compute_multipliers(t, UnitSystem::USCustomary).dm == 0.0);
    t = origin_task();
    t.h = 64;
    CHECK(compute_multipliers(t, UnitSystem::Metric).hm == 0.0);
    // close reach clamps to 1
    t = origin_task();
    t.h = 5;
    CHECK(compute_multipliers(t, UnitSystem::USCustomary).hm == 1.0);
}

TEST_CASE("frequency multiplier lookups") {
    CHECK(lookup_frequency_multiplier(10, DurationClass::UpTo1h, 14) == doctest::Approx(0.45));
    CHECK(lookup_frequency_multiplier(0.2, DurationClass::UpTo1h, 32) == doctest::Approx(1.00));
    CHECK(lookup_frequency_multiplier(0.1, DurationClass::UpTo1h, 32) == doctest::Approx(1.00));
    for (auto d : {DurationClass::UpTo1h, DurationClass::UpTo2h, DurationClass::UpTo8h})
        for (double v : {10.0, 40.0}) CHECK(lookup_frequency_multiplier(16, d, v) == 0.0);
    // between rows the next higher frequency applies
    CHECK(lookup_frequency_multiplier(9.5, DurationClass::UpTo1h, 14) ==
          lookup_frequency_multiplier(10, DurationClass::UpTo1h, 14));
}

TEST_CASE("coupling multiplier lookups") {
    CHECK(lookup_coupling_multiplier(Coupling::Good, 14) == 1.0);
    CHECK(lookup_coupling_multiplier(Coupling::Good, 32) == 1.0);
    CHECK(lookup_coupling_multiplier(Coupling::Poor, 14) == doctest::Approx(0.90));
    CHECK(lookup_coupling_multiplier(Coupling::Fair, 14) == doctest::Approx(0.95));
    CHECK(lookup_coupling_multiplier(Coupling::Fair, 32) == doctest::Approx(1.00));
}

TEST_CASE("shipped table files equal the embedded tables") {
    const std::string dir = ERGORISK_DATA_DIR;
    auto fm = FrequencyTable::from_csv(dir + "/niosh_fm_v1.csv");
    const auto& std_fm = FrequencyTable::standard();
    REQUIRE(fm.rows().size() == std_fm.rows().size());
    for (std::size_t i = 0; i < fm.rows().size(); ++i) {
        CHECK(fm.rows()[i].frequency == std_fm.rows()[i].frequency);
        CHECK(fm.rows()[i].values == std_fm.rows()[i].values);
    }
    auto cm = CouplingTable::from_csv(dir + "/niosh_cm_v1.csv");
    CHECK(cm.values() == CouplingTable::standard().values());
}

TEST_CASE("RWL and LI for the experiment rows") {
    auto r = compute_rwl(origin_task(), UnitSystem::USCustomary);
    CHECK(std::abs(r2(r.rwl) - 12.40) <= 0.01 + 1e-12);
    CHECK(r.rwl == doctest::Approx(51.0 * r.multipliers.product()).epsilon(1e-9));

    auto t17 = origin_task();
    t17.h = 17;
    CHECK(std::abs(compute_rwl(t17, UnitSystem::USCustomary).rwl - 11.00) <= 0.1);

    MultiplierSet ones;
    CHECK(recommended_weight_limit(ones, UnitSystem::USCustomary) == 51.0);

    struct Row {
        double load, h, li;
        RiskLabel label;
    };
    const Row rows[] = {{10, 15, 0.8, RiskLabel::Nominal},  {15, 15, 1.2, RiskLabel::Nominal},
                        {20, 15, 1.6, RiskLabel::Increased}, {30, 15, 2.4, RiskLabel::Increased},
                        {35, 15, 2.8, RiskLabel::High},      {35, 17, 3.2, RiskLabel::High}};
    for (const auto& row : rows) {
        auto t = origin_task();
        t.weight = row.load;
        t.h = row.h;
        auto a = assess_session(t, UnitSystem::USCustomary, RiskThresholds{});
        CAPTURE(row.load);
        CAPTURE(row.h);
        CHECK(a.li_reported == doctest::Approx(row.li));
        CHECK(a.label == row.label);
    }
}

TEST_CASE("lifting index") {
    CHECK(round_half_up(lifting_index(10, 12.40), 1) == doctest::Approx(0.8));
    CHECK(lifting_index(12.40, 12.40) == 1.0);
    CHECK(round_half_up(lifting_index(35, 11.00), 1) == doctest::Approx(3.2));
    CHECK(kind_of([] { lifting_index(10, 0); }) == ErrorKind::DivisionUndefined);
    double prev = -1;
    for (double w = 0; w < 60; w += 0.5) {
        double li = lifting_index(w, 12.4);
        CHECK(li > prev);
        prev = li;
    }
}

TEST_CASE("classify_risk bands and monotonicity") {
    RiskThresholds t;
    CHECK(classify_risk(0.8, t) == RiskLabel::Nominal);
    CHECK(classify_risk(1.2, t) == RiskLabel::Nominal);
    CHECK(classify_risk(1.6, t) == RiskLabel::Increased);
    CHECK(classify_risk(2.8, t) == RiskLabel::High);
    CHECK(classify_risk(3.2, t) == RiskLabel::High);
    auto g = RiskThresholds::guideline();
    CHECK(classify_risk(1.2, g) == RiskLabel::Increased);
    CHECK(classify_risk(2.8, g) == RiskLabel::Increased);
    int prev = 0;
    for (double li = 0; li < 5; li += 0.01) {
        int l = index_of(classify_risk(li, t));
        CHECK(l >= prev);
        prev = l;
    }
    CHECK(kind_of([] { validate(RiskThresholds{2.0, 1.0}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { validate(RiskThresholds{0.0, 1.0}); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("RWL is monotone in H, D, A and |V - 30|") {
    auto rwl = [](LiftingTask t) { return compute_rwl(t, UnitSystem::USCustomary).rwl; };
    auto base = origin_task();
    double prev = 1e9;
    for (double h = 10; h <= 25; h += 0.5) {
        auto t = base;
        t.h = h;
        CHECK(rwl(t) <= prev + 1e-12);
        prev = rwl(t);
    }
    prev = 1e9;
    for (double d = 10; d <= 70; d += 1) {
        auto t = base;
        t.d = d;
        CHECK(rwl(t) <= prev + 1e-12);
        prev = rwl(t);
    }
    prev = 1e9;
    for (double a = 0; a <= 135; a += 5) {
        auto t = base;
        t.a = a;
        CHECK(rwl(t) <= prev + 1e-12);
        prev = rwl(t);
    }
    // V on one side of the column split, so FM/CM stay fixed
    prev = 1e9;
    for (double v = 29.5; v >= 0; v -= 0.5) {
        auto t = base;
        t.v = v;
        CHECK(rwl(t) <= prev + 1e-12);
        prev = rwl(t);
    }
}

TEST_CASE("multipliers stay in [0, 1] and RWL in [0, LC]") {
    for (double h = 1; h <= 30; h += 3)
        for (double v = 0; v <= 80; v += 8)
            for (double d = 0; d <= 80; d += 8)
                for (double a = 0; a <= 135; a += 45)
                    for (auto c : {Coupling::Good, Coupling::Fair, Coupling::Poor}) {
                        LiftingTask t{10, h, v, d, a, c, 4, DurationClass::UpTo2h};
                        auto r = compute_rwl(t, UnitSystem::USCustomary);
                        for (double m : {r.multipliers.hm, r.multipliers.vm, r.multipliers.dm, r.multipliers.am,
                                         r.multipliers.fm, r.multipliers.cm}) {
                            CHECK(m >= 0.0);
                            CHECK(m <= 1.0);
                        }
                        CHECK(r.rwl >= 0.0);
                        CHECK(r.rwl <= 51.0);
                    }
}

TEST_CASE("invalid tasks are rejected") {
    auto bad = [](auto mutate) {
        auto t = origin_task();
        mutate(t);
        return kind_of([&] { compute_multipliers(t, UnitSystem::USCustomary); });
    };
    CHECK(bad([](LiftingTask& t) { t.h = 0; }) == ErrorKind::InvalidTask);
    CHECK(bad([](LiftingTask& t) { t.v = -1; }) == ErrorKind::InvalidTask);
    CHECK(bad([](LiftingTask& t) { t.d = NAN; }) == ErrorKind::InvalidTask);
    CHECK(bad([](LiftingTask& t) { t.frequency = 0; }) == ErrorKind::InvalidTask);
    CHECK(bad([](LiftingTask& t) { t.weight = -2; }) == ErrorKind::InvalidTask);
}

TEST_CASE("manifest round trip") {
    std::vector<ManifestRow> rows{{"S01", origin_task()}, {"S02", origin_task()}};
    rows[1].task.coupling = Coupling::Poor;
    rows[1].task.duration = DurationClass::UpTo8h;
    auto back = parse_manifest(manifest_to_csv(rows));
    REQUIRE(back.size() == 2);
    CHECK(back[1].session_id == "S02");
    CHECK(back[1].task.coupling == Coupling::Poor);
    CHECK(back[1].task.duration == DurationClass::UpTo8h);
    CHECK(back[0].task.h == 15);
    CHECK(kind_of([] { parse_manifest("session_id,load_lb\nS01,10\n"); }) == ErrorKind::MalformedInput);
}

TEST_CASE("label names") {
    CHECK(parse_risk_label("Nominal") == RiskLabel::Nominal);
    CHECK(parse_risk_label("HR") == RiskLabel::High);
    CHECK(short_code(RiskLabel::Increased) == "IR");
    CHECK(RiskLabel::Nominal < RiskLabel::Increased);
    CHECK(RiskLabel::Increased < RiskLabel::High);
}

}
