#include "ergorisk/niosh.hpp"

#include <algorithm>
#include <cmath>

#include "ergorisk/csv.hpp"
#include "ergorisk/error.hpp"

namespace ergorisk {

namespace {

// Per-unit geometry constants of the lifting equation.
struct Geometry {
    double h_ref;      // HM = h_ref / H
    double h_max;
    double v_ref;      // VM = 1 - v_coef * |V - v_ref|
    double v_coef;
    double v_max;
    double d_ref;      // DM = 0.82 + d_coef / D
    double d_coef;
    double d_max;
    double v_column;   // FM/CM column split
};

constexpr Geometry kUs{10.0, 25.0, 30.0, 0.0075, 70.0, 10.0, 1.8, 70.0, 30.0};
constexpr Geometry kMetric{25.0, 63.0, 75.0, 0.003, 175.0, 25.0, 4.5, 175.0, 75.0};

constexpr double kMaxAsymmetry = 135.0;

const Geometry& geometry(UnitSystem unit) {
    return unit == UnitSystem::Metric ? kMetric : kUs;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Applications Manual frequency multiplier table. Columns per duration class
// are {V < 30 in, V >= 30 in}.
std::vector<FrequencyRow> standard_frequency_rows() {
    return {
        {0.2, {{{1.00, 1.00}, {0.95, 0.95}, {0.85, 0.85}}}},
        {0.5, {{{0.97, 0.97}, {0.92, 0.92}, {0.81, 0.81}}}},
        {1, {{{0.94, 0.94}, {0.88, 0.88}, {0.75, 0.75}}}},
        {2, {{{0.91, 0.91}, {0.84, 0.84}, {0.65, 0.65}}}},
        {3, {{{0.88, 0.88}, {0.79, 0.79}, {0.55, 0.55}}}},
        {4, {{{0.84, 0.84}, {0.72, 0.72}, {0.45, 0.45}}}},
        {5, {{{0.80, 0.80}, {0.60, 0.60}, {0.35, 0.35}}}},
        {6, {{{0.75, 0.75}, {0.50, 0.50}, {0.27, 0.27}}}},
        {7, {{{0.70, 0.70}, {0.42, 0.42}, {0.22, 0.22}}}},
        {8, {{{0.60, 0.60}, {0.35, 0.35}, {0.18, 0.18}}}},
        {9, {{{0.52, 0.52}, {0.30, 0.30}, {0.00, 0.15}}}},
        {10, {{{0.45, 0.45}, {0.26, 0.26}, {0.00, 0.13}}}},
        {11, {{{0.41, 0.41}, {0.00, 0.23}, {0.00, 0.00}}}},
        {12, {{{0.37, 0.37}, {0.00, 0.21}, {0.00, 0.00}}}},
        {13, {{{0.00, 0.34}, {0.00, 0.00}, {0.00, 0.00}}}},
        {14, {{{0.00, 0.31}, {0.00, 0.00}, {0.00, 0.00}}}},
        {15, {{{0.00, 0.28}, {0.00, 0.00}, {0.00, 0.00}}}},
    };
}

const char* const kFmColumns[3][2] = {{"h1_v_low", "h1_v_high"},
                                      {"h2_v_low", "h2_v_high"},
                                      {"h8_v_low", "h8_v_high"}};

}  // namespace

double load_constant(UnitSystem unit) { return unit == UnitSystem::Metric ? 23.0 : 51.0; }

void validate(const LiftingTask& t) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidTask, msg); };
    for (double x : {t.weight, t.h, t.v, t.d, t.a, t.frequency})
        if (!std::isfinite(x)) fail("lifting task has a non-finite field");
    if (t.h <= 0.0) fail("horizontal location must be > 0");
    if (t.v < 0.0) fail("vertical location must be >= 0");
    if (t.d < 0.0) fail("travel distance must be >= 0");
    if (t.a < 0.0) fail("asymmetry angle must be >= 0");
    if (t.frequency <= 0.0) fail("lift frequency must be > 0");
    if (t.weight < 0.0) fail("load weight must be >= 0");
}

std::string_view to_string(RiskLabel label) {
    switch (label) {
        case RiskLabel::Nominal: return "Nominal";
        case RiskLabel::Increased: return "Increased";
        case RiskLabel::High: return "High";
    }
    return "?";
}

std::string_view short_code(RiskLabel label) {
    switch (label) {
        case RiskLabel::Nominal: return "NR";
        case RiskLabel::Increased: return "IR";
        case RiskLabel::High: return "HR";
    }
    return "?";
}

RiskLabel parse_risk_label(std::string_view text) {
    auto s = lower(text);
    if (s == "nominal" || s == "nr" || s == "0") return RiskLabel::Nominal;
    if (s == "increased" || s == "ir" || s == "1") return RiskLabel::Increased;
    if (s == "high" || s == "hr" || s == "2") return RiskLabel::High;
    throw Error(ErrorKind::MalformedInput, "unknown risk label '" + std::string(text) + "'");
}

std::string_view to_string(Coupling c) {
    switch (c) {
        case Coupling::Good: return "good";
        case Coupling::Fair: return "fair";
        case Coupling::Poor: return "poor";
    }
    return "?";
}

Coupling parse_coupling(std::string_view text) {
    auto s = lower(text);
    if (s == "good") return Coupling::Good;
    if (s == "fair") return Coupling::Fair;
    if (s == "poor") return Coupling::Poor;
    throw Error(ErrorKind::MalformedInput, "unknown coupling '" + std::string(text) + "'");
}

std::string_view to_string(DurationClass d) {
    switch (d) {
        case DurationClass::UpTo1h: return "1h";
        case DurationClass::UpTo2h: return "2h";
        case DurationClass::UpTo8h: return "8h";
    }
    return "?";
}

DurationClass parse_duration(std::string_view text) {
    auto s = lower(text);
    if (s == "1h" || s == "upto1h") return DurationClass::UpTo1h;
    if (s == "2h" || s == "upto2h") return DurationClass::UpTo2h;
    if (s == "8h" || s == "upto8h") return DurationClass::UpTo8h;
    throw Error(ErrorKind::MalformedInput, "unknown duration class '" + std::string(text) + "'");
}

void validate(const RiskThresholds& t) {
    if (!(std::isfinite(t.t_nominal) && std::isfinite(t.t_high) && t.t_nominal > 0.0 &&
          t.t_nominal < t.t_high)) {
        throw Error(ErrorKind::InvalidParameter, "risk thresholds must satisfy 0 < t_nominal < t_high");
    }
}

// ---------------------------------------------------------------------------

FrequencyTable::FrequencyTable(std::vector<FrequencyRow> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw Error(ErrorKind::MalformedInput, "frequency table has no rows");
    for (std::size_t i = 1; i < rows_.size(); ++i) {
        if (!(rows_[i].frequency > rows_[i - 1].frequency))
            throw Error(ErrorKind::MalformedInput, "frequency table rows must be increasing");
    }
    for (const auto& r : rows_)
        for (const auto& d : r.values)
            for (double x : d)
                if (!(x >= 0.0 && x <= 1.0))
                    throw Error(ErrorKind::MalformedInput, "frequency multiplier outside [0, 1]");
}

const FrequencyTable& FrequencyTable::standard() {
    static const FrequencyTable table(standard_frequency_rows());
    return table;
}

FrequencyTable FrequencyTable::from_csv(const std::filesystem::path& path) {
    auto t = csv::read(path);
    auto fcol = t.column("freq_per_min");
    std::vector<FrequencyRow> rows;
    for (const auto& r : t.rows) {
        FrequencyRow row;
        row.frequency = csv::to_double(r[fcol], "freq_per_min");
        for (int d = 0; d < 3; ++d)
            for (int v = 0; v < 2; ++v)
                row.values[d][v] = csv::to_double(r[t.column(kFmColumns[d][v])], kFmColumns[d][v]);
        rows.push_back(row);
    }
    return FrequencyTable(std::move(rows));
}

double FrequencyTable::lookup(double frequency, DurationClass duration, bool v_high) const {
    for (const auto& row : rows_) {
        if (frequency <= row.frequency)
            return row.values[static_cast<int>(duration)][v_high ? 1 : 0];
    }
    return 0.0;
}

const CouplingTable& CouplingTable::standard() {
    static const CouplingTable table({{{1.00, 1.00}, {0.95, 1.00}, {0.90, 0.90}}});
    return table;
}

CouplingTable CouplingTable::from_csv(const std::filesystem::path& path) {
    auto t = csv::read(path);
    auto ccol = t.column("coupling");
    auto lo = t.column("v_low");
    auto hi = t.column("v_high");
    std::array<std::array<double, 2>, 3> values{};
    std::array<bool, 3> seen{};
    for (const auto& r : t.rows) {
        auto c = static_cast<int>(parse_coupling(r[ccol]));
        values[c] = {csv::to_double(r[lo], "v_low"), csv::to_double(r[hi], "v_high")};
        seen[c] = true;
    }
    for (bool s : seen)
        if (!s) throw Error(ErrorKind::MalformedInput, "coupling table must list good, fair and poor");
    return CouplingTable(values);
}

double CouplingTable::lookup(Coupling coupling, bool v_high) const {
    return values_[static_cast<int>(coupling)][v_high ? 1 : 0];
}

double lookup_frequency_multiplier(double frequency, DurationClass duration, double v,
                                   UnitSystem unit) {
    return FrequencyTable::standard().lookup(frequency, duration, v >= geometry(unit).v_column);
}

double lookup_coupling_multiplier(Coupling coupling, double v, UnitSystem unit) {
    return CouplingTable::standard().lookup(coupling, v >= geometry(unit).v_column);
}

// ---------------------------------------------------------------------------

MultiplierSet compute_multipliers(const LiftingTask& task, UnitSystem unit) {
    validate(task);
    const auto& g = geometry(unit);
    MultiplierSet m;
    m.hm = task.h > g.h_max ? 0.0 : clamp01(g.h_ref / task.h);
    m.vm = task.v > g.v_max ? 0.0 : clamp01(1.0 - g.v_coef * std::abs(task.v - g.v_ref));
    if (task.d > g.d_max)
        m.dm = 0.0;
    else if (task.d <= g.d_ref)
        m.dm = 1.0;
    else
        m.dm = clamp01(0.82 + g.d_coef / task.d);
    m.am = task.a > kMaxAsymmetry ? 0.0 : clamp01(1.0 - 0.0032 * task.a);
    m.fm = lookup_frequency_multiplier(task.frequency, task.duration, task.v, unit);
    m.cm = lookup_coupling_multiplier(task.coupling, task.v, unit);
    return m;
}

double recommended_weight_limit(const MultiplierSet& m, UnitSystem unit) {
    return load_constant(unit) * m.product();
}

RwlResult compute_rwl(const LiftingTask& task, UnitSystem unit, Location location) {
    RwlResult r;
    r.multipliers = compute_multipliers(task, unit);
    r.rwl = recommended_weight_limit(r.multipliers, unit);
    r.location = location;
    return r;
}

double lifting_index(double weight, double rwl) {
    if (rwl == 0.0)
        throw Error(ErrorKind::DivisionUndefined, "lifting index undefined: RWL is 0 (task outside valid range)");
    return weight / rwl;
}

RiskLabel classify_risk(double li, const RiskThresholds& t) {
    if (li <= t.t_nominal) return RiskLabel::Nominal;
    if (li >= t.t_high) return RiskLabel::High;
    return RiskLabel::Increased;
}

double round_half_up(double x, int decimals) {
    double scale = std::pow(10.0, decimals);
    double scaled = x * scale;
    return std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled))) / scale;
}

SessionAssessment assess_session(const LiftingTask& task, UnitSystem unit,
                                 const RiskThresholds& thresholds) {
    validate(thresholds);
    SessionAssessment s;
    s.origin = compute_rwl(task, unit, Location::Origin);
    s.li = lifting_index(task.weight, s.origin.rwl);
    s.li_reported = round_half_up(s.li, 1);
    s.label = classify_risk(s.li_reported, thresholds);
    return s;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<ManifestRow> manifest_from_table(const csv::Table& t) {
    const auto id = t.column("session_id");
    const auto load = t.column("load_lb");
    const auto h = t.column("h_in");
    const auto v = t.column("v_in");
    const auto d = t.column("d_in");
    const auto a = t.column("a_deg");
    const auto c = t.column("coupling");
    const auto f = t.column("freq_per_min");
    const auto dur = t.column("duration_class");
    std::vector<ManifestRow> rows;
    for (const auto& r : t.rows) {
        ManifestRow m;
        m.session_id = r[id];
        if (m.session_id.empty()) throw Error(ErrorKind::MalformedInput, "manifest row without session_id");
        m.task.weight = csv::to_double(r[load], "load_lb");
        m.task.h = csv::to_double(r[h], "h_in");
        m.task.v = csv::to_double(r[v], "v_in");
        m.task.d = csv::to_double(r[d], "d_in");
        m.task.a = csv::to_double(r[a], "a_deg");
        m.task.coupling = parse_coupling(r[c]);
        m.task.frequency = csv::to_double(r[f], "freq_per_min");
        m.task.duration = parse_duration(r[dur]);
        validate(m.task);
        rows.push_back(std::move(m));
    }
    return rows;
}

}  // namespace

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    return manifest_from_table(csv::read(path));
}

std::vector<ManifestRow> parse_manifest(std::string_view csv_text, const std::string& source_name) {
    return manifest_from_table(csv::parse(csv_text, source_name));
}

std::string manifest_to_csv(const std::vector<ManifestRow>& rows) {
    std::string out = "session_id,load_lb,h_in,v_in,d_in,a_deg,coupling,freq_per_min,duration_class\n";
    for (const auto& r : rows) {
        const auto& t = r.task;
        out += r.session_id;
        for (double x : {t.weight, t.h, t.v, t.d, t.a}) {
            out += ',';
            out += csv::format(x);
        }
        out += ',';
        out += to_string(t.coupling);
        out += ',';
        out += csv::format(t.frequency);
        out += ',';
        out += to_string(t.duration);
        out += '\n';
    }
    return out;
}

}  // namespace ergorisk
