#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ergorisk/csv.hpp"
#include "ergorisk/error.hpp"
#include "ergorisk/pipeline.hpp"

namespace ergorisk {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        auto pos = s.find(',');
        auto item = trim(s.substr(0, pos));
        if (!item.empty()) out.push_back(item);
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

[[noreturn]] void bad(std::string_view key, const std::string& why) {
    throw Error(ErrorKind::InvalidParameter, "config '" + std::string(key) + "': " + why);
}

double parse_number(std::string_view key, std::string_view v) {
    try {
        return csv::to_double(trim(v), key);
    } catch (const Error&) {
        bad(key, "'" + std::string(v) + "' is not a number");
    }
}

std::uint64_t parse_count(std::string_view key, std::string_view v) {
    v = trim(v);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
        bad(key, "'" + std::string(v) + "' is not a non-negative integer");
    return out;
}

std::string fmt_pct(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * fraction;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void validate(const PipelineConfig& c) {
    auto fail = [](const char* key, const std::string& why) { bad(key, why); };
    if (c.algorithms.empty()) fail("algorithms", "at least one algorithm is required");
    if (c.windows.empty()) fail("windows", "at least one window size is required");
    for (double w : c.windows)
        if (!(w > 0.0) || !std::isfinite(w)) fail("windows", "window sizes must be positive");
    for (const auto& a : c.algorithms) {
        try {
            validate(a);
        } catch (const Error& e) {
            fail("algorithms", e.what());
        }
    }
    try {
        validate(c.holdout);
    } catch (const Error& e) {
        fail("reps/test_fraction", e.what());
    }
    try {
        validate(c.thresholds);
    } catch (const Error& e) {
        fail("thresholds", e.what());
    }
    if (c.manifest && c.protocol) fail("manifest/protocol", "give either a manifest or a protocol, not both");
    if (!(c.session_seconds > 0.0) || !std::isfinite(c.session_seconds))
        fail("session_seconds", "must be positive");
    if (!(c.jitter >= 0.0 && c.jitter < 1.0)) fail("jitter", "must lie in [0, 1)");
    if (c.k_max < 1) fail("k_max", "must be >= 1");
    if (c.out.empty()) fail("out", "output directory must not be empty");
}

void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "units") {
        if (value == "us") c.unit = UnitSystem::USCustomary;
        else if (value == "metric") c.unit = UnitSystem::Metric;
        else bad(key, "expected us or metric");
    } else if (key == "thresholds") {
        auto parts = split_list(value);
        if (parts.size() == 1 && parts[0] == "guideline") {
            c.thresholds = RiskThresholds::guideline();
            return;
        }
        if (parts.size() == 1 && parts[0] == "table") {
            c.thresholds = RiskThresholds::table_banding();
            return;
        }
        if (parts.size() != 2) bad(key, "expected t_nom,t_high");
        c.thresholds = {parse_number(key, parts[0]), parse_number(key, parts[1])};
    } else if (key == "windows") {
        c.windows.clear();
        for (auto p : split_list(value)) c.windows.push_back(parse_number(key, p));
    } else if (key == "algorithms" || key == "algo") {
        c.algorithms.clear();
        for (auto p : split_list(value)) {
            try {
                c.algorithms.push_back(parse_algorithm(p));
            } catch (const Error& e) {
                bad(key, e.what());
            }
        }
    } else if (key == "reps") {
        c.holdout.reps = parse_count(key, value);
    } else if (key == "test_fraction") {
        c.holdout.test_fraction = parse_number(key, value);
    } else if (key == "split") {
        if (value == "windows") c.holdout.split = SplitMode::StratifiedWindows;
        else if (value == "sessions") c.holdout.split = SplitMode::StratifiedSessions;
        else bad(key, "expected windows or sessions");
    } else if (key == "validation") {
        if (value == "holdout") c.holdout.validation = ValidationMode::RepeatedHoldout;
        else if (value == "kfold") c.holdout.validation = ValidationMode::KFold;
        else bad(key, "expected holdout or kfold");
    } else if (key == "seed") {
        c.seed = parse_count(key, value);
    } else if (key == "k_max") {
        c.k_max = parse_count(key, value);
    } else if (key == "manifest") {
        c.manifest = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else if (key == "protocol") {
        c.protocol = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else if (key == "session_seconds") {
        c.session_seconds = parse_number(key, value);
    } else if (key == "jitter") {
        c.jitter = parse_number(key, value);
    } else if (key == "out") {
        c.out = std::string(value);
    } else if (key == "threads") {
        c.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, parse_count(key, value)));
    } else {
        throw Error(ErrorKind::InvalidParameter, "unknown config key '" + std::string(key) + "'");
    }
}

void apply_config_text(PipelineConfig& c, std::string_view text, const std::string& source) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::InvalidParameter,
                        source + ":" + std::to_string(line_no) + ": expected key=value");
        set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void apply_config_file(PipelineConfig& c, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(c, ss.str(), path.string());
}

std::string config_help() {
    return "Config file: one key=value per line, '#' starts a comment; flags override it.\n"
           "  units=us|metric            thresholds=t_nom,t_high|guideline|table\n"
           "  windows=1,0.5,0.25         algorithms=dt,rf,knn,svm (knn:<k> for other k)\n"
           "  reps=10                    test_fraction=0.25\n"
           "  split=windows|sessions     validation=holdout|kfold\n"
           "  seed=7                     k_max=27\n"
           "  manifest=<manifest.csv>    protocol=<protocol.csv>\n"
           "  session_seconds=60         jitter=0.1\n"
           "  out=<dir>                  threads=1\n";
}

GeneratorParams generator_params(const PipelineConfig& c) {
    GeneratorParams p;
    p.seed = c.seed;
    p.jitter = c.jitter;
    return p;
}

std::vector<EmgRecording> load_corpus(const PipelineConfig& c) {
    if (c.manifest) return read_corpus(*c.manifest);
    const auto protocol = c.protocol ? SessionProtocol::from_csv(*c.protocol) : SessionProtocol::table3();
    return generate_corpus(protocol, c.session_seconds, generator_params(c), c.threads);
}

// ---------------------------------------------------------------------------
// LI vs amplitude

std::vector<LiAmplitudeRow> li_amplitude_report(std::span<const EmgRecording> corpus,
                                                const RiskThresholds& thresholds, UnitSystem unit) {
    if (corpus.empty()) throw Error(ErrorKind::EmptyDataset, "LI report needs at least one session");
    std::vector<LiAmplitudeRow> rows;
    for (const auto& r : corpus) {
        if (!r.meta.task)
            throw Error(ErrorKind::MalformedInput, "session " + r.meta.session_id + " has no lifting task");
        const auto a = assess_session(*r.meta.task, unit, thresholds);
        const auto windows = segment(rectify(r), kReferenceWindowSeconds);
        if (windows.empty())
            throw Error(ErrorKind::EmptyDataset,
                        "session " + r.meta.session_id + " is shorter than one reference window");
        rows.push_back({r.meta.session_id, a.li, average_peak_frequency(windows, r.sample_rate), a.label});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.li != b.li ? a.li < b.li : a.session_id < b.session_id;
    });
    return rows;
}

std::string li_amplitude_to_csv(std::span<const LiAmplitudeRow> rows) {
    std::string out = "session_id,li,avg_peak_uv,risk\n";
    for (const auto& r : rows) {
        out += r.session_id + ',' + csv::format(r.li) + ',' + csv::format(r.avg_peak_uv) + ',' +
               std::string(to_string(r.risk)) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string cell_stem(const AlgorithmSpec& spec) {
    if (const auto* k = std::get_if<KnnSpec>(&spec)) return "knn_k" + std::to_string(k->k);
    return algorithm_id(spec);
}

std::string window_dir(double window_seconds) { return "window_" + csv::format(window_seconds) + "s"; }

std::string render_cell_report(const HoldoutReport& r) {
    std::ostringstream os;
    os << r.algorithm << ", " << csv::format(r.window_seconds) << " s windows\n";
    os << "mean accuracy " << fmt_pct(r.mean) << "% over " << r.per_rep_accuracies.size()
       << " reps (spread " << fmt_pct(r.spread) << "%)\n";
    os << "per rep:";
    for (double a : r.per_rep_accuracies) os << ' ' << fmt_pct(a);
    os << "\n\n" << render_confusion(r.pooled, "pooled confusion (rows true, columns predicted)");
    return os.str();
}

std::string render_summary(const PipelineConfig& c, std::span<const HoldoutReport> cells) {
    std::ostringstream os;
    os << "Testing accuracy (%), mean over " << c.holdout.reps << " reps, seed " << c.seed << "\n\n";
    os << std::left << std::setw(16) << "Model" << std::right;
    for (double w : c.windows) os << std::setw(18) << (csv::format(w) + " s");
    os << '\n';
    for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
        os << std::left << std::setw(16) << algorithm_display_name(c.algorithms[a]) << std::right;
        for (std::size_t w = 0; w < c.windows.size(); ++w) {
            const auto& r = cells[w * c.algorithms.size() + a];
            os << std::setw(18) << (fmt_pct(r.mean) + " +/- " + fmt_pct(r.spread / 2));
        }
        os << '\n';
    }
    return os.str();
}

std::string summary_json(const PipelineConfig& c, std::span<const HoldoutReport> cells) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["reps"] = c.holdout.reps;
    j["test_fraction"] = c.holdout.test_fraction;
    j["split"] = c.holdout.split == SplitMode::StratifiedWindows ? "windows" : "sessions";
    j["validation"] = c.holdout.validation == ValidationMode::RepeatedHoldout ? "holdout" : "kfold";
    j["thresholds"] = {c.thresholds.t_nominal, c.thresholds.t_high};
    j["units"] = c.unit == UnitSystem::USCustomary ? "us" : "metric";
    auto arr = nlohmann::json::array();
    for (std::size_t w = 0; w < c.windows.size(); ++w) {
        for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
            const auto& r = cells[w * c.algorithms.size() + a];
            arr.push_back({{"window_seconds", c.windows[w]},
                           {"algorithm", r.algorithm},
                           {"report", window_dir(c.windows[w]) + "/" + cell_stem(c.algorithms[a]) + ".json"},
                           {"mean", r.mean},
                           {"spread", r.spread}});
        }
    }
    j["cells"] = arr;
    return j.dump(2);
}

PipelineResult run_pipeline(const PipelineConfig& c) {
    validate(c);
    const auto corpus = load_corpus(c);

    PipelineResult result;
    result.li_rows = li_amplitude_report(corpus, c.thresholds, c.unit);

    std::filesystem::create_directories(c.out);
    csv::write_atomic(c.out / "li_amplitude.csv", li_amplitude_to_csv(result.li_rows));

    const std::string provenance = c.manifest ? c.manifest->string() : "synthetic seed " + std::to_string(c.seed);
    for (double w : c.windows) {
        const auto data = build_dataset(corpus, w, c.thresholds, c.unit, provenance, c.threads);
        const auto dir = c.out / window_dir(w);
        std::filesystem::create_directories(dir);
        write_dataset(dir / "dataset.csv", data);

        HoldoutOptions opts = c.holdout;
        opts.threads = c.threads;
        for (const auto& spec : c.algorithms) {
            auto report = repeated_holdout(spec, data, opts, c.seed);
            csv::write_atomic(dir / (cell_stem(spec) + ".json"), to_json(report) + "\n");
            csv::write_atomic(dir / (cell_stem(spec) + ".txt"), render_cell_report(report));
            result.cells.push_back(std::move(report));
        }
    }
    csv::write_atomic(c.out / "summary.txt", render_summary(c, result.cells));
    csv::write_atomic(c.out / "summary.json", summary_json(c, result.cells) + "\n");
    return result;
}

}  // namespace ergorisk
