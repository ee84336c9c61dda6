// ergorisk command-line front end. Exit codes: 0 success, 1 validation
// error, 2 data error, 3 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergorisk/csv.hpp"
#include "ergorisk/error.hpp"
#include "ergorisk/pipeline.hpp"

using namespace ergorisk;

namespace {

enum Exit { kOk = 0, kValidation = 1, kData = 2, kInternal = 3 };

int exit_code(ErrorKind k) {
    if (is_validation_error(k)) return kValidation;
    if (k == ErrorKind::Convergence) return kInternal;
    return kData;
}

// Flag values are kept as text and fed through the config-file parser, so a
// flag and the equivalent config line behave identically.
struct Common {
    std::string config;
    std::map<std::string, std::string> values;
    CLI::App* cmd = nullptr;

    void flag(const std::string& name, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            name, [this, key](const std::string& v) { values[key] = v; }, help);
    }

    PipelineConfig build() const {
        PipelineConfig c;
        if (!config.empty()) apply_config_file(c, config);
        for (const auto& [k, v] : values) set_config_value(c, k, v);
        validate(c);
        return c;
    }
};

Common& common(CLI::App* cmd, std::vector<std::unique_ptr<Common>>& store) {
    store.push_back(std::make_unique<Common>());
    auto& c = *store.back();
    c.cmd = cmd;
    cmd->add_option("--config", c.config, "key=value config file (flags override it)");
    c.flag("--seed", "seed", "master seed (default 7)");
    c.flag("--thresholds", "thresholds", "risk cutoffs t_nom,t_high, or 'guideline' (1.0,3.0)");
    c.flag("--units", "units", "us or metric");
    c.flag("--threads", "threads", "worker threads (results do not depend on it)");
    return c;
}

void add_source_flags(Common& c) {
    c.flag("--protocol", "protocol", "synthetic session protocol CSV (count,load_lb,h_in)");
    c.flag("--manifest", "manifest", "manifest.csv of recorded sessions");
    c.flag("--session-seconds", "session_seconds", "synthetic session length in seconds");
    c.flag("--jitter", "jitter", "synthetic per-lift amplitude jitter");
}

void add_holdout_flags(Common& c) {
    c.flag("--reps", "reps", "holdout repetitions (or folds)");
    c.flag("--test-fraction", "test_fraction", "test share per repetition");
    c.flag("--split", "split", "windows or sessions");
    c.flag("--validation", "validation", "holdout or kfold");
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        csv::write_atomic(path, text);
    }
}

Dataset dataset_for(const PipelineConfig& c, const std::string& data_path) {
    if (!data_path.empty()) return read_dataset(data_path);
    const auto corpus = load_corpus(c);
    const std::string provenance = c.manifest ? c.manifest->string() : "synthetic seed " + std::to_string(c.seed);
    return build_dataset(corpus, c.windows.front(), c.thresholds, c.unit, provenance, c.threads);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lifting-risk classification from surface EMG: NIOSH lifting index, synthetic sessions, "
                 "FFT window features and classifier evaluation."};
    app.footer(config_help());
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Common>> store;

    // niosh
    auto* niosh = app.add_subcommand("niosh", "RWL, lifting index and risk class for one task");
    niosh->set_help_flag("--help", "Print this help message and exit");
    auto& niosh_c = common(niosh, store);
    LiftingTask task;
    std::string coupling = "good", duration = "1h", manifest_path, session;
    std::optional<double> dest_h, dest_v;
    bool niosh_json = false;
    niosh->add_option("--load", task.weight, "object weight (lb or kg)");
    niosh->add_option("--h", task.h, "horizontal location");
    niosh->add_option("--v", task.v, "vertical location at the origin");
    niosh->add_option("--d", task.d, "vertical travel distance");
    niosh->add_option("--a", task.a, "asymmetry angle (degrees)");
    niosh->add_option("--coupling", coupling, "good, fair or poor");
    niosh->add_option("--freq", task.frequency, "lifts per minute");
    niosh->add_option("--duration", duration, "1h, 2h or 8h");
    niosh->add_option("--dest-h", dest_h, "horizontal location at the destination");
    niosh->add_option("--dest-v", dest_v, "vertical location at the destination");
    niosh->add_option("--manifest", manifest_path, "take the task from a manifest row");
    niosh->add_option("--session", session, "session id of the manifest row (default: first)");
    niosh->add_flag("--json", niosh_json, "print JSON");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic session corpus");
    auto& synth_c = common(synth, store);
    add_source_flags(synth_c);
    synth_c.flag("--out", "out", "output directory");

    // extract
    auto* extract = app.add_subcommand("extract", "window features of a corpus as dataset CSV");
    auto& extract_c = common(extract, store);
    add_source_flags(extract_c);
    extract_c.flag("--window", "windows", "window length in seconds");
    std::string extract_out;
    extract->add_option("--out", extract_out, "dataset CSV (default stdout)");

    // train
    auto* trn = app.add_subcommand("train", "fit one model and save it as JSON");
    auto& train_c = common(trn, store);
    add_source_flags(train_c);
    train_c.flag("--window", "windows", "window length in seconds");
    train_c.flag("--algo", "algorithms", "dt, rf, knn, knn:<k> or svm");
    std::string train_data, train_out;
    trn->add_option("--data", train_data, "dataset CSV (default: build from the corpus)");
    trn->add_option("--out", train_out, "model JSON (default stdout)");

    // eval
    auto* ev = app.add_subcommand("eval", "score a saved model, or run repeated holdout");
    auto& eval_c = common(ev, store);
    add_source_flags(eval_c);
    add_holdout_flags(eval_c);
    eval_c.flag("--window", "windows", "window length in seconds");
    eval_c.flag("--algo", "algorithms", "algorithms for repeated holdout");
    std::string eval_data, eval_model, eval_out;
    ev->add_option("--data", eval_data, "dataset CSV (default: build from the corpus)");
    ev->add_option("--model", eval_model, "saved model; without it, repeated holdout is run");
    ev->add_option("--out", eval_out, "JSON report (default stdout)");

    // sweep-k
    auto* sweep = app.add_subcommand("sweep-k", "KNN accuracy for k = 1..k_max over paired splits");
    auto& sweep_c = common(sweep, store);
    add_source_flags(sweep_c);
    add_holdout_flags(sweep_c);
    sweep_c.flag("--window", "windows", "window length in seconds");
    sweep_c.flag("--k-max", "k_max", "largest k (default 27)");
    std::string sweep_data, sweep_out;
    sweep->add_option("--data", sweep_data, "dataset CSV (default: build from the corpus)");
    sweep->add_option("--out", sweep_out, "CSV k,mean_accuracy,spread (default stdout)");

    // run
    auto* run = app.add_subcommand("run", "full pipeline: every window size x algorithm");
    auto& run_c = common(run, store);
    add_source_flags(run_c);
    add_holdout_flags(run_c);
    run_c.flag("--window", "windows", "window lengths, comma separated");
    run_c.flag("--algo", "algorithms", "algorithms, comma separated");
    run_c.flag("--out", "out", "output directory");

    // report-li
    auto* li = app.add_subcommand("report-li", "per-session LI vs frequency-domain average peak");
    auto& li_c = common(li, store);
    add_source_flags(li_c);
    std::string li_out;
    li->add_option("--out", li_out, "CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (niosh->parsed()) {
            const auto c = niosh_c.build();
            if (!manifest_path.empty()) {
                const auto rows = read_manifest(manifest_path);
                if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "manifest has no rows");
                auto it = std::find_if(rows.begin(), rows.end(),
                                       [&](const ManifestRow& r) { return session.empty() || r.session_id == session; });
                if (it == rows.end()) throw Error(ErrorKind::InvalidParameter, "no session '" + session + "' in manifest");
                task = it->task;
            } else {
                task.coupling = parse_coupling(coupling);
                task.duration = parse_duration(duration);
            }
            validate(task);
            const auto a = assess_session(task, c.unit, c.thresholds);
            std::optional<RwlResult> dest;
            if (dest_h || dest_v) {
                auto t = task;
                if (dest_h) t.h = *dest_h;
                if (dest_v) t.v = *dest_v;
                dest = compute_rwl(t, c.unit, Location::Destination);
            }
            auto mult = [](const MultiplierSet& m) {
                return nlohmann::json{{"hm", m.hm}, {"vm", m.vm}, {"dm", m.dm},
                                      {"am", m.am}, {"fm", m.fm}, {"cm", m.cm}};
            };
            if (niosh_json) {
                nlohmann::json j{{"origin", {{"multipliers", mult(a.origin.multipliers)}, {"rwl", a.origin.rwl}}},
                                 {"li", a.li},
                                 {"li_reported", a.li_reported},
                                 {"risk", to_string(a.label)}};
                if (dest) j["destination"] = {{"multipliers", mult(dest->multipliers)}, {"rwl", dest->rwl}};
                std::cout << j.dump(2) << '\n';
            } else {
                auto print = [](const char* where, const RwlResult& r) {
                    const auto& m = r.multipliers;
                    std::printf("%-12s HM %.2f  VM %.2f  DM %.2f  AM %.2f  FM %.2f  CM %.2f  RWL %.2f\n", where, m.hm,
                                m.vm, m.dm, m.am, m.fm, m.cm, r.rwl);
                };
                print("origin", a.origin);
                if (dest) print("destination", *dest);
                std::printf("LI %.1f (%.4f)  risk %s\n", a.li_reported, a.li, std::string(to_string(a.label)).c_str());
            }
        } else if (synth->parsed()) {
            const auto c = synth_c.build();
            if (c.manifest) throw Error(ErrorKind::InvalidParameter, "synth takes a protocol, not a manifest");
            const auto corpus = load_corpus(c);
            write_corpus(c.out, corpus);
            std::cout << "wrote " << corpus.size() << " sessions to " << c.out.string() << '\n';
        } else if (extract->parsed()) {
            const auto c = extract_c.build();
            write_or_print(extract_out, dataset_to_csv(dataset_for(c, "")));
        } else if (trn->parsed()) {
            const auto c = train_c.build();
            if (c.algorithms.size() != 1) throw Error(ErrorKind::InvalidParameter, "train takes exactly one --algo");
            const auto model = train(c.algorithms.front(), dataset_for(c, train_data), c.seed, c.threads);
            write_or_print(train_out, model_to_json(model) + "\n");
        } else if (ev->parsed()) {
            const auto c = eval_c.build();
            const auto data = dataset_for(c, eval_data);
            if (!eval_model.empty()) {
                const auto model = model_from_json(slurp(eval_model));
                const auto r = evaluate(model, data);
                write_or_print(eval_out, to_json(r) + "\n");
                std::cerr << render_confusion(r.confusion, "accuracy " + csv::format(r.accuracy));
            } else {
                auto opts = c.holdout;
                opts.threads = c.threads;
                nlohmann::json all = nlohmann::json::array();
                for (const auto& spec : c.algorithms) {
                    const auto r = repeated_holdout(spec, data, opts, c.seed);
                    all.push_back(nlohmann::json::parse(to_json(r)));
                    std::cerr << render_cell_report(r) << '\n';
                }
                write_or_print(eval_out, (all.size() == 1 ? all[0] : all).dump(2) + "\n");
            }
        } else if (sweep->parsed()) {
            const auto c = sweep_c.build();
            auto opts = c.holdout;
            opts.threads = c.threads;
            const auto points = k_sweep(dataset_for(c, sweep_data), c.k_max, opts, c.seed);
            std::string out = "k,mean_accuracy,spread\n";
            for (const auto& p : points)
                out += std::to_string(p.k) + ',' + csv::format(p.mean_accuracy) + ',' + csv::format(p.spread) + '\n';
            write_or_print(sweep_out, out);
        } else if (run->parsed()) {
            const auto c = run_c.build();
            const auto result = run_pipeline(c);
            std::cout << render_summary(c, result.cells) << "\nreports in " << c.out.string() << '\n';
        } else if (li->parsed()) {
            const auto c = li_c.build();
            const auto rows = li_amplitude_report(load_corpus(c), c.thresholds, c.unit);
            write_or_print(li_out, li_amplitude_to_csv(rows));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
