#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <iomanip>

#include <json.hpp>

#include "ergorisk/error.hpp"
#include "ergorisk/ml.hpp"
#include "ergorisk/parallel.hpp"
#include "ergorisk/random.hpp"

namespace ergorisk {

namespace {

constexpr std::uint64_t kSplitStream = 100;
constexpr std::uint64_t kTrainStream = 200;

// A unit of stratification: one window, or every window of one session.
struct Unit {
    RiskLabel label;
    std::vector<std::size_t> rows;
};

std::vector<Unit> make_units(const Dataset& data, SplitMode mode) {
    std::vector<Unit> units;
    if (mode == SplitMode::StratifiedWindows) {
        units.reserve(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) units.push_back({data.examples[i].label, {i}});
        return units;
    }
    std::map<std::string, std::size_t> by_session;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& e = data.examples[i];
        auto [it, fresh] = by_session.try_emplace(e.session_id, units.size());
        if (fresh) units.push_back({e.label, {}});
        auto& u = units[it->second];
        if (u.label != e.label)
            throw Error(ErrorKind::Stratification,
                        "session " + e.session_id + " has windows with different labels");
        u.rows.push_back(i);
    }
    return units;
}

double spread_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::json confusion_json(const ConfusionMatrix& c) {
    auto j = nlohmann::json::array();
    for (const auto& row : c) j.push_back(row);
    return j;
}

const nlohmann::json& label_codes() {
    static const nlohmann::json codes = {"NR", "IR", "HR"};
    return codes;
}

}  // namespace

EvaluationReport report_from_confusion(const ConfusionMatrix& c) {
    EvaluationReport r;
    r.confusion = c;
    std::size_t diag = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        diag += c[i][i];
        for (std::size_t j = 0; j < 3; ++j) r.n_test += c[i][j];
    }
    r.accuracy = r.n_test ? static_cast<double>(diag) / static_cast<double>(r.n_test) : 0.0;
    return r;
}

EvaluationReport evaluate(const Model& m, const Dataset& test) {
    if (test.empty()) throw Error(ErrorKind::EmptyDataset, "cannot evaluate on an empty test set");
    ConfusionMatrix c{};
    for (const auto& e : test.examples) ++c[index_of(e.label)][index_of(predict(m, e.features))];
    return report_from_confusion(c);
}

void validate(const HoldoutOptions& o) {
    if (o.reps < 1) throw Error(ErrorKind::InvalidParameter, "reps must be >= 1");
    if (o.validation == ValidationMode::KFold && o.reps < 2)
        throw Error(ErrorKind::InvalidParameter, "k-fold needs reps >= 2");
    if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0))
        throw Error(ErrorKind::InvalidParameter, "test_fraction must lie in (0, 1)");
}

Split make_split(const Dataset& data, const HoldoutOptions& opts, std::uint64_t seed, std::size_t rep) {
    validate(opts);
    if (data.empty()) throw Error(ErrorKind::EmptyDataset, "cannot split an empty dataset");
    if (rep >= opts.reps) throw Error(ErrorKind::InvalidParameter, "repetition index out of range");

    const auto units = make_units(data, opts.split);
    const char* what = opts.split == SplitMode::StratifiedSessions ? "sessions" : "examples";
    const bool kfold = opts.validation == ValidationMode::KFold;
    // k-fold shuffles once; every fold shares the permutation.
    Rng rng(derive_seed(seed, kSplitStream + (kfold ? 0 : rep)));

    std::vector<bool> in_test(units.size(), false);
    for (auto label : kAllLabels) {
        std::vector<std::size_t> members;
        for (std::size_t u = 0; u < units.size(); ++u)
            if (units[u].label == label) members.push_back(u);
        if (members.empty()) continue;
        const std::size_t need = kfold ? opts.reps : 2;
        if (members.size() < need) {
            throw Error(ErrorKind::Stratification,
                        "class " + std::string(to_string(label)) + " has " + std::to_string(members.size()) + " " + what +
                            "; at least " + std::to_string(need) + " are needed to stratify");
        }
        rng.shuffle(members);
        if (kfold) {
            for (std::size_t i = rep; i < members.size(); i += opts.reps) in_test[members[i]] = true;
        } else {
            const auto n = static_cast<double>(members.size());
            auto n_test = static_cast<std::size_t>(std::llround(opts.test_fraction * n));
            n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
            for (std::size_t i = 0; i < n_test; ++i) in_test[members[i]] = true;
        }
    }

    Split s;
    for (std::size_t u = 0; u < units.size(); ++u) {
        auto& side = in_test[u] ? s.test : s.train;
        side.insert(side.end(), units[u].rows.begin(), units[u].rows.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

HoldoutReport repeated_holdout(const AlgorithmSpec& spec, const Dataset& data, const HoldoutOptions& opts,
                               std::uint64_t seed) {
    validate(spec);
    validate(opts);
    if (data.empty()) throw Error(ErrorKind::EmptyDataset, "cannot evaluate an empty dataset");

    std::vector<EvaluationReport> reps(opts.reps);
    parallel_for(opts.reps, opts.threads, [&](std::size_t r) {
        const auto split = make_split(data, opts, seed, r);
        const auto model = train(spec, data.subset(split.train), derive_seed(seed, kTrainStream + r));
        reps[r] = evaluate(model, data.subset(split.test));
    });

    HoldoutReport out;
    out.algorithm = algorithm_display_name(spec);
    out.window_seconds = data.window_seconds;
    for (const auto& r : reps) {
        out.per_rep_accuracies.push_back(r.accuracy);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) out.pooled[i][j] += r.confusion[i][j];
    }
    out.mean = mean_of(out.per_rep_accuracies);
    out.spread = spread_of(out.per_rep_accuracies);
    return out;
}

std::vector<KSweepPoint> k_sweep(const Dataset& data, std::size_t k_max, const HoldoutOptions& opts,
                                 std::uint64_t seed) {
    validate(opts);
    if (k_max < 1) throw Error(ErrorKind::InvalidParameter, "k_max must be >= 1");
    if (data.empty()) throw Error(ErrorKind::EmptyDataset, "cannot sweep an empty dataset");

    std::vector<Split> splits(opts.reps);
    for (std::size_t r = 0; r < opts.reps; ++r) {
        splits[r] = make_split(data, opts, seed, r);
        if (k_max > splits[r].train.size())
            throw Error(ErrorKind::InvalidParameter, "k_max = " + std::to_string(k_max) +
                                                         " exceeds the training partition size " +
                                                         std::to_string(splits[r].train.size()));
    }

    // accuracy[r][k-1]; neighbours are ranked once per test point and reused for every k.
    std::vector<std::vector<double>> accuracy(opts.reps, std::vector<double>(k_max, 0.0));
    parallel_for(opts.reps, opts.threads, [&](std::size_t r) {
        const auto& split = splits[r];
        KnnState st;
        st.k = k_max;
        std::vector<FeatureArray> raw;
        for (auto i : split.train) {
            raw.push_back(data.examples[i].features.as_array());
            st.labels.push_back(data.examples[i].label);
        }
        st.scaler = Scaler::fit(raw);
        for (const auto& x : raw) st.points.push_back(st.scaler.apply(x));

        std::vector<std::size_t> correct(k_max, 0);
        for (auto i : split.test) {
            const auto& e = data.examples[i];
            const auto ranked = knn::nearest_labels(st, st.scaler.apply(e.features.as_array()), k_max);
            for (std::size_t k = 1; k <= k_max; ++k)
                if (knn::vote(ranked, k) == e.label) ++correct[k - 1];
        }
        for (std::size_t k = 0; k < k_max; ++k)
            accuracy[r][k] = static_cast<double>(correct[k]) / static_cast<double>(split.test.size());
    });

    std::vector<KSweepPoint> out;
    for (std::size_t k = 1; k <= k_max; ++k) {
        std::vector<double> per_rep;
        for (std::size_t r = 0; r < opts.reps; ++r) per_rep.push_back(accuracy[r][k - 1]);
        out.push_back({k, mean_of(per_rep), spread_of(per_rep)});
    }
    return out;
}

std::string to_json(const EvaluationReport& r) {
    nlohmann::json j{{"accuracy", r.accuracy},
                     {"labels", label_codes()},
                     {"confusion", confusion_json(r.confusion)},
                     {"n_test", r.n_test}};
    return j.dump(2);
}

std::string to_json(const HoldoutReport& r) {
    nlohmann::json j{{"algorithm", r.algorithm},
                     {"window_seconds", r.window_seconds},
                     {"reps", r.per_rep_accuracies.size()},
                     {"per_rep_accuracies", r.per_rep_accuracies},
                     {"mean", r.mean},
                     {"spread", r.spread},
                     {"labels", label_codes()},
                     {"pooled_confusion", confusion_json(r.pooled)}};
    return j.dump(2);
}

std::string render_confusion(const ConfusionMatrix& c, const std::string& title) {
    static const char* codes[] = {"NR", "IR", "HR"};
    std::size_t width = 5;
    for (const auto& row : c)
        for (auto v : row) width = std::max(width, std::to_string(v).size() + 2);
    std::ostringstream os;
    if (!title.empty()) os << title << '\n';
    os << std::setw(12) << std::left << "true\\pred" << std::right;
    for (auto code : codes) os << std::setw(static_cast<int>(width)) << code;
    os << '\n';
    for (std::size_t i = 0; i < 3; ++i) {
        os << std::setw(12) << std::left << codes[i] << std::right;
        for (std::size_t j = 0; j < 3; ++j) os << std::setw(static_cast<int>(width)) << c[i][j];
        os << '\n';
    }
    return os.str();
}

}  // namespace ergorisk
