#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "ergorisk/error.hpp"
#include "ergorisk/ml.hpp"
#include "ergorisk/parallel.hpp"
#include "ergorisk/random.hpp"

namespace ergorisk {

namespace {

constexpr double kStdFloor = 1e-12;
// Offsets for derived random streams.
constexpr std::uint64_t kTreeStreamBase = 1000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

struct Matrix {
    std::vector<FeatureArray> x;
    std::vector<RiskLabel> y;
};

Matrix to_matrix(const Dataset& d) {
    Matrix m;
    m.x.reserve(d.size());
    m.y.reserve(d.size());
    for (const auto& e : d.examples) {
        m.x.push_back(e.features.as_array());
        m.y.push_back(e.label);
    }
    return m;
}

std::optional<RiskLabel> single_class(const std::vector<RiskLabel>& y) {
    if (std::all_of(y.begin(), y.end(), [&](RiskLabel l) { return l == y.front(); })) return y.front();
    return std::nullopt;
}

RiskLabel plurality(const std::array<std::size_t, 3>& votes) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
        if (votes[c] > votes[best]) best = c;
    return static_cast<RiskLabel>(best);
}

SvmState train_svm(const SvmSpec& spec, const Matrix& m) {
    SvmState s;
    s.scaler = Scaler::fit(m.x);
    std::vector<FeatureArray> xs;
    xs.reserve(m.x.size());
    for (const auto& row : m.x) xs.push_back(s.scaler.apply(row));

    if (spec.gamma) {
        s.gamma = *spec.gamma;
    } else {
        const std::size_t d = std::max<std::size_t>(s.scaler.active_count(), 1);
        double sum = 0.0, sum2 = 0.0;
        std::size_t count = 0;
        for (const auto& row : xs)
            for (std::size_t k = 0; k < kFeatureDim; ++k)
                if (s.scaler.active[k]) {
                    sum += row[k];
                    sum2 += row[k] * row[k];
                    ++count;
                }
        double var = count ? sum2 / count - (sum / count) * (sum / count) : 0.0;
        s.gamma = var > kStdFloor ? 1.0 / (static_cast<double>(d) * var) : 1.0 / static_cast<double>(d);
    }

    std::array<bool, 3> present{};
    for (auto l : m.y) present[index_of(l)] = true;
    const std::size_t max_iter = spec.max_passes * std::max<std::size_t>(xs.size(), 1);
    for (auto label : kAllLabels) {
        if (!present[index_of(label)]) continue;
        std::vector<int> y(m.y.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = m.y[i] == label ? 1 : -1;
        auto res = svm::solve(xs, y, spec.c, s.gamma, spec.tolerance, max_iter, false,
                              "SVM " + std::string(short_code(label)) + " vs rest");
        BinarySvm b;
        b.positive = label;
        b.rho = res.rho;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (res.alpha[i] > 0.0) {
                b.support.push_back(xs[i]);
                b.coef.push_back(res.alpha[i] * y[i]);
            }
        }
        s.machines.push_back(std::move(b));
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const AlgorithmSpec& spec) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidParameter, m); };
    std::visit(overloaded{
                   [&](const DecisionTreeSpec& s) {
                       if (s.min_samples_split < 1) fail("min_samples_split must be >= 1");
                       if (s.max_depth && *s.max_depth < 1) fail("max_depth must be >= 1");
                   },
                   [&](const RandomForestSpec& s) {
                       if (s.n_trees < 1) fail("n_trees must be >= 1");
                       if (s.features_per_split < 1 || s.features_per_split > kFeatureDim)
                           fail("features_per_split must lie in [1, 7]");
                       if (s.min_samples_split < 1) fail("min_samples_split must be >= 1");
                       if (s.max_depth && *s.max_depth < 1) fail("max_depth must be >= 1");
                   },
                   [&](const KnnSpec& s) {
                       if (s.k < 1) fail("k must be >= 1");
                   },
                   [&](const SvmSpec& s) {
                       if (!(s.c > 0.0)) fail("SVM C must be > 0");
                       if (s.gamma && !(*s.gamma > 0.0)) fail("SVM gamma must be > 0");
                       if (!(s.tolerance > 0.0)) fail("SVM tolerance must be > 0");
                       if (s.max_passes < 1) fail("SVM max_passes must be >= 1");
                   },
               },
               spec);
}

std::string algorithm_id(const AlgorithmSpec& spec) {
    static const char* ids[] = {"dt", "rf", "knn", "svm"};
    return ids[spec.index()];
}

std::string algorithm_display_name(const AlgorithmSpec& spec) {
    return std::visit(overloaded{
                          [](const DecisionTreeSpec&) -> std::string { return "Decision Tree"; },
                          [](const RandomForestSpec&) -> std::string { return "Random Forest"; },
                          [](const KnnSpec& s) -> std::string { return "KNN (k=" + std::to_string(s.k) + ")"; },
                          [](const SvmSpec&) -> std::string { return "SVM"; },
                      },
                      spec);
}

AlgorithmSpec parse_algorithm(std::string_view text) {
    auto s = lower(text);
    if (s == "dt" || s == "tree" || s == "decision-tree") return DecisionTreeSpec{};
    if (s == "rf" || s == "forest" || s == "random-forest") return RandomForestSpec{};
    if (s == "svm") return SvmSpec{};
    if (s == "knn") return KnnSpec{};
    if (s.rfind("knn:", 0) == 0) {
        try {
            std::size_t used = 0;
            auto k = std::stoul(s.substr(4), &used);
            if (used == s.size() - 4 && k >= 1) return KnnSpec{k};
        } catch (const std::exception&) {
        }
    }
    throw Error(ErrorKind::InvalidParameter, "unknown algorithm '" + std::string(text) +
                                                 "' (expected dt, rf, knn, knn:<k> or svm)");
}

// ---------------------------------------------------------------------------

Scaler Scaler::fit(std::span<const FeatureArray> rows) {
    Scaler s;
    if (rows.empty()) return s;
    const double n = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < kFeatureDim; ++k) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[k];
        mean /= n;
        double ss = 0.0;
        for (const auto& r : rows) ss += (r[k] - mean) * (r[k] - mean);
        s.mean[k] = mean;
        s.std[k] = std::sqrt(ss / n);
        s.active[k] = s.std[k] > kStdFloor * std::max(1.0, std::abs(mean));
    }
    return s;
}

FeatureArray Scaler::apply(const FeatureArray& x) const {
    FeatureArray out{};
    for (std::size_t k = 0; k < kFeatureDim; ++k)
        out[k] = active[k] ? (x[k] - mean[k]) / std[k] : 0.0;
    return out;
}

std::size_t Scaler::active_count() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

// ---------------------------------------------------------------------------

std::vector<RiskLabel> knn::nearest_labels(const KnnState& s, const FeatureArray& q, std::size_t count) {
    count = std::min(count, s.points.size());
    std::vector<std::pair<double, std::size_t>> d(s.points.size());
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kFeatureDim; ++k) {
            const double diff = s.points[i][k] - q[k];
            acc += diff * diff;
        }
        d[i] = {acc, i};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(count), d.end());
    std::vector<RiskLabel> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = s.labels[d[i].second];
    return out;
}

RiskLabel knn::vote(std::span<const RiskLabel> ordered, std::size_t k) {
    std::array<std::size_t, 3> votes{};
    for (std::size_t i = 0; i < std::min(k, ordered.size()); ++i) ++votes[index_of(ordered[i])];
    return plurality(votes);
}

Model train(const AlgorithmSpec& spec, const Dataset& data, std::uint64_t seed, unsigned threads) {
    validate(spec);
    if (data.empty()) throw Error(ErrorKind::EmptyDataset, "cannot train on an empty dataset");
    const auto m = to_matrix(data);

    Model model;
    model.algorithm = spec;

    if (const auto* k = std::get_if<KnnSpec>(&spec); k && k->k > data.size()) {
        throw Error(ErrorKind::InvalidParameter, "k = " + std::to_string(k->k) +
                                                     " exceeds the training size " + std::to_string(data.size()));
    }
    if (auto only = single_class(m.y)) {
        model.state = ConstantState{*only};
        return model;
    }

    std::vector<std::size_t> all(m.x.size());
    std::iota(all.begin(), all.end(), 0);

    std::visit(overloaded{
                   [&](const DecisionTreeSpec& s) {
                       cart::GrowOptions o;
                       o.min_samples_split = s.min_samples_split;
                       o.max_depth = s.max_depth;
                       o.seed = seed;
                       model.state = cart::grow(m.x, m.y, all, o);
                   },
                   [&](const RandomForestSpec& s) {
                       ForestState f;
                       f.trees.resize(s.n_trees);
                       parallel_for(s.n_trees, threads, [&](std::size_t t) {
                           const auto tree_seed = derive_seed(seed, kTreeStreamBase + t);
                           cart::GrowOptions o;
                           o.min_samples_split = s.min_samples_split;
                           o.max_depth = s.max_depth;
                           o.features_per_split = s.features_per_split;
                           o.seed = tree_seed;
                           if (s.bootstrap) {
                               Rng rng(derive_seed(tree_seed, 1));
                               std::vector<std::size_t> rows(all.size());
                               for (auto& r : rows) r = rng.index(all.size());
                               std::sort(rows.begin(), rows.end());
                               f.trees[t] = cart::grow(m.x, m.y, rows, o);
                           } else {
                               f.trees[t] = cart::grow(m.x, m.y, all, o);
                           }
                       });
                       model.state = std::move(f);
                   },
                   [&](const KnnSpec& s) {
                       KnnState st;
                       st.k = s.k;
                       st.scaler = Scaler::fit(m.x);
                       st.points.reserve(m.x.size());
                       for (const auto& row : m.x) st.points.push_back(st.scaler.apply(row));
                       st.labels = m.y;
                       model.state = std::move(st);
                   },
                   [&](const SvmSpec& s) { model.state = train_svm(s, m); },
               },
               spec);
    return model;
}

RiskLabel predict(const Model& m, const FeatureArray& x) {
    return std::visit(
        overloaded{
            [&](const ConstantState& s) { return s.label; },
            [&](const DecisionTree& t) { return t.predict(x); },
            [&](const ForestState& f) {
                std::array<std::size_t, 3> votes{};
                for (const auto& t : f.trees) ++votes[index_of(t.predict(x))];
                return plurality(votes);
            },
            [&](const KnnState& s) {
                auto labels = knn::nearest_labels(s, s.scaler.apply(x), s.k);
                return knn::vote(labels, s.k);
            },
            [&](const SvmState& s) {
                const auto q = s.scaler.apply(x);
                RiskLabel best = s.machines.front().positive;
                double best_score = -std::numeric_limits<double>::infinity();
                for (const auto& b : s.machines) {
                    double score = -b.rho;
                    for (std::size_t i = 0; i < b.support.size(); ++i)
                        score += b.coef[i] * svm::rbf(b.support[i], q, s.gamma);
                    if (score > best_score) {  // machines are in class order; ties keep the lower class
                        best_score = score;
                        best = b.positive;
                    }
                }
                return best;
            },
        },
        m.state);
}

RiskLabel predict(const Model& m, const FeatureVector& x) { return predict(m, x.as_array()); }

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

using nlohmann::json;

json tree_to_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"label", index_of(n.label)},
                         {"counts", n.counts}});
    }
    return nodes;
}

DecisionTree tree_from_json(const json& j) {
    DecisionTree t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.label = static_cast<RiskLabel>(n.at("label").get<int>());
        node.counts = n.at("counts").get<std::array<std::size_t, 3>>();
        t.nodes.push_back(node);
    }
    const auto size = static_cast<int>(t.nodes.size());
    if (size == 0) throw Error(ErrorKind::MalformedInput, "model tree has no nodes");
    for (const auto& n : t.nodes) {
        if (n.feature >= static_cast<int>(kFeatureDim) ||
            (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)))
            throw Error(ErrorKind::MalformedInput, "model tree has an invalid node");
    }
    return t;
}

json scaler_to_json(const Scaler& s) {
    return {{"mean", s.mean}, {"std", s.std}, {"active", s.active}};
}

Scaler scaler_from_json(const json& j) {
    Scaler s;
    s.mean = j.at("mean").get<FeatureArray>();
    s.std = j.at("std").get<FeatureArray>();
    s.active = j.at("active").get<std::array<bool, kFeatureDim>>();
    return s;
}

json spec_to_json(const AlgorithmSpec& spec) {
    return std::visit(
        overloaded{
            [](const DecisionTreeSpec& s) -> json {
                json j{{"type", "dt"}, {"min_samples_split", s.min_samples_split}};
                if (s.max_depth) j["max_depth"] = *s.max_depth;
                return j;
            },
            [](const RandomForestSpec& s) -> json {
                json j{{"type", "rf"},
                       {"n_trees", s.n_trees},
                       {"features_per_split", s.features_per_split},
                       {"bootstrap", s.bootstrap},
                       {"min_samples_split", s.min_samples_split}};
                if (s.max_depth) j["max_depth"] = *s.max_depth;
                return j;
            },
            [](const KnnSpec& s) -> json { return {{"type", "knn"}, {"k", s.k}}; },
            [](const SvmSpec& s) -> json {
                json j{{"type", "svm"}, {"c", s.c}, {"tolerance", s.tolerance}, {"max_passes", s.max_passes}};
                if (s.gamma) j["gamma"] = *s.gamma;
                return j;
            },
        },
        spec);
}

AlgorithmSpec spec_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    auto depth = [&]() -> std::optional<std::size_t> {
        if (j.contains("max_depth")) return j.at("max_depth").get<std::size_t>();
        return std::nullopt;
    };
    if (type == "dt") return DecisionTreeSpec{j.at("min_samples_split").get<std::size_t>(), depth()};
    if (type == "rf")
        return RandomForestSpec{j.at("n_trees").get<std::size_t>(), j.at("features_per_split").get<std::size_t>(),
                                j.at("bootstrap").get<bool>(), j.at("min_samples_split").get<std::size_t>(), depth()};
    if (type == "knn") return KnnSpec{j.at("k").get<std::size_t>()};
    if (type == "svm") {
        SvmSpec s;
        s.c = j.at("c").get<double>();
        s.tolerance = j.at("tolerance").get<double>();
        s.max_passes = j.at("max_passes").get<std::size_t>();
        if (j.contains("gamma")) s.gamma = j.at("gamma").get<double>();
        return s;
    }
    throw Error(ErrorKind::MalformedInput, "unknown model type '" + type + "'");
}

std::vector<int> labels_to_ints(const std::vector<RiskLabel>& v) {
    std::vector<int> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](RiskLabel l) { return index_of(l); });
    return out;
}

}  // namespace

std::string model_to_json(const Model& m) {
    json j;
    j["format"] = "ergorisk-model/1";
    j["algorithm"] = spec_to_json(m.algorithm);
    std::visit(overloaded{
                   [&](const ConstantState& s) {
                       j["state"] = {{"kind", "constant"}, {"label", index_of(s.label)}};
                   },
                   [&](const DecisionTree& t) { j["state"] = {{"kind", "tree"}, {"nodes", tree_to_json(t)}}; },
                   [&](const ForestState& f) {
                       json trees = json::array();
                       for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
                       j["state"] = {{"kind", "forest"}, {"trees", trees}};
                   },
                   [&](const KnnState& s) {
                       j["state"] = {{"kind", "knn"},
                                     {"k", s.k},
                                     {"scaler", scaler_to_json(s.scaler)},
                                     {"points", s.points},
                                     {"labels", labels_to_ints(s.labels)}};
                   },
                   [&](const SvmState& s) {
                       json machines = json::array();
                       for (const auto& b : s.machines)
                           machines.push_back({{"positive", index_of(b.positive)},
                                               {"rho", b.rho},
                                               {"coef", b.coef},
                                               {"support", b.support}});
                       j["state"] = {{"kind", "svm"},
                                     {"gamma", s.gamma},
                                     {"scaler", scaler_to_json(s.scaler)},
                                     {"machines", machines}};
                   },
               },
               m.state);
    return j.dump(1);
}

Model model_from_json(std::string_view text) {
    try {
        const auto j = json::parse(text);
        if (j.at("format").get<std::string>() != "ergorisk-model/1")
            throw Error(ErrorKind::MalformedInput, "unsupported model format");
        Model m;
        m.algorithm = spec_from_json(j.at("algorithm"));
        validate(m.algorithm);
        const auto& st = j.at("state");
        const auto kind = st.at("kind").get<std::string>();
        auto label_of = [](int v) {
            if (v < 0 || v > 2) throw Error(ErrorKind::MalformedInput, "model label out of range");
            return static_cast<RiskLabel>(v);
        };
        if (kind == "constant") {
            m.state = ConstantState{label_of(st.at("label").get<int>())};
        } else if (kind == "tree") {
            m.state = tree_from_json(st.at("nodes"));
        } else if (kind == "forest") {
            ForestState f;
            for (const auto& t : st.at("trees")) f.trees.push_back(tree_from_json(t));
            if (f.trees.empty()) throw Error(ErrorKind::MalformedInput, "forest has no trees");
            m.state = std::move(f);
        } else if (kind == "knn") {
            KnnState s;
            s.k = st.at("k").get<std::size_t>();
            s.scaler = scaler_from_json(st.at("scaler"));
            s.points = st.at("points").get<std::vector<FeatureArray>>();
            for (int v : st.at("labels").get<std::vector<int>>()) s.labels.push_back(label_of(v));
            if (s.points.size() != s.labels.size() || s.points.empty())
                throw Error(ErrorKind::MalformedInput, "knn model points/labels mismatch");
            m.state = std::move(s);
        } else if (kind == "svm") {
            SvmState s;
            s.gamma = st.at("gamma").get<double>();
            s.scaler = scaler_from_json(st.at("scaler"));
            for (const auto& b : st.at("machines")) {
                BinarySvm bm;
                bm.positive = label_of(b.at("positive").get<int>());
                bm.rho = b.at("rho").get<double>();
                bm.coef = b.at("coef").get<std::vector<double>>();
                bm.support = b.at("support").get<std::vector<FeatureArray>>();
                if (bm.coef.size() != bm.support.size())
                    throw Error(ErrorKind::MalformedInput, "svm model coef/support mismatch");
                s.machines.push_back(std::move(bm));
            }
            if (s.machines.empty()) throw Error(ErrorKind::MalformedInput, "svm model has no machines");
            m.state = std::move(s);
        } else {
            throw Error(ErrorKind::MalformedInput, "unknown model state '" + kind + "'");
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedInput, std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace ergorisk
