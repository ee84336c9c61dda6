#pragma once

// Risk-class classifiers (CART decision tree, random forest, k-nearest
// neighbours, one-vs-rest RBF SVM) and the evaluation harness around them.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergorisk/features.hpp"
#include "ergorisk/niosh.hpp"

namespace ergorisk {

// ---------------------------------------------------------------------------
// Algorithm specifications

struct DecisionTreeSpec {
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;
};

struct RandomForestSpec {
    std::size_t n_trees = 100;
    std::size_t features_per_split = 3;  // ceil(sqrt(7))
    bool bootstrap = true;
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;
};

struct KnnSpec {
    std::size_t k = 1;
};

struct SvmSpec {
    double c = 1.0;
    /// Unset: 1 / (active feature count * variance of the scaled training matrix).
    std::optional<double> gamma;
    double tolerance = 1e-3;
    /// Iteration budget per binary problem, in multiples of the training size.
    std::size_t max_passes = 100;
};

using AlgorithmSpec = std::variant<DecisionTreeSpec, RandomForestSpec, KnnSpec, SvmSpec>;

void validate(const AlgorithmSpec& spec);

/// Short id used on the command line and in file names: dt, rf, knn, svm.
std::string algorithm_id(const AlgorithmSpec& spec);
/// "Decision Tree", "Random Forest", "KNN (k=1)", "SVM".
std::string algorithm_display_name(const AlgorithmSpec& spec);
/// Accepts dt | rf | knn | knn:<k> | svm (case-insensitive).
AlgorithmSpec parse_algorithm(std::string_view text);

// ---------------------------------------------------------------------------
// Fitted state

/// Per-feature standardisation fitted on training data. Dimensions whose
/// standard deviation is below 1e-12 are inactive and dropped.
struct Scaler {
    FeatureArray mean{};
    FeatureArray std{};
    std::array<bool, kFeatureDim> active{};

    static Scaler fit(std::span<const FeatureArray> rows);
    /// Active dimensions only, standardised; inactive entries are 0.
    FeatureArray apply(const FeatureArray& x) const;
    std::size_t active_count() const;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;     // x[feature] <= threshold
    int right = -1;
    RiskLabel label = RiskLabel::Nominal;
    std::array<std::size_t, 3> counts{};
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    RiskLabel predict(const FeatureArray& x) const;
    std::size_t depth() const;
};

struct ForestState {
    std::vector<DecisionTree> trees;
};

struct KnnState {
    Scaler scaler;
    std::vector<FeatureArray> points;  // scaled
    std::vector<RiskLabel> labels;
    std::size_t k = 1;
};

struct BinarySvm {
    RiskLabel positive = RiskLabel::Nominal;
    std::vector<FeatureArray> support;  // scaled
    std::vector<double> coef;           // alpha_i * y_i
    double rho = 0.0;                   // decision = sum coef K(sv, x) - rho
};

struct SvmState {
    Scaler scaler;
    double gamma = 0.0;
    std::vector<BinarySvm> machines;  // one per class present in training
};

/// Degenerate training sets with a single class predict that class.
struct ConstantState {
    RiskLabel label = RiskLabel::Nominal;
};

struct Model {
    AlgorithmSpec algorithm;
    std::variant<ConstantState, DecisionTree, ForestState, KnnState, SvmState> state;
};

Model train(const AlgorithmSpec& spec, const Dataset& data, std::uint64_t seed,
            unsigned threads = 1);
RiskLabel predict(const Model& m, const FeatureVector& x);
RiskLabel predict(const Model& m, const FeatureArray& x);

std::string model_to_json(const Model& m);
Model model_from_json(std::string_view text);

// Building blocks, exposed for tests and for the k-sweep.

namespace cart {

/// 1 - sum p_i^2.
double gini(const std::array<std::size_t, 3>& counts);

struct GrowOptions {
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;
    /// Features examined per split; kFeatureDim means all.
    std::size_t features_per_split = kFeatureDim;
    std::uint64_t seed = 0;
};

/// `rows` may repeat (bootstrap); ties in split quality go to the lowest
/// feature index, then the smallest threshold.
DecisionTree grow(std::span<const FeatureArray> x, std::span<const RiskLabel> y,
                  std::span<const std::size_t> rows, const GrowOptions& opts);

}  // namespace cart

namespace knn {

/// Labels of the `count` nearest points in order (distance, then index).
std::vector<RiskLabel> nearest_labels(const KnnState& s, const FeatureArray& scaled_query,
                                      std::size_t count);
/// Majority over the first k labels; ties go to the lower class.
RiskLabel vote(std::span<const RiskLabel> ordered, std::size_t k);

}  // namespace knn

namespace svm {

struct SmoResult {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
    double max_violation = 0.0;  // m(alpha) - M(alpha) at exit
    /// Dual objective sum(alpha) - 1/2 a'Qa after each accepted step, if traced.
    std::vector<double> objective_trace;
};

double rbf(const FeatureArray& a, const FeatureArray& b, double gamma);

/// Soft-margin binary SVM dual solved by SMO with second-order working set
/// selection. `y` entries are +1 / -1. Throws Error{Convergence} when the
/// iteration budget runs out; `what` names the problem.
SmoResult solve(std::span<const FeatureArray> x, std::span<const int> y, double c, double gamma,
                double tolerance, std::size_t max_iterations, bool trace,
                const std::string& what = "binary SVM");

}  // namespace svm

// ---------------------------------------------------------------------------
// Evaluation

using ConfusionMatrix = std::array<std::array<std::size_t, 3>, 3>;  // [true][pred]

struct EvaluationReport {
    double accuracy = 0.0;
    ConfusionMatrix confusion{};
    std::size_t n_test = 0;
};

EvaluationReport evaluate(const Model& m, const Dataset& test);
EvaluationReport report_from_confusion(const ConfusionMatrix& c);

enum class SplitMode {
    StratifiedWindows,   // per-window stratification (default)
    StratifiedSessions,  // whole sessions go to one side
};

enum class ValidationMode {
    RepeatedHoldout,  // independent seeded splits
    KFold,            // stratified k-fold with k = reps
};

struct HoldoutOptions {
    std::size_t reps = 10;
    double test_fraction = 0.25;
    SplitMode split = SplitMode::StratifiedWindows;
    ValidationMode validation = ValidationMode::RepeatedHoldout;
    unsigned threads = 1;
};

void validate(const HoldoutOptions& o);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// The partition used for repetition `rep`; identical for every algorithm.
Split make_split(const Dataset& data, const HoldoutOptions& opts, std::uint64_t seed,
                 std::size_t rep);

struct HoldoutReport {
    std::string algorithm;
    double window_seconds = 0.0;
    std::vector<double> per_rep_accuracies;
    double mean = 0.0;
    double spread = 0.0;
    ConfusionMatrix pooled{};
};

HoldoutReport repeated_holdout(const AlgorithmSpec& spec, const Dataset& data,
                               const HoldoutOptions& opts, std::uint64_t seed);

struct KSweepPoint {
    std::size_t k = 0;
    double mean_accuracy = 0.0;
    double spread = 0.0;
};

/// KNN for every k in 1..k_max over the same splits.
std::vector<KSweepPoint> k_sweep(const Dataset& data, std::size_t k_max,
                                 const HoldoutOptions& opts, std::uint64_t seed);

std::string to_json(const EvaluationReport& r);
std::string to_json(const HoldoutReport& r);
/// Aligned NR/IR/HR confusion table.
std::string render_confusion(const ConfusionMatrix& c, const std::string& title);

}  // namespace ergorisk
