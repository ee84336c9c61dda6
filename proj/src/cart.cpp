#include <algorithm>
#include <numeric>

#include "ergorisk/error.hpp"
#include "ergorisk/ml.hpp"
#include "ergorisk/random.hpp"

namespace ergorisk {

namespace {

RiskLabel majority(const std::array<std::size_t, 3>& counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
        if (counts[c] > counts[best]) best = c;
    return static_cast<RiskLabel>(best);
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child impurity
};

class Grower {
public:
    Grower(std::span<const FeatureArray> x, std::span<const RiskLabel> y, const cart::GrowOptions& o)
        : x_(x), y_(y), opts_(o), rng_(o.seed) {}

    DecisionTree run(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> rows, std::size_t depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::array<std::size_t, 3> counts{};
        for (auto r : rows) ++counts[index_of(y_[r])];
        tree_.nodes[id].counts = counts;
        tree_.nodes[id].label = majority(counts);

        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
        if (pure || rows.size() < opts_.min_samples_split ||
            (opts_.max_depth && depth >= *opts_.max_depth))
            return id;

        auto split = best_split(rows, counts);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (x_[r][split.feature] <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree_.nodes[id].feature = split.feature;
        tree_.nodes[id].threshold = split.threshold;
        int l = grow(std::move(left), depth + 1);
        int r = grow(std::move(right), depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    // Candidate features in ascending order. With fewer than all features per
    // split, further features are drawn only if none of the first batch has
    // two distinct values in this node.
    SplitChoice best_split(const std::vector<std::size_t>& rows, const std::array<std::size_t, 3>& counts) {
        std::vector<int> order(kFeatureDim);
        std::iota(order.begin(), order.end(), 0);
        const std::size_t m = std::min(opts_.features_per_split, kFeatureDim);
        if (m < kFeatureDim) rng_.shuffle(order);

        SplitChoice best;
        std::size_t begin = 0;
        std::size_t batch = m;
        while (begin < kFeatureDim) {
            std::vector<int> candidates(order.begin() + begin, order.begin() + std::min(begin + batch, kFeatureDim));
            std::sort(candidates.begin(), candidates.end());
            for (int f : candidates) scan_feature(rows, counts, f, best);
            if (best.feature >= 0) break;
            begin += batch;
            batch = 1;
        }
        return best;
    }

    void scan_feature(const std::vector<std::size_t>& rows, const std::array<std::size_t, 3>& total,
                      int f, SplitChoice& best) {
        sorted_.assign(rows.begin(), rows.end());
        std::stable_sort(sorted_.begin(), sorted_.end(),
                         [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
        std::array<std::size_t, 3> left{};
        const double n = static_cast<double>(sorted_.size());
        for (std::size_t i = 0; i + 1 < sorted_.size(); ++i) {
            ++left[index_of(y_[sorted_[i]])];
            const double lo = x_[sorted_[i]][f];
            const double hi = x_[sorted_[i + 1]][f];
            if (!(lo < hi)) continue;
            std::array<std::size_t, 3> right{total[0] - left[0], total[1] - left[1], total[2] - left[2]};
            const double nl = static_cast<double>(i + 1);
            const double impurity = (nl * cart::gini(left) + (n - nl) * cart::gini(right)) / n;
            if (best.feature < 0 || impurity < best.impurity - 1e-12) {
                double threshold = lo + 0.5 * (hi - lo);
                if (!(threshold < hi)) threshold = lo;  // adjacent doubles
                best = {f, threshold, impurity};
            }
        }
    }

    std::span<const FeatureArray> x_;
    std::span<const RiskLabel> y_;
    cart::GrowOptions opts_;
    Rng rng_;
    DecisionTree tree_;
    std::vector<std::size_t> sorted_;
};

}  // namespace

double cart::gini(const std::array<std::size_t, 3>& counts) {
    const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
    if (n == 0.0) return 0.0;
    double s = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / n;
        s += p * p;
    }
    return 1.0 - s;
}

DecisionTree cart::grow(std::span<const FeatureArray> x, std::span<const RiskLabel> y,
                        std::span<const std::size_t> rows, const GrowOptions& opts) {
    if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "cannot grow a tree on zero rows");
    if (opts.min_samples_split < 1 || opts.features_per_split < 1)
        throw Error(ErrorKind::InvalidParameter, "tree options must be >= 1");
    Grower g(x, y, opts);
    return g.run(std::vector<std::size_t>(rows.begin(), rows.end()));
}

RiskLabel DecisionTree::predict(const FeatureArray& x) const {
    int id = 0;
    while (nodes[id].feature >= 0)
        id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return nodes[id].label;
}

std::size_t DecisionTree::depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (nodes[id].feature >= 0) {
            stack.push_back({nodes[id].left, d + 1});
            stack.push_back({nodes[id].right, d + 1});
        }
    }
    return best;
}

}  // namespace ergorisk
