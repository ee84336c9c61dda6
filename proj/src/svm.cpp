#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "ergorisk/error.hpp"
#include "ergorisk/ml.hpp"

namespace ergorisk::svm {

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

// LRU cache of rows of Q, Q_ij = y_i y_j K(x_i, x_j).
class QMatrix {
public:
    QMatrix(std::span<const FeatureArray> x, std::span<const int> y, double gamma)
        : x_(x), y_(y), gamma_(gamma),
          capacity_(std::max<std::size_t>(2, kCacheBytes / (sizeof(double) * std::max<std::size_t>(x.size(), 1)))) {}

    const std::vector<double>& row(std::size_t i) {
        auto it = rows_.find(i);
        if (it != rows_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
        if (rows_.size() >= capacity_) {
            rows_.erase(lru_.back());
            lru_.pop_back();
        }
        lru_.push_front(i);
        auto& slot = rows_[i];
        slot.second = lru_.begin();
        slot.first.resize(x_.size());
        for (std::size_t k = 0; k < x_.size(); ++k)
            slot.first[k] = y_[i] * y_[k] * rbf(x_[i], x_[k], gamma_);
        return slot.first;
    }

private:
    std::span<const FeatureArray> x_;
    std::span<const int> y_;
    double gamma_;
    std::size_t capacity_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> rows_;
};

double dual_objective(const std::vector<double>& alpha, const std::vector<double>& grad) {
    // W = sum(a) - a'Qa/2 with G = Qa - 1  =>  W = sum a_i (1 - G_i) / 2
    double w = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) w += alpha[i] * (1.0 - grad[i]);
    return 0.5 * w;
}

}  // namespace

double rbf(const FeatureArray& a, const FeatureArray& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < kFeatureDim; ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

SmoResult solve(std::span<const FeatureArray> x, std::span<const int> y, double c, double gamma,
                double tolerance, std::size_t max_iterations, bool trace, const std::string& what) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw Error(ErrorKind::InvalidParameter, what + ": bad training set");
    if (!(c > 0.0) || !(gamma > 0.0) || !(tolerance > 0.0))
        throw Error(ErrorKind::InvalidParameter, what + ": C, gamma and tolerance must be > 0");

    QMatrix q(x, y, gamma);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    // RBF kernel: K(x, x) = 1, so Q_ii = 1.
    const double qd = 1.0;

    SmoResult res;
    if (trace) res.objective_trace.push_back(0.0);

    while (true) {
        // Maximal violating i, then j by second-order gain.
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (alpha[t] < c && -grad[t] > gmax) {
                    gmax = -grad[t];
                    i = static_cast<std::ptrdiff_t>(t);
                }
            } else if (alpha[t] > 0.0 && grad[t] > gmax) {
                gmax = grad[t];
                i = static_cast<std::ptrdiff_t>(t);
            }
        }

        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j = -1;
        double best_obj = std::numeric_limits<double>::infinity();
        const std::vector<double>* qi = i >= 0 ? &q.row(static_cast<std::size_t>(i)) : nullptr;
        for (std::size_t t = 0; t < n && qi; ++t) {
            const double yi = y[static_cast<std::size_t>(i)];
            if (y[t] == 1) {
                if (alpha[t] > 0.0) {
                    const double diff = gmax + grad[t];
                    gmax2 = std::max(gmax2, grad[t]);
                    if (diff > 0.0) {
                        double quad = qd + qd - 2.0 * yi * (*qi)[t];
                        if (quad <= 0.0) quad = kTau;
                        const double obj = -(diff * diff) / quad;
                        if (obj < best_obj) {
                            best_obj = obj;
                            j = static_cast<std::ptrdiff_t>(t);
                        }
                    }
                }
            } else if (alpha[t] < c) {
                const double diff = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (diff > 0.0) {
                    double quad = qd + qd + 2.0 * yi * (*qi)[t];
                    if (quad <= 0.0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj < best_obj) {
                        best_obj = obj;
                        j = static_cast<std::ptrdiff_t>(t);
                    }
                }
            }
        }

        res.max_violation = (i < 0) ? 0.0 : gmax + gmax2;
        if (i < 0 || j < 0 || gmax + gmax2 < tolerance) break;
        if (res.iterations >= max_iterations) {
            throw Error(ErrorKind::Convergence,
                        what + ": SMO did not converge within " + std::to_string(max_iterations) +
                            " iterations (KKT violation " + std::to_string(gmax + gmax2) + ")");
        }
        ++res.iterations;

        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const auto& q_i = q.row(ui);
        const auto& q_j = q.row(uj);
        const double old_ai = alpha[ui];
        const double old_aj = alpha[uj];
        double& ai = alpha[ui];
        double& aj = alpha[uj];

        if (y[ui] != y[uj]) {
            double quad = qd + qd + 2.0 * q_i[uj];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[ui] - grad[uj]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {  // C_i - C_j == 0
                if (ai > c) {
                    ai = c;
                    aj = c - diff;
                }
            } else if (aj > c) {
                aj = c;
                ai = c + diff;
            }
        } else {
            double quad = qd + qd - 2.0 * q_i[uj];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[ui] - grad[uj]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) {
                    ai = c;
                    aj = sum - c;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > c) {
                if (aj > c) {
                    aj = c;
                    ai = sum - c;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double dai = ai - old_ai;
        const double daj = aj - old_aj;
        // q.row(uj) may have evicted q_i's storage only if capacity < 2.
        for (std::size_t t = 0; t < n; ++t) grad[t] += q_i[t] * dai + q_j[t] * daj;

        if (trace) res.objective_trace.push_back(dual_objective(alpha, grad));
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    if (n_free > 0) res.rho = sum_free / static_cast<double>(n_free);
    else if (std::isfinite(ub) && std::isfinite(lb)) res.rho = 0.5 * (ub + lb);
    else res.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    res.alpha = std::move(alpha);
    return res;
}

}  // namespace ergorisk::svm
