#include "patchcrf/svm.hpp"

#include <algorithm>
#include <cmath>

#include "patchcrf/parallel.hpp"
#include "patchcrf/rng.hpp"

namespace patchcrf {

double rbf_kernel(const FeatureVector& x, const FeatureVector& y, double gamma) {
    if (x.size() != y.size())
        throw DimensionMismatch("kernel operands have dimensions " +
                                std::to_string(x.size()) + " and " +
                                std::to_string(y.size()));
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

constexpr double kAlphaEps = 1e-12;

// Platt-style SMO over a precomputed Gram matrix.
class SmoSolver {
public:
    SmoSolver(const std::vector<FeatureVector>& x, const std::vector<int>& y,
              const SvmOptions& opts)
        : x_(x), y_(y), opts_(opts), n_(x.size()), rng_(opts.seed) {
        alpha_.assign(n_, 0.0);
        // f(i) starts at 0 for all i, so E(i) = -y(i).
        error_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) error_[i] = -y_[i];
        gram_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i; j < n_; ++j)
                gram_[i * n_ + j] = gram_[j * n_ + i] =
                    rbf_kernel(x_[i], x_[j], opts_.gamma);
    }

    bool solve() {
        bool examine_all = true;
        std::size_t passes = 0;
        while (passes < opts_.max_passes) {
            std::size_t changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (!examine_all && (alpha_[i] <= kAlphaEps ||
                                     alpha_[i] >= opts_.c - kAlphaEps))
                    continue;
                changed += examine(i) ? 1 : 0;
            }
            ++passes;
            if (examine_all) {
                if (changed == 0) return true; // all KKT conditions hold
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        return false;
    }

    RbfBinarySvm extract() const {
        RbfBinarySvm machine;
        machine.gamma = opts_.gamma;
        machine.c = opts_.c;
        machine.bias = bias_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] > kAlphaEps) {
                machine.support_vectors.push_back(x_[i]);
                machine.dual_coeffs.push_back(alpha_[i] * y_[i]);
            }
        }
        return machine;
    }

private:
    double k(std::size_t i, std::size_t j) const { return gram_[i * n_ + j]; }

    bool is_free(std::size_t i) const {
        return alpha_[i] > kAlphaEps && alpha_[i] < opts_.c - kAlphaEps;
    }

    bool examine(std::size_t i2) {
        const double e2 = error_[i2];
        const double r2 = e2 * y_[i2];
        const bool violates = (r2 < -opts_.tol && alpha_[i2] < opts_.c - kAlphaEps) ||
                              (r2 > opts_.tol && alpha_[i2] > kAlphaEps);
        if (!violates) return false;

        // Best partner by |E1 - E2| among free multipliers.
        std::size_t best = n_;
        double best_gap = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (i == i2 || !is_free(i)) continue;
            const double gap = std::abs(error_[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n_ && step(best, i2)) return true;

        // Random-start sweeps: free points first, then everything.
        const std::size_t start = rng_.index(n_);
        for (std::size_t off = 0; off < n_; ++off) {
            const std::size_t i = (start + off) % n_;
            if (i == i2 || !is_free(i)) continue;
            if (step(i, i2)) return true;
        }
        for (std::size_t off = 0; off < n_; ++off) {
            const std::size_t i = (start + off) % n_;
            if (i == i2 || is_free(i)) continue;
            if (step(i, i2)) return true;
        }
        return false;
    }

    bool step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const int y1 = y_[i1], y2 = y_[i2];
        const double e1 = error_[i1], e2 = error_[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(opts_.c, opts_.c + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - opts_.c);
            hi = std::min(opts_.c, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2_new;
        if (eta > 0.0) {
            a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // Degenerate curvature: pick the better interval end.
            const double f1 = y1 * (e1 + bias_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + bias_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                  0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                  0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (lo_obj < hi_obj - kAlphaEps)
                a2_new = lo;
            else if (lo_obj > hi_obj + kAlphaEps)
                a2_new = hi;
            else
                a2_new = a2;
        }
        if (std::abs(a2_new - a2) < kAlphaEps * (a2_new + a2 + kAlphaEps))
            return false;
        const double a1_new = a1 + s * (a2 - a2_new);

        // Threshold update (Platt's b1/b2 rule).
        const double b1 = e1 + y1 * (a1_new - a1) * k11 +
                          y2 * (a2_new - a2) * k12 + bias_;
        const double b2 = e2 + y1 * (a1_new - a1) * k12 +
                          y2 * (a2_new - a2) * k22 + bias_;
        double b_new;
        if (a1_new > kAlphaEps && a1_new < opts_.c - kAlphaEps)
            b_new = b1;
        else if (a2_new > kAlphaEps && a2_new < opts_.c - kAlphaEps)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);
        for (std::size_t i = 0; i < n_; ++i)
            error_[i] += d1 * k(i1, i) + d2 * k(i2, i) - (b_new - bias_);

        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        bias_ = b_new;
        return true;
    }

    const std::vector<FeatureVector>& x_;
    const std::vector<int>& y_;
    SvmOptions opts_;
    std::size_t n_;
    Rng rng_;
    std::vector<double> alpha_;
    std::vector<double> error_; // E(i) = f(i) - y(i)
    std::vector<double> gram_;
    double bias_ = 0.0;
};

} // namespace

RbfBinarySvm train_binary(const std::vector<FeatureVector>& x,
                          const std::vector<int>& y, const SvmOptions& opts) {
    if (x.size() != y.size())
        throw DimensionMismatch("feature/label count mismatch");
    if (x.size() < 2) throw Error("SVM training needs at least 2 samples");
    if (opts.gamma <= 0.0 || opts.c <= 0.0)
        throw Error("SVM gamma and C must be positive");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw Error("binary SVM labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw SingleClassData("binary SVM training set has only one class");

    SmoSolver solver(x, y, opts);
    const bool converged = solver.solve();
    RbfBinarySvm machine = solver.extract();
    machine.converged = converged;
    return machine;
}

double decision(const RbfBinarySvm& machine, const FeatureVector& x) {
    double acc = machine.bias;
    for (std::size_t i = 0; i < machine.support_vectors.size(); ++i)
        acc += machine.dual_coeffs[i] *
               rbf_kernel(machine.support_vectors[i], x, machine.gamma);
    return acc;
}

OneVsAllSvm train_ova(const std::vector<FeatureVector>& x,
                      const std::vector<std::size_t>& labels,
                      std::size_t class_count, const SvmOptions& opts,
                      unsigned threads) {
    if (x.size() != labels.size())
        throw DimensionMismatch("feature/label count mismatch");
    if (class_count < 2) throw Error("one-vs-all needs at least 2 classes");
    for (std::size_t label : labels)
        if (label >= class_count)
            throw Error("label index " + std::to_string(label) +
                        " out of range for " + std::to_string(class_count) +
                        " classes");

    OneVsAllSvm model;
    model.machines.resize(class_count);
    parallel_for(class_count, threads, [&](std::size_t j) {
        std::vector<int> y(labels.size());
        bool any_pos = false;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            y[i] = labels[i] == j ? 1 : -1;
            any_pos = any_pos || y[i] == 1;
        }
        if (!any_pos)
            throw SingleClassData("class index " + std::to_string(j) +
                                  " has no training samples");
        SvmOptions sub = opts;
        sub.seed = sub_seed(opts.seed, j);
        model.machines[j] = train_binary(x, y, sub);
    });
    return model;
}

std::vector<double> decision_values(const OneVsAllSvm& model,
                                    const FeatureVector& x) {
    std::vector<double> values(model.machines.size());
    for (std::size_t j = 0; j < model.machines.size(); ++j)
        values[j] = decision(model.machines[j], x);
    return values;
}

std::size_t predict_ova(const OneVsAllSvm& model, const FeatureVector& x) {
    const auto values = decision_values(model, x);
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
        if (values[j] > values[best]) best = j;
    return best;
}

} // namespace patchcrf
