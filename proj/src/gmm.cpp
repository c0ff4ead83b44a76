#include "patchcrf/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace patchcrf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // ln(2*pi)
constexpr double kEmptyComponentMass = 1e-8;

double log_gaussian(const DiagonalGaussian& g, const FeatureVector& x) {
    double acc = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double dv = x[d] - g.mean[d];
        acc += -0.5 * (kLog2Pi + std::log(g.var[d])) - dv * dv / (2.0 * g.var[d]);
    }
    return acc;
}

double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

// k-means++ seeding followed by a fixed number of Lloyd iterations.
std::vector<FeatureVector> kmeans(const std::vector<FeatureVector>& data,
                                  std::size_t k, Rng& rng) {
    const std::size_t n = data.size();
    const std::size_t dim = data.front().size();

    auto sq_dist = [dim](const FeatureVector& a, const FeatureVector& b) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double dv = a[d] - b[d];
            acc += dv * dv;
        }
        return acc;
    };

    std::vector<FeatureVector> centers;
    centers.reserve(k);
    centers.push_back(data[rng.index(n)]);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], sq_dist(data[i], centers.back()));
            total += best[i];
        }
        if (total <= 0.0) { // all mass on existing centers; fall back to uniform
            centers.push_back(data[rng.index(n)]);
            continue;
        }
        double target = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= best[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(data[pick]);
    }

    std::vector<std::size_t> assign(n, 0);
    for (int iter = 0; iter < 10; ++iter) {
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t arg = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d2 = sq_dist(data[i], centers[c]);
                if (d2 < bd) {
                    bd = d2;
                    arg = c;
                }
            }
            if (assign[i] != arg) {
                assign[i] = arg;
                moved = true;
            }
        }
        if (!moved && iter > 0) break;
        std::vector<std::size_t> counts(k, 0);
        std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += data[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) { // keep the old center for empty clusters
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d)
                centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
    }
    return centers;
}

std::vector<double> global_variance(const std::vector<FeatureVector>& data) {
    const std::size_t n = data.size();
    const std::size_t dim = data.front().size();
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (const auto& x : data)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += x[d];
    for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(n);
    for (const auto& x : data)
        for (std::size_t d = 0; d < dim; ++d) {
            const double dv = x[d] - mean[d];
            var[d] += dv * dv;
        }
    for (std::size_t d = 0; d < dim; ++d)
        var[d] = std::max(var[d] / static_cast<double>(n), kVarianceFloor);
    return var;
}

} // namespace

std::pair<GmmModel, EmTrace> fit_em(const std::vector<FeatureVector>& data,
                                    std::size_t n_components,
                                    std::uint64_t seed, const EmOptions& opts) {
    if (n_components < 1) throw Error("GMM needs at least one component");
    if (data.size() < n_components)
        throw TooFewSamples("EM needs at least " + std::to_string(n_components) +
                            " samples, got " + std::to_string(data.size()));
    const std::size_t n = data.size();
    const std::size_t dim = data.front().size();
    for (const auto& x : data)
        if (x.size() != dim)
            throw DimensionMismatch("inconsistent sample dimensions in EM fit");

    Rng rng(seed);
    const std::vector<double> gvar = global_variance(data);

    GmmModel model;
    model.weights.assign(n_components, 1.0 / static_cast<double>(n_components));
    model.components.resize(n_components);
    {
        const auto centers = kmeans(data, n_components, rng);
        for (std::size_t c = 0; c < n_components; ++c) {
            model.components[c].mean = centers[c];
            model.components[c].var = gvar;
        }
    }

    EmTrace trace;
    std::vector<std::vector<double>> resp(n, std::vector<double>(n_components));
    std::vector<double> comp_ll(n_components);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
        // E-step and current-parameter log-likelihood.
        double total_ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < n_components; ++c)
                comp_ll[c] = (model.weights[c] > 0.0
                                  ? std::log(model.weights[c])
                                  : -std::numeric_limits<double>::infinity()) +
                             log_gaussian(model.components[c], data[i]);
            const double lse = log_sum_exp(comp_ll);
            total_ll += lse;
            for (std::size_t c = 0; c < n_components; ++c)
                resp[i][c] = std::exp(comp_ll[c] - lse);
        }
        const double avg_ll = total_ll / static_cast<double>(n);
        trace.avg_log_likelihood.push_back(avg_ll);
        trace.iterations = iter + 1;

        if (iter > 0) {
            const double rel =
                (avg_ll - prev_ll) / (std::abs(prev_ll) + 1e-12);
            if (rel < opts.tol) {
                trace.converged = true;
                break;
            }
        }
        prev_ll = avg_ll;

        // M-step with variance floor and empty-component rescue.
        for (std::size_t c = 0; c < n_components; ++c) {
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) mass += resp[i][c];
            if (mass < kEmptyComponentMass) {
                // Re-seed at the point the current mixture explains worst.
                std::size_t worst = 0;
                double worst_ll = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    const double ll = log_density(model, data[i]);
                    if (ll < worst_ll) {
                        worst_ll = ll;
                        worst = i;
                    }
                }
                model.components[c].mean = data[worst];
                model.components[c].var = gvar;
                model.weights[c] = 1.0 / static_cast<double>(n);
                continue;
            }
            model.weights[c] = mass / static_cast<double>(n);
            auto& comp = model.components[c];
            comp.mean.assign(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t d = 0; d < dim; ++d)
                    comp.mean[d] += resp[i][c] * data[i][d];
            for (std::size_t d = 0; d < dim; ++d) comp.mean[d] /= mass;
            comp.var.assign(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t d = 0; d < dim; ++d) {
                    const double dv = data[i][d] - comp.mean[d];
                    comp.var[d] += resp[i][c] * dv * dv;
                }
            for (std::size_t d = 0; d < dim; ++d)
                comp.var[d] = std::max(comp.var[d] / mass, kVarianceFloor);
        }
        double wsum = 0.0;
        for (double w : model.weights) wsum += w;
        for (double& w : model.weights) w /= wsum;
    }

    return {std::move(model), std::move(trace)};
}

double log_density(const GmmModel& model, const FeatureVector& x) {
    if (x.size() != model.dim())
        throw DimensionMismatch("point dimension " + std::to_string(x.size()) +
                                " does not match GMM dimension " +
                                std::to_string(model.dim()));
    std::vector<double> terms(model.component_count());
    for (std::size_t c = 0; c < model.component_count(); ++c)
        terms[c] = (model.weights[c] > 0.0
                        ? std::log(model.weights[c])
                        : -std::numeric_limits<double>::infinity()) +
                   log_gaussian(model.components[c], x);
    return log_sum_exp(terms);
}

std::vector<FeatureVector> sample(const GmmModel& model, Rng& rng,
                                  std::size_t count) {
    const std::size_t dim = model.dim();
    std::vector<FeatureVector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.uniform();
        std::size_t pick = model.component_count() - 1;
        double acc = 0.0;
        for (std::size_t c = 0; c < model.component_count(); ++c) {
            acc += model.weights[c];
            if (u < acc) {
                pick = c;
                break;
            }
        }
        const auto& comp = model.components[pick];
        FeatureVector x(dim);
        for (std::size_t d = 0; d < dim; ++d)
            x[d] = comp.mean[d] + std::sqrt(comp.var[d]) * rng.gaussian();
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace patchcrf
