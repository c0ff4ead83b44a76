#ifndef PATCHCRF_GMM_HPP
#define PATCHCRF_GMM_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "patchcrf/descriptor.hpp"
#include "patchcrf/errors.hpp"
#include "patchcrf/rng.hpp"

namespace patchcrf {

constexpr double kVarianceFloor = 1e-6;

struct DiagonalGaussian {
    std::vector<double> mean;
    std::vector<double> var; // each >= kVarianceFloor
};

struct GmmModel {
    std::vector<double> weights; // nonnegative, sum to 1
    std::vector<DiagonalGaussian> components;

    std::size_t dim() const {
        return components.empty() ? 0 : components.front().mean.size();
    }
    std::size_t component_count() const { return components.size(); }
};

struct EmTrace {
    std::vector<double> avg_log_likelihood; // one entry per EM iteration
    std::size_t iterations = 0;
    bool converged = false;
};

struct EmOptions {
    std::size_t max_iters = 200;
    double tol = 1e-6; // relative log-likelihood improvement
};

// EM fit with seeded k-means++ initialization (10 Lloyd iterations),
// population-variance M-step, variance floor, and re-seeding of components
// whose responsibility mass collapses.
std::pair<GmmModel, EmTrace> fit_em(const std::vector<FeatureVector>& data,
                                    std::size_t n_components,
                                    std::uint64_t seed,
                                    const EmOptions& opts = {});

// log sum_i w_i N(x; mu_i, diag(var_i)), via log-sum-exp.
double log_density(const GmmModel& model, const FeatureVector& x);

// Ancestral sampling: component by weight, then per-dimension Gaussian.
std::vector<FeatureVector> sample(const GmmModel& model, Rng& rng,
                                  std::size_t count);

} // namespace patchcrf

#endif
