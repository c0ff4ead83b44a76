#ifndef PATCHCRF_CRF_CHAIN_HPP
#define PATCHCRF_CRF_CHAIN_HPP

#include <cstddef>
#include <vector>

#include "patchcrf/descriptor.hpp"
#include "patchcrf/gmm.hpp"
#include "patchcrf/transition.hpp"

namespace patchcrf {

// n x m log GMM densities: u[k][c] = log p(feature of patch k | class c).
struct UnaryPotentials {
    std::vector<std::vector<double>> u;

    std::size_t positions() const { return u.size(); }
    std::size_t classes() const { return u.empty() ? 0 : u.front().size(); }
};

// Elementwise natural log of a TransitionMatrix.
struct LogTransition {
    std::vector<std::vector<double>> log_q;

    std::size_t classes() const { return log_q.size(); }
};

LogTransition to_log(const TransitionMatrix& q);

// Prefix table: row k-1 holds log alpha_k(c) for k = 1..n-1, the log-sum
// over label prefixes ending with a transition into class c at position
// k+1. The boundary log alpha_0 = 0 is implicit.
struct LogAlphaTable {
    std::vector<std::vector<double>> rows; // (n-1) x m
};

// Suffix table: row k-2 holds log beta_k(c) for k = 2..n, the log-sum over
// label suffixes starting with a transition out of class c at position k-1.
// The boundary log beta_{n+1} = 0 is implicit.
struct LogBetaTable {
    std::vector<std::vector<double>> rows; // (n-1) x m
};

// n x m posterior marginals P(y_k = c | X); rows sum to 1.
struct MarginalMatrix {
    std::vector<std::vector<double>> p;

    std::size_t positions() const { return p.size(); }
    std::size_t classes() const { return p.empty() ? 0 : p.front().size(); }
};

// Length n*m class-major concatenation of marginal columns.
using ProbabilisticFeature = std::vector<double>;

// u[k][c] = log_density(gmms[c], features[k]).
UnaryPotentials compute_unaries(const std::vector<GmmModel>& gmms,
                                const std::vector<FeatureVector>& features);

// Log-domain forward pass; returns the prefix table and log Z.
std::pair<LogAlphaTable, double> forward(const UnaryPotentials& u,
                                         const LogTransition& lq);

// Log-domain backward pass; log Z must agree with the forward pass.
std::pair<LogBetaTable, double> backward(const UnaryPotentials& u,
                                         const LogTransition& lq);

// O(m^n) enumeration oracle; guarded at m^n <= 10^6.
double brute_force_logZ(const UnaryPotentials& u, const LogTransition& lq);

// p[k][c] proportional to exp(u[k][c] + log alpha_{k-1}(c) + log beta_{k+1}(c)),
// rows normalized to 1.
MarginalMatrix marginals(const UnaryPotentials& u, const LogAlphaTable& alpha,
                         const LogBetaTable& beta);

// out[(j)*n + k] = p[k][j]: marginals of class j at every position, classes
// concatenated in order.
ProbabilisticFeature assemble_feature(const MarginalMatrix& p);

} // namespace patchcrf

#endif
