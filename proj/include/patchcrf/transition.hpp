#ifndef PATCHCRF_TRANSITION_HPP
#define PATCHCRF_TRANSITION_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "patchcrf/gmm.hpp"

namespace patchcrf {

// Row-stochastic class-preference matrix: entry (a, b) is the probability
// of label b following label a along the scan path.
struct TransitionMatrix {
    std::vector<std::vector<double>> q; // m x m, rows sum to 1

    std::size_t class_count() const { return q.size(); }
};

// Monte-Carlo KL(ga || gb): mean of log ga(x) - log gb(x) over n_samples
// draws from ga, clamped at 0 (the estimate can dip negative from noise).
double mc_kl_divergence(const GmmModel& ga, const GmmModel& gb,
                        std::size_t n_samples, Rng& rng);

struct TransitionOptions {
    std::size_t n_samples = 100000;
    std::uint64_t seed = 0;
    // Whether the softmax normalization includes the self class (whose
    // divergence is identically 0). When false the diagonal is 0 and each
    // row is normalized over the other classes.
    bool include_self = true;
};

// Row-wise softmax of negated distances: Q[a][b] = exp(-dist[a][b]) /
// sum_c exp(-dist[a][c]). With include_self = false the diagonal is zeroed
// and rows normalize over the other classes.
TransitionMatrix preference_from_distances(
    const std::vector<std::vector<double>>& dist, bool include_self = true);

// Q[a][b] = exp(-KL(a||b)) / sum_c exp(-KL(a||c)). Each (a, b) pair uses a
// sub-seed derived from (seed, a, b) so parallel and serial runs agree.
TransitionMatrix build_transition_matrix(const std::vector<GmmModel>& gmms,
                                         const TransitionOptions& opts,
                                         unsigned threads = 1);

} // namespace patchcrf

#endif
