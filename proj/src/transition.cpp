#include "patchcrf/transition.hpp"

#include <cmath>

#include "patchcrf/parallel.hpp"

namespace patchcrf {

double mc_kl_divergence(const GmmModel& ga, const GmmModel& gb,
                        std::size_t n_samples, Rng& rng) {
    if (ga.dim() != gb.dim())
        throw DimensionMismatch("KL operands have dimensions " +
                                std::to_string(ga.dim()) + " and " +
                                std::to_string(gb.dim()));
    if (n_samples < 1) throw Error("KL estimate needs at least one sample");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto x = sample(ga, rng, 1);
        acc += log_density(ga, x.front()) - log_density(gb, x.front());
    }
    const double kl = acc / static_cast<double>(n_samples);
    return kl < 0.0 ? 0.0 : kl;
}

TransitionMatrix build_transition_matrix(const std::vector<GmmModel>& gmms,
                                         const TransitionOptions& opts,
                                         unsigned threads) {
    const std::size_t m = gmms.size();
    if (m < 1) throw Error("transition matrix needs at least one class");
    for (const auto& g : gmms)
        if (g.dim() != gmms.front().dim())
            throw DimensionMismatch("class GMMs disagree on feature dimension");

    TransitionMatrix t;
    t.q.assign(m, std::vector<double>(m, 0.0));
    if (m == 1) {
        t.q[0][0] = 1.0;
        return t;
    }

    // Pairwise divergences; D(a||a) = 0 by definition, no sampling needed.
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            if (a != b) pairs.emplace_back(a, b);
    parallel_for(pairs.size(), threads, [&](std::size_t i) {
        const auto [a, b] = pairs[i];
        Rng rng(sub_seed(opts.seed, a, b));
        dist[a][b] = mc_kl_divergence(gmms[a], gmms[b], opts.n_samples, rng);
    });

    return preference_from_distances(dist, opts.include_self);
}

TransitionMatrix preference_from_distances(
    const std::vector<std::vector<double>>& dist, bool include_self) {
    const std::size_t m = dist.size();
    TransitionMatrix t;
    t.q.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a) {
        if (dist[a].size() != m)
            throw DimensionMismatch("distance matrix must be square");
        double denom = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a && !include_self) continue;
            denom += std::exp(-dist[a][b]);
        }
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a && !include_self) {
                t.q[a][b] = 0.0;
                continue;
            }
            t.q[a][b] = std::exp(-dist[a][b]) / denom;
        }
    }
    return t;
}

} // namespace patchcrf
