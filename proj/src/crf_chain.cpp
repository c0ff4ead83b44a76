#include "patchcrf/crf_chain.hpp"

#include <cmath>

#include "patchcrf/numeric.hpp"

namespace patchcrf {

LogTransition to_log(const TransitionMatrix& q) {
    LogTransition lt;
    lt.log_q.resize(q.q.size());
    for (std::size_t a = 0; a < q.q.size(); ++a) {
        lt.log_q[a].resize(q.q[a].size());
        for (std::size_t b = 0; b < q.q[a].size(); ++b)
            lt.log_q[a][b] = std::log(q.q[a][b]);
    }
    return lt;
}

UnaryPotentials compute_unaries(const std::vector<GmmModel>& gmms,
                                const std::vector<FeatureVector>& features) {
    UnaryPotentials out;
    out.u.resize(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        out.u[k].resize(gmms.size());
        for (std::size_t c = 0; c < gmms.size(); ++c)
            out.u[k][c] = log_density(gmms[c], features[k]);
    }
    return out;
}

std::pair<LogAlphaTable, double> forward(const UnaryPotentials& u,
                                         const LogTransition& lq) {
    const std::size_t n = u.positions();
    const std::size_t m = u.classes();
    LogAlphaTable alpha;
    if (n == 0 || m == 0) throw Error("forward needs n >= 1 and m >= 1");
    if (lq.classes() != m)
        throw DimensionMismatch("transition size does not match class count");

    if (n == 1) return {alpha, log_sum_exp(u.u[0])};

    alpha.rows.assign(n - 1, std::vector<double>(m));
    std::vector<double> terms(m);
    for (std::size_t t = 0; t < n - 1; ++t) {
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t a = 0; a < m; ++a)
                terms[a] = u.u[t][a] + lq.log_q[a][c] +
                           (t > 0 ? alpha.rows[t - 1][a] : 0.0);
            alpha.rows[t][c] = log_sum_exp(terms);
        }
    }
    for (std::size_t c = 0; c < m; ++c)
        terms[c] = u.u[n - 1][c] + alpha.rows[n - 2][c];
    return {std::move(alpha), log_sum_exp(terms)};
}

std::pair<LogBetaTable, double> backward(const UnaryPotentials& u,
                                         const LogTransition& lq) {
    const std::size_t n = u.positions();
    const std::size_t m = u.classes();
    LogBetaTable beta;
    if (n == 0 || m == 0) throw Error("backward needs n >= 1 and m >= 1");
    if (lq.classes() != m)
        throw DimensionMismatch("transition size does not match class count");

    if (n == 1) return {beta, log_sum_exp(u.u[0])};

    // Row t holds log beta_{t+2}: the suffix over positions t+1..n-1 plus
    // the transition out of class c at position t.
    beta.rows.assign(n - 1, std::vector<double>(m));
    std::vector<double> terms(m);
    for (std::size_t t = n - 1; t-- > 0;) {
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t b = 0; b < m; ++b)
                terms[b] = u.u[t + 1][b] + lq.log_q[c][b] +
                           (t + 1 < n - 1 ? beta.rows[t + 1][b] : 0.0);
            beta.rows[t][c] = log_sum_exp(terms);
        }
    }
    for (std::size_t c = 0; c < m; ++c) terms[c] = u.u[0][c] + beta.rows[0][c];
    return {std::move(beta), log_sum_exp(terms)};
}

double brute_force_logZ(const UnaryPotentials& u, const LogTransition& lq) {
    const std::size_t n = u.positions();
    const std::size_t m = u.classes();
    if (n == 0 || m == 0) throw Error("oracle needs n >= 1 and m >= 1");
    double count = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        count *= static_cast<double>(m);
        if (count > 1e6)
            throw InstanceTooLarge("m^n exceeds the 10^6 oracle guard");
    }

    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(count));
    std::vector<std::size_t> labels(n, 0);
    for (;;) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += u.u[k][labels[k]];
        for (std::size_t k = 0; k + 1 < n; ++k)
            s += lq.log_q[labels[k]][labels[k + 1]];
        scores.push_back(s);
        // odometer increment
        std::size_t k = 0;
        while (k < n && ++labels[k] == m) labels[k++] = 0;
        if (k == n) break;
    }
    return log_sum_exp(scores);
}

MarginalMatrix marginals(const UnaryPotentials& u, const LogAlphaTable& alpha,
                         const LogBetaTable& beta) {
    const std::size_t n = u.positions();
    const std::size_t m = u.classes();
    if (n > 1 && (alpha.rows.size() != n - 1 || beta.rows.size() != n - 1))
        throw DimensionMismatch("alpha/beta tables do not match the chain length");

    MarginalMatrix out;
    out.p.assign(n, std::vector<double>(m));
    std::vector<double> score(m), ex(m);
    for (std::size_t k = 0; k < n; ++k) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < m; ++c) {
            score[c] = u.u[k][c] + (k > 0 ? alpha.rows[k - 1][c] : 0.0) +
                       (k + 1 < n ? beta.rows[k][c] : 0.0);
            mx = std::max(mx, score[c]);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            ex[c] = std::exp(score[c] - mx);
            sum += ex[c];
        }
        for (std::size_t c = 0; c < m; ++c) out.p[k][c] = ex[c] / sum;
    }
    return out;
}

ProbabilisticFeature assemble_feature(const MarginalMatrix& p) {
    const std::size_t n = p.positions();
    const std::size_t m = p.classes();
    ProbabilisticFeature f(n * m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < n; ++k) f[j * n + k] = p.p[k][j];
    return f;
}

} // namespace patchcrf
