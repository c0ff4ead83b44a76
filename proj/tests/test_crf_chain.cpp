#include <doctest.h>

#include <cmath>

#include "patchcrf/crf_chain.hpp"
#include "patchcrf/numeric.hpp"
#include "patchcrf/rng.hpp"

using namespace patchcrf;

namespace {

UnaryPotentials random_unaries(std::size_t n, std::size_t m, Rng& rng) {
    UnaryPotentials u;
    u.u.assign(n, std::vector<double>(m));
    for (auto& row : u.u)
        for (double& v : row) v = rng.uniform(-10.0, 10.0);
    return u;
}

LogTransition random_log_transition(std::size_t m, Rng& rng) {
    TransitionMatrix t;
    t.q.assign(m, std::vector<double>(m));
    for (auto& row : t.q) {
        double sum = 0.0;
        for (double& v : row) {
            v = rng.uniform(0.05, 1.0);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return to_log(t);
}

// Enumeration-based marginals: sum sequence weights with y_k fixed.
MarginalMatrix brute_force_marginals(const UnaryPotentials& u,
                                     const LogTransition& lq) {
    const std::size_t n = u.positions();
    const std::size_t m = u.classes();
    std::vector<std::vector<std::vector<double>>> scores(
        n, std::vector<std::vector<double>>(m));
    std::vector<std::size_t> labels(n, 0);
    for (;;) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += u.u[k][labels[k]];
        for (std::size_t k = 0; k + 1 < n; ++k)
            s += lq.log_q[labels[k]][labels[k + 1]];
        for (std::size_t k = 0; k < n; ++k) scores[k][labels[k]].push_back(s);
        std::size_t k = 0;
        while (k < n && ++labels[k] == m) labels[k++] = 0;
        if (k == n) break;
    }
    MarginalMatrix out;
    out.p.assign(n, std::vector<double>(m));
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> lse(m);
        for (std::size_t c = 0; c < m; ++c) lse[c] = log_sum_exp(scores[k][c]);
        const double z = log_sum_exp(lse);
        for (std::size_t c = 0; c < m; ++c) out.p[k][c] = std::exp(lse[c] - z);
    }
    return out;
}

LogTransition single_class_transition() {
    TransitionMatrix t;
    t.q = {{1.0}};
    return to_log(t);
}

} // namespace

TEST_CASE("single-class chains") {
    UnaryPotentials u;
    u.u = {{-1.5}, {-2.0}, {-0.5}};
    const auto lq = single_class_transition();
    const auto [alpha, log_z] = forward(u, lq);
    CHECK(log_z == doctest::Approx(-4.0).epsilon(1e-12));
    const auto [beta, log_zb] = backward(u, lq);
    CHECK(log_zb == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(brute_force_logZ(u, lq) == doctest::Approx(-4.0).epsilon(1e-12));
    const auto p = marginals(u, alpha, beta);
    for (const auto& row : p.p) CHECK(row[0] == doctest::Approx(1.0));
}

TEST_CASE("length-one chain is a softmax over unaries") {
    UnaryPotentials u;
    u.u = {{0.0, 0.0, 0.0}};
    LogTransition lq;
    lq.log_q.assign(3, std::vector<double>(3, std::log(1.0 / 3.0)));
    const auto [alpha, log_z] = forward(u, lq);
    CHECK(log_z == doctest::Approx(std::log(3.0)));
    const auto [beta, log_zb] = backward(u, lq);
    CHECK(log_zb == doctest::Approx(std::log(3.0)));
    const auto p = marginals(u, alpha, beta);
    for (double v : p.p[0]) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("uniform two-position chain") {
    UnaryPotentials u;
    u.u = {{0.0, 0.0}, {0.0, 0.0}};
    LogTransition lq;
    lq.log_q.assign(2, std::vector<double>(2, std::log(0.5)));
    CHECK(brute_force_logZ(u, lq) == doctest::Approx(std::log(2.0)));
    const auto [alpha, log_z] = forward(u, lq);
    CHECK(log_z == doctest::Approx(std::log(2.0)));
}

TEST_CASE("forward, backward and enumeration agree on random instances") {
    Rng rng(2024);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng.index(6);
        const std::size_t m = 1 + rng.index(4);
        const auto u = random_unaries(n, m, rng);
        const auto lq = random_log_transition(m, rng);
        const auto [alpha, zf] = forward(u, lq);
        const auto [beta, zb] = backward(u, lq);
        const double zo = brute_force_logZ(u, lq);
        REQUIRE(std::abs(zf - zb) < 1e-9);
        REQUIRE(std::abs(zf - zo) < 1e-9);

        const auto fast = marginals(u, alpha, beta);
        const auto slow = brute_force_marginals(u, lq);
        for (std::size_t k = 0; k < n; ++k) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                REQUIRE(std::abs(fast.p[k][c] - slow.p[k][c]) < 1e-9);
                row_sum += fast.p[k][c];
            }
            REQUIRE(std::abs(row_sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("unary shift invariance") {
    Rng rng(7);
    const auto u = random_unaries(5, 3, rng);
    const auto lq = random_log_transition(3, rng);
    UnaryPotentials shifted = u;
    const double kappa = 3.7;
    for (auto& row : shifted.u)
        for (double& v : row) v += kappa;

    const auto [a1, z1] = forward(u, lq);
    const auto [b1, zb1] = backward(u, lq);
    const auto [a2, z2] = forward(shifted, lq);
    const auto [b2, zb2] = backward(shifted, lq);
    CHECK(z2 == doctest::Approx(z1 + 5.0 * kappa).epsilon(1e-9));
    const auto p1 = marginals(u, a1, b1);
    const auto p2 = marginals(shifted, a2, b2);
    for (std::size_t k = 0; k < 5; ++k)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(p1.p[k][c] == doctest::Approx(p2.p[k][c]).epsilon(1e-9));
}

TEST_CASE("compute_unaries fills log densities") {
    GmmModel g;
    g.weights = {1.0};
    g.components = {{{0.0}, {1.0}}};
    const auto u = compute_unaries({g, g}, {{0.0}, {1.0}});
    CHECK(u.positions() == 2);
    CHECK(u.classes() == 2);
    CHECK(u.u[0][0] == doctest::Approx(-0.9189385332));
    CHECK(u.u[0][0] == u.u[0][1]); // identical GMMs, identical columns
    CHECK(u.u[1][0] == doctest::Approx(-1.4189385332));
}

TEST_CASE("assemble_feature layout") {
    MarginalMatrix p;
    p.p = {{0.3, 0.7}, {0.6, 0.4}};
    CHECK(assemble_feature(p) ==
          ProbabilisticFeature{0.3, 0.6, 0.7, 0.4});

    MarginalMatrix ones;
    ones.p = {{1.0}, {1.0}, {1.0}};
    CHECK(assemble_feature(ones) == ProbabilisticFeature{1.0, 1.0, 1.0});

    double sum = 0.0;
    for (double v : assemble_feature(p)) sum += v;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-9)); // n rows, each sums to 1
}

TEST_CASE("oracle guard") {
    UnaryPotentials u;
    u.u.assign(30, std::vector<double>(4, 0.0));
    LogTransition lq;
    lq.log_q.assign(4, std::vector<double>(4, std::log(0.25)));
    CHECK_THROWS_AS(brute_force_logZ(u, lq), InstanceTooLarge);
}
