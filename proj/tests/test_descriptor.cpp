#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "patchcrf/descriptor.hpp"

using namespace patchcrf;

namespace {

const GaborBank& bank() {
    static GaborBank b;
    return b;
}

GrayImage grating(double lambda, double theta, double phase = 0.0) {
    GrayImage img;
    img.width = GaborBank::kPatchSize;
    img.height = GaborBank::kPatchSize;
    img.pixels.resize(img.width * img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) {
            const double t = static_cast<double>(x) * std::cos(theta) +
                             static_cast<double>(y) * std::sin(theta);
            img.at(y, x) =
                0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * t / lambda + phase);
        }
    return img;
}

// Grating with integer cycle counts (k, l) over the 64-sample mirror
// period, phased so the reflected extension is seamless. Off-lattice
// frequencies leak energy into other orientations when the borders fold.
GrayImage lattice_grating(long k, long l) {
    GrayImage img;
    img.width = GaborBank::kPatchSize;
    img.height = GaborBank::kPatchSize;
    img.pixels.resize(img.width * img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            img.at(y, x) =
                0.5 + 0.5 * std::cos(std::numbers::pi *
                                     (static_cast<double>(k) * (2.0 * x + 1.0) +
                                      static_cast<double>(l) * (2.0 * y + 1.0)) /
                                     64.0);
    return img;
}

std::size_t argmax(const FeatureVector& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

} // namespace

TEST_CASE("bank geometry") {
    CHECK(GaborBank::kFilterCount == 32);
    CHECK(bank().orientation(2) == doctest::Approx(std::numbers::pi / 4.0));
    CHECK(bank().wavelength(0) == doctest::Approx(4.0));
    CHECK(bank().wavelength(3) == doctest::Approx(32.0));
}

TEST_CASE("kernels are DC-free") {
    for (std::size_t s = 0; s < GaborBank::kScales; ++s)
        for (std::size_t o = 0; o < GaborBank::kOrientations; ++o) {
            std::complex<double> sum{0.0, 0.0};
            for (const auto& v : bank().kernel(s, o)) sum += v;
            const auto mean = sum / static_cast<double>(bank().kernel(s, o).size());
            CHECK(std::abs(mean) < 1e-10);
        }
}

TEST_CASE("constant patch gives zero responses") {
    GrayImage patch{32, 32, std::vector<double>(1024, 0.7)};
    const auto f = bank().describe(patch);
    REQUIRE(f.size() == 32);
    for (double v : f) CHECK(v <= 1e-6);
}

TEST_CASE("wrong patch size is rejected") {
    GrayImage patch{16, 16, std::vector<double>(256, 0.0)};
    CHECK_THROWS_AS(bank().describe(patch), WrongPatchSize);
}

TEST_CASE("matched grating peaks at the matched filter") {
    const auto f = bank().describe(grating(bank().wavelength(1), 0.0));
    CHECK(argmax(f) == 1 * GaborBank::kOrientations + 0);
}

TEST_CASE("lattice-matched gratings peak at every filter") {
    for (std::size_t s = 0; s < GaborBank::kScales; ++s)
        for (std::size_t o = 0; o < GaborBank::kOrientations; ++o) {
            const double cycles = 64.0 / bank().wavelength(s);
            const long k = std::lround(cycles * std::cos(bank().orientation(o)));
            const long l = std::lround(cycles * std::sin(bank().orientation(o)));
            const auto f = bank().describe(lattice_grating(k, l));
            CHECK(argmax(f) == s * GaborBank::kOrientations + o);
        }
}

TEST_CASE("rotation coherence at a fixed scale") {
    const std::size_t s = 1;
    for (std::size_t k = 0; k < GaborBank::kOrientations; ++k) {
        const auto f =
            bank().describe(grating(bank().wavelength(s), bank().orientation(k)));
        std::size_t best_o = 0;
        for (std::size_t o = 1; o < GaborBank::kOrientations; ++o)
            if (f[s * 8 + o] > f[s * 8 + best_o]) best_o = o;
        CHECK(best_o == k);
    }
}

TEST_CASE("translation tolerance of pooled magnitudes") {
    // A circular shift desynchronizes the pattern from its reflected
    // border continuation, so values do move (dominated by the folded
    // borders at coarse scales). The guarantee that holds: the matched
    // response stays dominant and moves by a bounded relative amount.
    const GrayImage base = grating(8.0, 0.0);
    const std::size_t matched = 1 * GaborBank::kOrientations + 0;
    const auto fa = bank().describe(base);
    REQUIRE(argmax(fa) == matched);
    for (std::size_t shift = 1; shift <= 4; ++shift) {
        GrayImage shifted = base;
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t x = 0; x < 32; ++x)
                shifted.at(y, x) = base.at(y, (x + shift) % 32);
        const auto fb = bank().describe(shifted);
        CHECK(argmax(fb) == matched);
        CHECK(std::abs(fa[matched] - fb[matched]) / fa[matched] < 0.20);
    }
}

TEST_CASE("descriptor determinism") {
    const GrayImage patch = grating(8.0, std::numbers::pi / 8.0, 0.3);
    const auto a = bank().describe(patch);
    const auto b = bank().describe(patch);
    GaborBank fresh;
    const auto c = fresh.describe(patch);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("scaler fit and apply") {
    SUBCASE("symmetric vectors have zero mean") {
        const std::vector<FeatureVector> data{{1.0, -2.0}, {-1.0, 2.0}};
        const auto s = fit_scaler(data);
        CHECK(s.mean[0] == doctest::Approx(0.0));
        CHECK(s.mean[1] == doctest::Approx(0.0));
    }
    SUBCASE("identical vectors hit the std floor") {
        const std::vector<FeatureVector> data{{3.0}, {3.0}, {3.0}};
        const auto s = fit_scaler(data);
        CHECK(s.std_dev[0] == doctest::Approx(FeatureScaler::kStdFloor));
    }
    SUBCASE("population convention") {
        const auto s = fit_scaler({{0.0}, {2.0}});
        CHECK(s.mean[0] == doctest::Approx(1.0));
        CHECK(s.std_dev[0] == doctest::Approx(1.0));
    }
    SUBCASE("apply centers and scales") {
        const auto s = fit_scaler({{0.0}, {2.0}});
        CHECK(apply_scaler(s, {1.0})[0] == doctest::Approx(0.0));
        CHECK(apply_scaler(s, {2.0})[0] == doctest::Approx(1.0));
    }
    SUBCASE("identity scaler") {
        FeatureScaler s;
        s.mean = {0.0, 0.0};
        s.std_dev = {1.0, 1.0};
        const FeatureVector v{0.25, -4.0};
        CHECK(apply_scaler(s, v) == v);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(fit_scaler({{1.0}}), InsufficientData);
        const auto s = fit_scaler({{0.0}, {2.0}});
        CHECK_THROWS_AS(apply_scaler(s, {1.0, 2.0}), DimensionMismatch);
    }
}
