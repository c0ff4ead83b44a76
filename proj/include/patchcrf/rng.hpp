#ifndef PATCHCRF_RNG_HPP
#define PATCHCRF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace patchcrf {

// splitmix64 finalizer; used to derive independent sub-seeds from a global
// seed so that serial and parallel schedules consume identical streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag_a,
                              std::uint64_t tag_b) {
    return mix64(seed ^ mix64(tag_a ^ mix64(tag_b)));
}

// Seeded generator with explicit uniform/gaussian draws. Gaussian sampling
// is Box-Muller over fixed-width uniforms so every call consumes exactly
// two raw draws regardless of the value produced.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    double gaussian() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace patchcrf

#endif
