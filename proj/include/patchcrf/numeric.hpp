#ifndef PATCHCRF_NUMERIC_HPP
#define PATCHCRF_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace patchcrf {

// Max-shifted log(sum(exp(v))). An all-(-inf) input propagates -inf.
inline double log_sum_exp(std::span<const double> v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

} // namespace patchcrf

#endif
