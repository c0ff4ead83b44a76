#ifndef PATCHCRF_SVM_HPP
#define PATCHCRF_SVM_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "patchcrf/descriptor.hpp"
#include "patchcrf/errors.hpp"

namespace patchcrf {

// exp(-gamma * ||x - y||^2)
double rbf_kernel(const FeatureVector& x, const FeatureVector& y, double gamma);

struct SvmOptions {
    double c = 10.0;
    double gamma = 1.0; // callers usually pass 1/dim
    double tol = 1e-3;
    std::size_t max_passes = 10000;
    std::uint64_t seed = 0;
};

// Soft-margin binary RBF machine in dual form.
struct RbfBinarySvm {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> dual_coeffs; // alpha_i * y_i
    double bias = 0.0;
    double gamma = 1.0;
    double c = 1.0;
    bool converged = true; // false when the SMO pass cap was hit
};

// SMO solver; labels must be -1/+1 with both classes present. Pair
// selection is the classic max |E1 - E2| heuristic over a sweep of KKT
// violators, with a seeded random partner as fallback.
RbfBinarySvm train_binary(const std::vector<FeatureVector>& x,
                          const std::vector<int>& y, const SvmOptions& opts);

double decision(const RbfBinarySvm& machine, const FeatureVector& x);

struct OneVsAllSvm {
    std::vector<RbfBinarySvm> machines; // one per class, class order
};

// Machine j is trained with class j positive, everything else negative.
// Machines may be trained concurrently; each gets a per-class sub-seed.
OneVsAllSvm train_ova(const std::vector<FeatureVector>& x,
                      const std::vector<std::size_t>& labels,
                      std::size_t class_count, const SvmOptions& opts,
                      unsigned threads = 1);

// Argmax of decision values; ties break to the lowest class index.
std::size_t predict_ova(const OneVsAllSvm& model, const FeatureVector& x);

std::vector<double> decision_values(const OneVsAllSvm& model,
                                    const FeatureVector& x);

} // namespace patchcrf

#endif
