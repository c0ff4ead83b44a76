#ifndef PATCHCRF_DESCRIPTOR_HPP
#define PATCHCRF_DESCRIPTOR_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "patchcrf/errors.hpp"
#include "patchcrf/image.hpp"

namespace patchcrf {

using FeatureVector = std::vector<double>;

// Per-dimension z-score statistics fitted on a training set.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> std_dev; // floored at kStdFloor

    static constexpr double kStdFloor = 1e-8;
};

// Population-convention mean/std over >= 2 vectors of equal dimension.
FeatureScaler fit_scaler(const std::vector<FeatureVector>& features);

// (v - mean) / std, elementwise.
FeatureVector apply_scaler(const FeatureScaler& scaler, const FeatureVector& v);

// 4-scale x 8-orientation complex Gabor bank over a 32x32 working patch.
// Wavelengths 4*2^s, envelope sigma = 0.56*lambda, support cut at 3 sigma,
// kernels DC-corrected then L2-normalized. Descriptor value j = s*8 + o is
// the mean response magnitude of filter (s, o) over the patch, using
// same-size convolution with mirrored borders.
class GaborBank {
public:
    static constexpr std::size_t kScales = 4;
    static constexpr std::size_t kOrientations = 8;
    static constexpr std::size_t kFilterCount = kScales * kOrientations;
    static constexpr std::size_t kPatchSize = 32;

    GaborBank();
    ~GaborBank();
    GaborBank(const GaborBank&) = delete;
    GaborBank& operator=(const GaborBank&) = delete;

    // Thread-safe; the bank is immutable after construction.
    FeatureVector describe(const GrayImage& patch) const;

    double wavelength(std::size_t scale) const;
    double orientation(std::size_t orient) const; // radians

    // Spatial kernel of filter (scale, orient), row-major, side kernel_side(scale).
    const std::vector<std::complex<double>>& kernel(std::size_t scale,
                                                    std::size_t orient) const;
    std::size_t kernel_side(std::size_t scale) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace patchcrf

#endif
