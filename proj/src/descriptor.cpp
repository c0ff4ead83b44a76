#include "patchcrf/descriptor.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace patchcrf {

FeatureScaler fit_scaler(const std::vector<FeatureVector>& features) {
    if (features.size() < 2)
        throw InsufficientData("fit_scaler needs at least 2 feature vectors");
    const std::size_t d = features.front().size();
    for (const auto& f : features)
        if (f.size() != d)
            throw DimensionMismatch("inconsistent feature dimensions in scaler fit");

    FeatureScaler s;
    s.mean.assign(d, 0.0);
    s.std_dev.assign(d, 0.0);
    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (const auto& f : features)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += f[j];
    for (std::size_t j = 0; j < d; ++j) s.mean[j] *= inv_n;
    for (const auto& f : features)
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = f[j] - s.mean[j];
            s.std_dev[j] += dv * dv;
        }
    for (std::size_t j = 0; j < d; ++j)
        s.std_dev[j] = std::max(std::sqrt(s.std_dev[j] * inv_n),
                                FeatureScaler::kStdFloor);
    return s;
}

FeatureVector apply_scaler(const FeatureScaler& scaler, const FeatureVector& v) {
    if (v.size() != scaler.mean.size())
        throw DimensionMismatch("feature dimension " + std::to_string(v.size()) +
                                " does not match scaler dimension " +
                                std::to_string(scaler.mean.size()));
    FeatureVector out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        out[j] = (v[j] - scaler.mean[j]) / scaler.std_dev[j];
    return out;
}

namespace {

constexpr double kSigmaPerLambda = 0.56;
constexpr double kSupportSigmas = 3.0;

// Symmetric (edge-repeating) reflection of index i into [0, n).
std::size_t mirror_index(long i, std::size_t n) {
    const long period = 2 * static_cast<long>(n);
    long m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<long>(n)) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

// Smallest 2^a * 3^b * 5^c >= n; FFTW handles these sizes efficiently.
std::size_t next_fft_size(std::size_t n) {
    for (std::size_t v = n;; ++v) {
        std::size_t r = v;
        for (std::size_t f : {2, 3, 5})
            while (r % f == 0) r /= f;
        if (r == 1) return v;
    }
}

// FFTW planning is not thread-safe; bank construction serializes on this.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

struct GaborBank::Impl {
    struct Scale {
        std::size_t half = 0;        // kernel half-width, ceil(3 sigma)
        std::size_t ksize = 0;       // 2*half + 1
        std::size_t padded = 0;      // patch + 2*half
        std::size_t fft = 0;         // transform side, >= padded + ksize - 1
        fftw_plan forward = nullptr;
        fftw_plan inverse = nullptr;
        // Kernel spectra per orientation, fft x fft each.
        std::vector<std::vector<std::complex<double>>> spectra;
    };

    std::vector<Scale> scales;
    // Spatial kernels, [scale*kOrientations + orient].
    std::vector<std::vector<std::complex<double>>> kernels;

    ~Impl() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        for (auto& s : scales) {
            if (s.forward) fftw_destroy_plan(s.forward);
            if (s.inverse) fftw_destroy_plan(s.inverse);
        }
    }
};

GaborBank::GaborBank() : impl_(std::make_unique<Impl>()) {
    impl_->scales.resize(kScales);
    impl_->kernels.resize(kFilterCount);

    for (std::size_t s = 0; s < kScales; ++s) {
        auto& sc = impl_->scales[s];
        const double lambda = wavelength(s);
        const double sigma = kSigmaPerLambda * lambda;
        sc.half = static_cast<std::size_t>(std::ceil(kSupportSigmas * sigma));
        sc.ksize = 2 * sc.half + 1;
        sc.padded = kPatchSize + 2 * sc.half;
        sc.fft = next_fft_size(sc.padded + sc.ksize - 1);
        sc.spectra.resize(kOrientations);

        std::vector<std::complex<double>> buf(sc.fft * sc.fft);
        {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex());
            auto* raw = reinterpret_cast<fftw_complex*>(buf.data());
            const int n = static_cast<int>(sc.fft);
            sc.forward = fftw_plan_dft_2d(n, n, raw, raw, FFTW_FORWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
            sc.inverse = fftw_plan_dft_2d(n, n, raw, raw, FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        }

        for (std::size_t o = 0; o < kOrientations; ++o) {
            const double theta = orientation(o);
            const double ct = std::cos(theta), st = std::sin(theta);
            std::vector<std::complex<double>> k(sc.ksize * sc.ksize);
            std::complex<double> sum{0.0, 0.0};
            for (std::size_t y = 0; y < sc.ksize; ++y) {
                const double dy = static_cast<double>(y) - static_cast<double>(sc.half);
                for (std::size_t x = 0; x < sc.ksize; ++x) {
                    const double dx =
                        static_cast<double>(x) - static_cast<double>(sc.half);
                    const double xr = dx * ct + dy * st;
                    const double yr = -dx * st + dy * ct;
                    const double env =
                        std::exp(-(xr * xr + yr * yr) / (2.0 * sigma * sigma));
                    const double phase = 2.0 * std::numbers::pi * xr / lambda;
                    k[y * sc.ksize + x] =
                        env * std::complex<double>(std::cos(phase), std::sin(phase));
                    sum += k[y * sc.ksize + x];
                }
            }
            // DC correction, then unit L2 norm.
            const std::complex<double> mean = sum / static_cast<double>(k.size());
            double norm2 = 0.0;
            for (auto& v : k) {
                v -= mean;
                norm2 += std::norm(v);
            }
            const double inv_norm = 1.0 / std::sqrt(norm2);
            for (auto& v : k) v *= inv_norm;

            // Spectrum of the zero-padded kernel.
            std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
            for (std::size_t y = 0; y < sc.ksize; ++y)
                for (std::size_t x = 0; x < sc.ksize; ++x)
                    buf[y * sc.fft + x] = k[y * sc.ksize + x];
            fftw_execute_dft(sc.forward,
                             reinterpret_cast<fftw_complex*>(buf.data()),
                             reinterpret_cast<fftw_complex*>(buf.data()));
            sc.spectra[o] = buf;

            impl_->kernels[s * kOrientations + o] = std::move(k);
        }
    }
}

GaborBank::~GaborBank() = default;

double GaborBank::wavelength(std::size_t scale) const {
    return 4.0 * static_cast<double>(std::size_t{1} << scale);
}

double GaborBank::orientation(std::size_t orient) const {
    return static_cast<double>(orient) * std::numbers::pi /
           static_cast<double>(kOrientations);
}

const std::vector<std::complex<double>>& GaborBank::kernel(
    std::size_t scale, std::size_t orient) const {
    return impl_->kernels[scale * kOrientations + orient];
}

std::size_t GaborBank::kernel_side(std::size_t scale) const {
    return impl_->scales[scale].ksize;
}

FeatureVector GaborBank::describe(const GrayImage& patch) const {
    if (patch.width != kPatchSize || patch.height != kPatchSize)
        throw WrongPatchSize("descriptor needs a " + std::to_string(kPatchSize) +
                             "x" + std::to_string(kPatchSize) + " patch, got " +
                             std::to_string(patch.height) + "x" +
                             std::to_string(patch.width));

    FeatureVector out(kFilterCount, 0.0);
    for (std::size_t s = 0; s < kScales; ++s) {
        const auto& sc = impl_->scales[s];
        const std::size_t n = sc.fft;
        std::vector<std::complex<double>> img(n * n, {0.0, 0.0});
        std::vector<std::complex<double>> work(n * n);

        // Mirror-padded patch, zero-extended to the transform size.
        for (std::size_t y = 0; y < sc.padded; ++y) {
            const std::size_t sy = mirror_index(
                static_cast<long>(y) - static_cast<long>(sc.half), kPatchSize);
            for (std::size_t x = 0; x < sc.padded; ++x) {
                const std::size_t sx = mirror_index(
                    static_cast<long>(x) - static_cast<long>(sc.half), kPatchSize);
                img[y * n + x] = patch.at(sy, sx);
            }
        }
        fftw_execute_dft(sc.forward, reinterpret_cast<fftw_complex*>(img.data()),
                         reinterpret_cast<fftw_complex*>(img.data()));

        const double inv_nn = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
        for (std::size_t o = 0; o < kOrientations; ++o) {
            const auto& spec = sc.spectra[o];
            for (std::size_t i = 0; i < n * n; ++i) work[i] = img[i] * spec[i];
            fftw_execute_dft(sc.inverse,
                             reinterpret_cast<fftw_complex*>(work.data()),
                             reinterpret_cast<fftw_complex*>(work.data()));
            // Same-size output pixel (y, x) sits at linear-convolution index
            // (y + 2*half, x + 2*half) of the padded image.
            const std::size_t off = 2 * sc.half;
            double acc = 0.0;
            for (std::size_t y = 0; y < kPatchSize; ++y)
                for (std::size_t x = 0; x < kPatchSize; ++x)
                    acc += std::abs(work[(y + off) * n + (x + off)]);
            out[s * kOrientations + o] =
                acc * inv_nn / static_cast<double>(kPatchSize * kPatchSize);
        }
    }
    return out;
}

} // namespace patchcrf
