// SPDX-License-Identifier: Apache-2.0
#include "biofuse/gabor.hpp"

#include <cmath>
#include <numbers>

namespace biofuse {

namespace {

double normalize_theta(double theta) {
    const double pi = std::numbers::pi;
    double t = std::fmod(theta, pi);
    if (t < 0) t += pi;
    if (t >= pi) t = 0.0;  // fmod rounding can land exactly on pi
    return t;
}

// Mirror an out-of-range index back into [0, n). Repeats the edge pixel
// (-1 -> 0, n -> n-1), applied iteratively for deep overhangs.
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// One output sample of the convolution out(x,y) = sum K(i,j) img(x-i, y-j).
// Shared by the full-map path and the sampled extraction path so the two are
// numerically identical.
double convolve_at(const GrayImage& img, const Matrix& kernel, int x, int y) {
    const int r = kernel.rows() / 2;
    double sum = 0.0;
    for (int j = -r; j <= r; ++j) {
        const int sy = reflect(y - j, img.height);
        const double* krow = kernel.row(j + r);
        const std::uint16_t* irow = img.pixels.data() + static_cast<std::size_t>(sy) * img.width;
        if (x - r >= 0 && x + r < img.width) {
            // Interior: contiguous row, no index mirroring.
            for (int i = -r; i <= r; ++i) sum += krow[i + r] * irow[x - i];
        } else {
            for (int i = -r; i <= r; ++i) sum += krow[i + r] * irow[reflect(x - i, img.width)];
        }
    }
    return sum;
}

void check_kernel(const GrayImage& img, const Matrix& kernel) {
    if (kernel.rows() != kernel.cols() || kernel.rows() % 2 == 0 || kernel.rows() < 1)
        throw ConfigError("convolution kernel must be an odd-sided square");
    const int limit = 2 * std::min(img.width, img.height) + 1;
    if (kernel.rows() > limit)
        throw ConfigError("kernel side " + std::to_string(kernel.rows()) +
                          " exceeds 2*min(W,H)+1 = " + std::to_string(limit));
}

} // namespace

GaborParams GaborParams::create(double lambda, double theta, double phi, double sigma,
                                double gamma) {
    if (!(lambda > 0) || !(sigma > 0) || !(gamma > 0))
        throw ConfigError("gabor parameters lambda, sigma, gamma must be strictly positive");
    return GaborParams{lambda, normalize_theta(theta), phi, sigma, gamma};
}

Matrix gabor_kernel(const GaborParams& p, int radius) {
    if (radius < 1) throw ConfigError("gabor kernel radius must be at least 1");
    const int side = 2 * radius + 1;
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const double inv_two_sigma2 = 1.0 / (2.0 * p.sigma * p.sigma);
    const double gamma2 = p.gamma * p.gamma;
    const double freq = 2.0 * std::numbers::pi / p.lambda;

    Matrix k(side, side);
    for (int y = -radius; y <= radius; ++y) {
        for (int x = -radius; x <= radius; ++x) {
            const double xp = x * c + y * s;
            const double yp = -x * s + y * c;
            const double envelope = std::exp(-(xp * xp + gamma2 * yp * yp) * inv_two_sigma2);
            k(y + radius, x + radius) = envelope * std::cos(freq * xp + p.phi);
        }
    }
    return k;
}

FilterBank build_bank(const BankSpec& spec) {
    if (spec.scales < 1 || spec.orientations < 1)
        throw ConfigError("filter bank needs at least one scale and one orientation");
    if (!(spec.lambda0 > 0) || !(spec.lambda_ratio > 0) || !(spec.sigma_over_lambda > 0) ||
        !(spec.gamma > 0))
        throw ConfigError("filter bank parameters must be strictly positive");
    if (spec.kernel_radius_cap < 1) throw ConfigError("kernel radius cap must be at least 1");

    FilterBank bank;
    bank.scales = spec.scales;
    bank.orientations = spec.orientations;
    double sigma_max = 0.0;
    for (int s = 0; s < spec.scales; ++s) {
        const double lambda = spec.lambda0 * std::pow(spec.lambda_ratio, s);
        const double sigma = spec.sigma_over_lambda * lambda;
        sigma_max = std::max(sigma_max, sigma);
        for (int o = 0; o < spec.orientations; ++o) {
            const double theta = o * std::numbers::pi / spec.orientations;
            bank.filters.push_back(GaborParams::create(lambda, theta, 0.0, sigma, spec.gamma));
        }
    }
    bank.kernel_radius =
        std::min(spec.kernel_radius_cap, static_cast<int>(std::ceil(3.0 * sigma_max)));
    bank.kernel_radius = std::max(bank.kernel_radius, 1);
    return bank;
}

FilterBank build_bank(int scales, int orientations, double lambda0, double lambda_ratio,
                      double sigma_over_lambda, double gamma, int kernel_radius_cap) {
    BankSpec spec;
    spec.scales = scales;
    spec.orientations = orientations;
    spec.lambda0 = lambda0;
    spec.lambda_ratio = lambda_ratio;
    spec.sigma_over_lambda = sigma_over_lambda;
    spec.gamma = gamma;
    spec.kernel_radius_cap = kernel_radius_cap;
    return build_bank(spec);
}

Matrix convolve(const GrayImage& img, const Matrix& kernel) {
    check_kernel(img, kernel);
    Matrix out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out(y, x) = convolve_at(img, kernel, x, y);
    return out;
}

ResponseMap magnitude_response(const GrayImage& img, const GaborParams& p, int radius) {
    GaborParams even = p;
    even.phi = 0.0;
    GaborParams odd = p;
    odd.phi = std::numbers::pi / 2.0;
    const Matrix ke = gabor_kernel(even, radius);
    const Matrix ko = gabor_kernel(odd, radius);
    check_kernel(img, ke);

    ResponseMap r;
    r.width = img.width;
    r.height = img.height;
    r.values.resize(img.pixel_count());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double e = convolve_at(img, ke, x, y);
            const double o = convolve_at(img, ko, x, y);
            r.values[static_cast<std::size_t>(y) * img.width + x] = std::sqrt(e * e + o * o);
        }
    }
    return r;
}

namespace {

int downsample_stride(int factor) {
    if (factor < 1) throw ConfigError("downsample factor must be at least 1");
    const int stride = static_cast<int>(std::lround(std::sqrt(static_cast<double>(factor))));
    if (stride * stride != factor)
        throw ConfigError("downsample factor " + std::to_string(factor) +
                          " is not a perfect square");
    return stride;
}

int retained(int extent, int stride) { return (extent + stride - 1) / stride; }

} // namespace

ResponseMap downsample(const ResponseMap& r, int factor) {
    const int stride = downsample_stride(factor);
    if (stride > std::min(r.width, r.height))
        throw ConfigError("downsample stride " + std::to_string(stride) +
                          " exceeds the response extent");
    ResponseMap out;
    out.width = retained(r.width, stride);
    out.height = retained(r.height, stride);
    out.values.reserve(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < r.height; y += stride)
        for (int x = 0; x < r.width; x += stride) out.values.push_back(r.at(x, y));
    return out;
}

int feature_dim(int width, int height, int filter_count, int factor) {
    const int stride = downsample_stride(factor);
    return filter_count * retained(width, stride) * retained(height, stride);
}

FeatureVector extract_features(const GrayImage& img, const FilterBank& bank, int factor,
                               Modality modality) {
    const int stride = downsample_stride(factor);
    if (stride > std::min(img.width, img.height))
        throw ConfigError("downsample stride " + std::to_string(stride) +
                          " exceeds the image extent");
    const int cols = retained(img.width, stride);
    const int rows = retained(img.height, stride);
    const std::size_t per_filter = static_cast<std::size_t>(cols) * rows;

    FeatureVector out;
    out.modality = modality;
    out.values.reserve(bank.filters.size() * per_filter);

    std::vector<double> mags(per_filter);
    for (const GaborParams& p : bank.filters) {
        GaborParams even = p;
        even.phi = 0.0;
        GaborParams odd = p;
        odd.phi = std::numbers::pi / 2.0;
        const Matrix ke = gabor_kernel(even, bank.kernel_radius);
        const Matrix ko = gabor_kernel(odd, bank.kernel_radius);
        check_kernel(img, ke);

        // Convolution evaluated only at the retained grid; identical
        // arithmetic to convolve + downsample over the full map.
        std::size_t idx = 0;
        for (int y = 0; y < img.height; y += stride) {
            for (int x = 0; x < img.width; x += stride) {
                const double e = convolve_at(img, ke, x, y);
                const double o = convolve_at(img, ko, x, y);
                mags[idx++] = std::sqrt(e * e + o * o);
            }
        }

        // z-score each response over its own samples, variance floored.
        // Moments are taken about the first sample so a constant response
        // comes out as exact zeros, not amplified accumulation noise.
        const double shift = mags[0];
        double mean = 0.0;
        for (double m : mags) mean += m - shift;
        mean /= static_cast<double>(per_filter);
        double var = 0.0;
        for (double m : mags) {
            const double d = (m - shift) - mean;
            var += d * d;
        }
        var /= static_cast<double>(per_filter);
        const double scale = 1.0 / std::sqrt(std::max(var, 1e-8));
        for (double m : mags) out.values.push_back(((m - shift) - mean) * scale);
    }
    return out;
}

} // namespace biofuse
