// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "biofuse/features.hpp"
#include "biofuse/image.hpp"
#include "biofuse/matrix.hpp"

namespace biofuse {

/// One Gabor filter: a Gaussian envelope modulating an oriented sinusoid.
/// theta is normalized into [0, pi) on construction.
struct GaborParams {
    double lambda = 4.0;  // wavelength, pixels
    double theta = 0.0;   // orientation, radians
    double phi = 0.0;     // phase offset, radians
    double sigma = 2.0;   // envelope std-dev, pixels
    double gamma = 1.0;   // spatial aspect ratio

    static GaborParams create(double lambda, double theta, double phi, double sigma, double gamma);
};

/// Grid parameters for building a scales-by-orientations bank.
struct BankSpec {
    int scales = 5;
    int orientations = 8;
    double lambda0 = 4.0;
    double lambda_ratio = 1.4142135623730951;  // sqrt(2)
    double sigma_over_lambda = 0.56;
    double gamma = 0.5;
    int kernel_radius_cap = 15;
};

/// Ordered scale-major list of filters; all share one sampled kernel radius.
struct FilterBank {
    std::vector<GaborParams> filters;
    int kernel_radius = 0;
    int scales = 0;
    int orientations = 0;
};

/// Per-pixel nonnegative magnitudes; same footprint as the filtered image
/// until downsampling.
struct ResponseMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Samples the kernel on [-radius, radius]^2. Entry for offset (x, y):
///   exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * cos(2 pi x' / lambda + phi)
/// with x' = x cos(theta) + y sin(theta), y' = -x sin(theta) + y cos(theta).
/// Row index maps to y + radius, column index to x + radius.
Matrix gabor_kernel(const GaborParams& p, int radius);

FilterBank build_bank(const BankSpec& spec);
FilterBank build_bank(int scales, int orientations, double lambda0, double lambda_ratio,
                      double sigma_over_lambda, double gamma, int kernel_radius_cap = 15);

/// Full 2D convolution with reflective border handling; output size equals
/// input size. The kernel must be odd-sided square and no larger than
/// 2*min(W,H)+1.
Matrix convolve(const GrayImage& img, const Matrix& kernel);

/// Quadrature magnitude sqrt(even^2 + odd^2) from the phi=0 / phi=pi/2 kernel
/// pair; p.phi is ignored here.
ResponseMap magnitude_response(const GrayImage& img, const GaborParams& p, int radius);

/// Keeps samples at rows/cols {0, stride, 2*stride, ...} with
/// stride = sqrt(factor); factor must be a perfect square.
ResponseMap downsample(const ResponseMap& r, int factor);

/// Concatenation, in bank order, of each filter's downsampled magnitude
/// response, each response z-scored over its own samples (variance floor
/// 1e-8; a constant response z-scores to exact zeros). Responses are
/// evaluated only at the retained sample grid, which matches convolve +
/// downsample output exactly.
FeatureVector extract_features(const GrayImage& img, const FilterBank& bank, int factor,
                               Modality modality);

/// Feature dimension produced by extract_features for this geometry.
int feature_dim(int width, int height, int filter_count, int factor);

} // namespace biofuse
