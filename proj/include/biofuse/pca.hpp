// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "biofuse/features.hpp"
#include "biofuse/matrix.hpp"

namespace biofuse {

/// Learned PCA statistics: sample mean plus an orthonormal eigenbasis of the
/// sample covariance (divisor n-1), eigenvalues descending.
struct PcaModel {
    std::vector<double> mean;        // dim d
    Matrix basis;                    // d x k, eigenvectors as columns
    std::vector<double> eigenvalues; // k, descending, clamped at 0
    double total_variance = 0.0;     // trace of the covariance

    int dim() const { return static_cast<int>(mean.size()); }
    int components() const { return basis.cols(); }
};

/// Either an explicit component count (components > 0 wins) or the smallest k
/// whose cumulative eigenvalue fraction reaches variance_fraction.
struct PcaTarget {
    int components = 0;
    double variance_fraction = 0.95;
};

/// Fits on n >= 2 equal-dimension samples. Uses the n x n Gram matrix when
/// n < d (snapshot method), the direct d x d covariance otherwise; both routes
/// agree on eigenvalues and spans. Rank-0 covariance (all samples identical)
/// is an error.
PcaModel fit_pca(const std::vector<FeatureVector>& samples, PcaTarget target);

/// basis^T * (v - mean); the modality tag is preserved.
FeatureVector project(const PcaModel& model, const FeatureVector& v);

/// Keeps the leading k components.
PcaModel truncate(const PcaModel& model, int k);

/// Reconstruction mean + basis * coords, for diagnostics and tests.
FeatureVector reconstruct(const PcaModel& model, const FeatureVector& coords);

/// Weighted 2D PCA over image matrices: weighted mean image, then the top
/// eigenvectors of the weighted column-scatter matrix
///   G = sum_i w_i (A_i - mean)^T (A_i - mean) / sum_i w_i.
struct W2dpcaModel {
    Matrix mean_image;               // H x W
    Matrix basis;                    // W x k
    std::vector<double> eigenvalues; // k, descending

    int image_height() const { return mean_image.rows(); }
    int image_width() const { return mean_image.cols(); }
    int components() const { return basis.cols(); }
};

W2dpcaModel fit_w2dpca(const std::vector<Matrix>& images, const std::vector<double>& weights,
                       int k);

/// (img - mean) * basis flattened row-major into a vector of dim H*k.
FeatureVector project_w2dpca(const W2dpcaModel& model, const Matrix& img,
                             Modality modality = Modality::face);

} // namespace biofuse
