// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "biofuse/features.hpp"

namespace biofuse {

/// Per-component mean and std-dev of one modality's reduced training vectors.
/// In PCA coordinates the covariance is diagonal, so these two vectors fully
/// parameterize the Mahalanobis transform.
struct WhiteningStats {
    Modality modality = Modality::face;
    std::vector<double> mu;
    std::vector<double> sigma;  // floored, never below the fitting floor

    int dim() const { return static_cast<int>(mu.size()); }
};

/// Fits componentwise mean and std-dev (divisor n-1) over n >= 2 samples of
/// one modality; std-devs are floored at sigma_floor.
WhiteningStats fit_whitening(const std::vector<FeatureVector>& samples, double sigma_floor = 1e-8);

/// Componentwise (v - mu) / sigma.
FeatureVector whiten(const FeatureVector& v, const WhiteningStats& stats);

/// Componentwise (tanh(c*x) + 1) / 2, nudged into the open interval (0,1)
/// where tanh saturates to exactly +-1.
FeatureVector tanh_normalize(const FeatureVector& v, double c = 0.01);

/// Average sum rule over two already whitened-and-normalized vectors of equal
/// dimension; the result keeps that dimension and is tagged fused.
FeatureVector fuse(const FeatureVector& face, const FeatureVector& fingerprint);

/// Euclidean norm of whiten(v, stats).
double mahalanobis_distance(const FeatureVector& v, const WhiteningStats& stats);

/// Enrolled fused descriptor; every component strictly inside (0,1).
struct FusedTemplate {
    std::string subject;
    FeatureVector vector;
};

FusedTemplate make_fused_template(std::string subject, FeatureVector vector);

} // namespace biofuse
