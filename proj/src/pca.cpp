// SPDX-License-Identifier: Apache-2.0
#include "biofuse/pca.hpp"

#include <algorithm>
#include <cmath>

#include "biofuse/jacobi.hpp"

namespace biofuse {

namespace {

// Relative cutoff separating genuine covariance rank from rotation noise.
constexpr double kRankTolerance = 1e-12;

void fix_column_signs(Matrix& basis) {
    for (int c = 0; c < basis.cols(); ++c) {
        int arg = 0;
        double best = 0.0;
        for (int r = 0; r < basis.rows(); ++r) {
            const double mag = std::abs(basis(r, c));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        if (basis(arg, c) < 0)
            for (int r = 0; r < basis.rows(); ++r) basis(r, c) = -basis(r, c);
    }
}

} // namespace

PcaModel fit_pca(const std::vector<FeatureVector>& samples, PcaTarget target) {
    const int n = static_cast<int>(samples.size());
    if (n < 2) throw DataError("fit_pca needs at least 2 samples");
    const int d = samples[0].dim();
    for (const auto& s : samples) {
        if (s.dim() != d) throw DataError("fit_pca samples must share one dimension");
        require_finite(s, "fit_pca");
    }
    if (target.components == 0 &&
        !(target.variance_fraction > 0.0 && target.variance_fraction <= 1.0))
        throw ConfigError("pca variance fraction must lie in (0, 1]");

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (const auto& s : samples)
        for (int j = 0; j < d; ++j) model.mean[j] += s.values[j];
    for (int j = 0; j < d; ++j) model.mean[j] /= n;

    Matrix centered(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) centered(i, j) = samples[i].values[j] - model.mean[j];

    std::vector<double> eigenvalues;
    Matrix basis;

    if (n < d) {
        // Snapshot method: eigendecompose the n x n Gram matrix, then map its
        // eigenvectors u back to covariance eigenvectors X^T u / sqrt((n-1) l).
        Matrix gram(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double dot = 0.0;
                const double* ri = centered.row(i);
                const double* rj = centered.row(j);
                for (int k = 0; k < d; ++k) dot += ri[k] * rj[k];
                gram(i, j) = dot / (n - 1);
                gram(j, i) = gram(i, j);
            }
        }
        for (int i = 0; i < n; ++i) model.total_variance += gram(i, i);

        SymmetricEigen eig = jacobi_eigen(gram);
        const double lmax = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
        if (lmax <= 0.0) throw DataError("fit_pca: covariance has rank 0 (all samples identical)");

        for (int k = 0; k < n; ++k) {
            const double l = eig.values[k];
            if (l <= lmax * kRankTolerance) break;
            eigenvalues.push_back(l);
        }
        const int rank = static_cast<int>(eigenvalues.size());
        basis = Matrix(d, rank);
        for (int k = 0; k < rank; ++k) {
            const double inv_norm = 1.0 / std::sqrt((n - 1) * eigenvalues[k]);
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) acc += centered(i, j) * eig.vectors(i, k);
                basis(j, k) = acc * inv_norm;
            }
            // Renormalize against accumulated rounding.
            double norm = 0.0;
            for (int j = 0; j < d; ++j) norm += basis(j, k) * basis(j, k);
            norm = std::sqrt(norm);
            if (norm > 0)
                for (int j = 0; j < d; ++j) basis(j, k) /= norm;
        }
    } else {
        Matrix cov(d, d);
        for (int i = 0; i < n; ++i) {
            const double* r = centered.row(i);
            for (int a = 0; a < d; ++a) {
                if (r[a] == 0.0) continue;
                for (int b = a; b < d; ++b) cov(a, b) += r[a] * r[b];
            }
        }
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                cov(a, b) /= (n - 1);
                cov(b, a) = cov(a, b);
            }
        for (int a = 0; a < d; ++a) model.total_variance += cov(a, a);

        SymmetricEigen eig = jacobi_eigen(cov);
        const double lmax = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
        if (lmax <= 0.0) throw DataError("fit_pca: covariance has rank 0 (all samples identical)");

        for (int k = 0; k < d; ++k) {
            const double l = eig.values[k];
            if (l <= lmax * kRankTolerance) break;
            eigenvalues.push_back(l);
        }
        const int rank = static_cast<int>(eigenvalues.size());
        basis = Matrix(d, rank);
        for (int k = 0; k < rank; ++k)
            for (int j = 0; j < d; ++j) basis(j, k) = eig.vectors(j, k);
    }

    for (double& l : eigenvalues) l = std::max(l, 0.0);
    fix_column_signs(basis);

    const int rank = static_cast<int>(eigenvalues.size());
    int k = rank;
    if (target.components > 0) {
        if (target.components > rank)
            throw DataError("requested " + std::to_string(target.components) +
                            " components but the covariance rank is " + std::to_string(rank));
        k = target.components;
    } else if (target.variance_fraction < 1.0) {
        double cum = 0.0;
        k = rank;
        for (int i = 0; i < rank; ++i) {
            cum += eigenvalues[i];
            if (cum >= target.variance_fraction * model.total_variance) {
                k = i + 1;
                break;
            }
        }
    }

    model.eigenvalues.assign(eigenvalues.begin(), eigenvalues.begin() + k);
    model.basis = Matrix(d, k);
    for (int c = 0; c < k; ++c)
        for (int j = 0; j < d; ++j) model.basis(j, c) = basis(j, c);
    return model;
}

FeatureVector project(const PcaModel& model, const FeatureVector& v) {
    if (v.dim() != model.dim())
        throw DataError("project: vector dim " + std::to_string(v.dim()) +
                        " does not match model dim " + std::to_string(model.dim()));
    const int d = model.dim();
    const int k = model.components();
    FeatureVector out;
    out.modality = v.modality;
    out.values.resize(k, 0.0);
    std::vector<double> centered(d);
    for (int j = 0; j < d; ++j) centered[j] = v.values[j] - model.mean[j];
    for (int j = 0; j < d; ++j) {
        const double cj = centered[j];
        if (cj == 0.0) continue;
        for (int c = 0; c < k; ++c) out.values[c] += model.basis(j, c) * cj;
    }
    return out;
}

PcaModel truncate(const PcaModel& model, int k) {
    if (k < 1 || k > model.components())
        throw ConfigError("truncate: k must lie in [1, " + std::to_string(model.components()) +
                          "]");
    PcaModel out;
    out.mean = model.mean;
    out.total_variance = model.total_variance;
    out.eigenvalues.assign(model.eigenvalues.begin(), model.eigenvalues.begin() + k);
    out.basis = Matrix(model.dim(), k);
    for (int c = 0; c < k; ++c)
        for (int j = 0; j < model.dim(); ++j) out.basis(j, c) = model.basis(j, c);
    return out;
}

FeatureVector reconstruct(const PcaModel& model, const FeatureVector& coords) {
    if (coords.dim() != model.components())
        throw DataError("reconstruct: coordinate dim does not match model components");
    FeatureVector out;
    out.modality = coords.modality;
    out.values = model.mean;
    for (int c = 0; c < model.components(); ++c) {
        const double w = coords.values[c];
        if (w == 0.0) continue;
        for (int j = 0; j < model.dim(); ++j) out.values[j] += model.basis(j, c) * w;
    }
    return out;
}

W2dpcaModel fit_w2dpca(const std::vector<Matrix>& images, const std::vector<double>& weights,
                       int k) {
    if (images.empty()) throw DataError("fit_w2dpca needs at least one image");
    if (weights.size() != images.size())
        throw DataError("fit_w2dpca: one weight per image required");
    const int h = images[0].rows();
    const int w = images[0].cols();
    for (const auto& img : images)
        if (img.rows() != h || img.cols() != w)
            throw DataError("fit_w2dpca images must share one size");
    double weight_sum = 0.0;
    for (double wi : weights) {
        if (wi < 0) throw DataError("fit_w2dpca weights must be nonnegative");
        weight_sum += wi;
    }
    if (weight_sum == 0.0) throw DataError("fit_w2dpca: weights sum to zero");
    if (k < 1 || k > w)
        throw ConfigError("fit_w2dpca: component count must lie in [1, image width]");

    W2dpcaModel model;
    model.mean_image = Matrix(h, w);
    for (std::size_t i = 0; i < images.size(); ++i)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) model.mean_image(r, c) += weights[i] * images[i](r, c);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) model.mean_image(r, c) /= weight_sum;

    // Weighted column scatter G = sum_i w_i D_i^T D_i / sum_i w_i.
    Matrix g(w, w);
    Matrix centered(h, w);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (weights[i] == 0.0) continue;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) centered(r, c) = images[i](r, c) - model.mean_image(r, c);
        for (int a = 0; a < w; ++a)
            for (int b = a; b < w; ++b) {
                double dot = 0.0;
                for (int r = 0; r < h; ++r) dot += centered(r, a) * centered(r, b);
                g(a, b) += weights[i] * dot;
            }
    }
    for (int a = 0; a < w; ++a)
        for (int b = a; b < w; ++b) {
            g(a, b) /= weight_sum;
            g(b, a) = g(a, b);
        }

    SymmetricEigen eig = jacobi_eigen(g);
    model.eigenvalues.assign(eig.values.begin(), eig.values.begin() + k);
    for (double& l : model.eigenvalues) l = std::max(l, 0.0);
    model.basis = Matrix(w, k);
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < w; ++r) model.basis(r, c) = eig.vectors(r, c);
    return model;
}

FeatureVector project_w2dpca(const W2dpcaModel& model, const Matrix& img, Modality modality) {
    if (img.rows() != model.image_height() || img.cols() != model.image_width())
        throw DataError("project_w2dpca: image size does not match the model");
    const int h = img.rows();
    const int w = img.cols();
    const int k = model.components();

    FeatureVector out;
    out.modality = modality;
    out.values.resize(static_cast<std::size_t>(h) * k, 0.0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < k; ++c) {
            double acc = 0.0;
            for (int j = 0; j < w; ++j) acc += (img(r, j) - model.mean_image(r, j)) * model.basis(j, c);
            out.values[static_cast<std::size_t>(r) * k + c] = acc;
        }
    return out;
}

} // namespace biofuse
