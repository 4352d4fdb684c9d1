// SPDX-License-Identifier: Apache-2.0
#include "biofuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace biofuse {

WhiteningStats fit_whitening(const std::vector<FeatureVector>& samples, double sigma_floor) {
    const int n = static_cast<int>(samples.size());
    if (n < 2) throw DataError("fit_whitening needs at least 2 samples");
    if (!(sigma_floor > 0)) throw ConfigError("sigma floor must be strictly positive");
    const int d = samples[0].dim();
    const Modality modality = samples[0].modality;
    for (const auto& s : samples) {
        if (s.dim() != d) throw DataError("fit_whitening samples must share one dimension");
        if (s.modality != modality)
            throw DataError("fit_whitening samples must share one modality");
        require_finite(s, "fit_whitening");
    }

    WhiteningStats stats;
    stats.modality = modality;
    stats.mu.assign(d, 0.0);
    for (const auto& s : samples)
        for (int j = 0; j < d; ++j) stats.mu[j] += s.values[j];
    for (double& m : stats.mu) m /= n;

    stats.sigma.assign(d, 0.0);
    for (const auto& s : samples)
        for (int j = 0; j < d; ++j) {
            const double dlt = s.values[j] - stats.mu[j];
            stats.sigma[j] += dlt * dlt;
        }
    for (double& s : stats.sigma) s = std::max(std::sqrt(s / (n - 1)), sigma_floor);
    return stats;
}

FeatureVector whiten(const FeatureVector& v, const WhiteningStats& stats) {
    if (v.dim() != stats.dim())
        throw DataError("whiten: vector dim " + std::to_string(v.dim()) +
                        " does not match stats dim " + std::to_string(stats.dim()));
    FeatureVector out;
    out.modality = v.modality;
    out.values.resize(v.values.size());
    for (int j = 0; j < v.dim(); ++j) out.values[j] = (v.values[j] - stats.mu[j]) / stats.sigma[j];
    return out;
}

FeatureVector tanh_normalize(const FeatureVector& v, double c) {
    // tanh saturates to exactly +-1 in floating point around |c*x| ~ 19;
    // nudge those back inside the open interval.
    const double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    FeatureVector out;
    out.modality = v.modality;
    out.values.resize(v.values.size());
    for (std::size_t j = 0; j < v.values.size(); ++j) {
        double y = 0.5 * (std::tanh(c * v.values[j]) + 1.0);
        out.values[j] = std::clamp(y, lo, hi);
    }
    return out;
}

FeatureVector fuse(const FeatureVector& face, const FeatureVector& fingerprint) {
    if (face.dim() != fingerprint.dim())
        throw DataError("fuse: dimensions differ (" + std::to_string(face.dim()) + " vs " +
                        std::to_string(fingerprint.dim()) + ")");
    FeatureVector out;
    out.modality = Modality::fused;
    out.values.resize(face.values.size());
    for (std::size_t j = 0; j < out.values.size(); ++j)
        out.values[j] = 0.5 * (face.values[j] + fingerprint.values[j]);
    return out;
}

double mahalanobis_distance(const FeatureVector& v, const WhiteningStats& stats) {
    const FeatureVector w = whiten(v, stats);
    double sum = 0.0;
    for (double x : w.values) sum += x * x;
    return std::sqrt(sum);
}

FusedTemplate make_fused_template(std::string subject, FeatureVector vector) {
    if (vector.modality != Modality::fused)
        throw DataError("fused template requires a fused-modality vector");
    for (double x : vector.values)
        if (!(x > 0.0 && x < 1.0))
            throw DataError("fused template components must lie strictly inside (0, 1)");
    return FusedTemplate{std::move(subject), std::move(vector)};
}

} // namespace biofuse
