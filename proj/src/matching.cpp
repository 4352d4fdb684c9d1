// SPDX-License-Identifier: Apache-2.0
#include "biofuse/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace biofuse {

std::string to_string(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "mahalanobis";
}

Metric metric_from_string(const std::string& s) {
    if (s == "euclidean") return Metric::euclidean;
    if (s == "mahalanobis") return Metric::mahalanobis;
    throw ConfigError("unknown metric \"" + s + "\" (expected euclidean or mahalanobis)");
}

TemplateStore::TemplateStore(Metric metric, std::optional<WhiteningStats> stats)
    : metric_(metric), stats_(std::move(stats)) {
    if (metric_ == Metric::mahalanobis && !stats_)
        throw ConfigError("mahalanobis metric requires whitening stats");
}

void TemplateStore::enroll(std::string subject, FeatureVector v) {
    require_finite(v, "enroll");
    if (dim_ < 0) {
        dim_ = v.dim();
        modality_ = v.modality;
        if (stats_ && stats_->dim() != dim_)
            throw DataError("whitening stats dim does not match template dim");
    } else {
        if (v.dim() != dim_)
            throw DataError("enroll: vector dim " + std::to_string(v.dim()) +
                            " does not match store dim " + std::to_string(dim_));
        if (v.modality != modality_)
            throw DataError("enroll: modality does not match the store");
    }
    subjects_.push_back(std::move(subject));
    vectors_.push_back(std::move(v));
}

double TemplateStore::distance(const FeatureVector& a, const FeatureVector& b) const {
    double sum = 0.0;
    if (metric_ == Metric::euclidean) {
        for (int j = 0; j < a.dim(); ++j) {
            const double d = a.values[j] - b.values[j];
            sum += d * d;
        }
    } else {
        for (int j = 0; j < a.dim(); ++j) {
            const double d = (a.values[j] - b.values[j]) / stats_->sigma[j];
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

std::vector<MatchResult> TemplateStore::identify(const FeatureVector& probe) const {
    if (empty()) throw DataError("identify: template store is empty");
    if (probe.dim() != dim_)
        throw DataError("identify: probe dim " + std::to_string(probe.dim()) +
                        " does not match store dim " + std::to_string(dim_));

    std::vector<MatchResult> results;
    results.reserve(size());
    for (std::size_t i = 0; i < size(); ++i)
        results.push_back({subjects_[i], distance(probe, vectors_[i]), i});
    std::sort(results.begin(), results.end(), [](const MatchResult& a, const MatchResult& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.template_index < b.template_index;  // ties keep enrollment order
    });
    return results;
}

std::string TemplateStore::classify(const FeatureVector& probe, int k) const {
    if (k < 1) throw ConfigError("classify: k must be at least 1");
    const auto ranked = identify(probe);
    const std::size_t take = std::min<std::size_t>(k, ranked.size());
    if (take == 1) return ranked[0].subject;

    struct Vote {
        int count = 0;
        double best = std::numeric_limits<double>::infinity();
        std::size_t first = 0;
    };
    std::map<std::string, Vote> votes;
    for (std::size_t i = 0; i < take; ++i) {
        auto [it, fresh] = votes.try_emplace(ranked[i].subject);
        ++it->second.count;
        if (fresh) {
            it->second.best = ranked[i].distance;
            it->second.first = i;
        }
    }
    const Vote* winner = nullptr;
    const std::string* winner_id = nullptr;
    for (const auto& [id, vote] : votes) {
        if (!winner || vote.count > winner->count ||
            (vote.count == winner->count &&
             (vote.best < winner->best ||
              (vote.best == winner->best && vote.first < winner->first)))) {
            winner = &vote;
            winner_id = &id;
        }
    }
    return *winner_id;
}

VerifyResult TemplateStore::verify(const std::string& claimed, const FeatureVector& probe,
                                   double threshold) const {
    if (probe.dim() != dim_ && dim_ >= 0)
        throw DataError("verify: probe dim does not match store dim");
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (subjects_[i] != claimed) continue;
        found = true;
        best = std::min(best, distance(probe, vectors_[i]));
    }
    if (!found) throw DataError("verify: unknown subject \"" + claimed + "\"");
    return VerifyResult{best <= threshold, best};
}

} // namespace biofuse
