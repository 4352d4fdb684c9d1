// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biofuse/features.hpp"
#include "biofuse/fusion.hpp"

namespace biofuse {

enum class Metric { euclidean, mahalanobis };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

struct MatchResult {
    std::string subject;
    double distance = 0.0;
    std::size_t template_index = 0;  // enrollment order, used for tie-breaks
};

struct VerifyResult {
    bool accepted = false;
    double score = 0.0;
};

/// Enrolled templates, all of one dimension and modality. Subjects may repeat.
/// The mahalanobis metric scales each component by the attached stats' sigma.
class TemplateStore {
public:
    explicit TemplateStore(Metric metric = Metric::euclidean,
                           std::optional<WhiteningStats> stats = std::nullopt);

    void enroll(std::string subject, FeatureVector v);

    /// Distance to every template, ascending; exact ties keep enrollment order.
    std::vector<MatchResult> identify(const FeatureVector& probe) const;

    /// Majority vote over the k nearest templates; vote ties go to the subject
    /// with the nearest distance.
    std::string classify(const FeatureVector& probe, int k = 1) const;

    /// score = min distance to the claimed subject's templates;
    /// accept iff score <= threshold.
    VerifyResult verify(const std::string& claimed, const FeatureVector& probe,
                        double threshold) const;

    double distance(const FeatureVector& a, const FeatureVector& b) const;

    std::size_t size() const { return subjects_.size(); }
    bool empty() const { return subjects_.empty(); }
    int dim() const { return dim_; }
    Modality modality() const { return modality_; }
    Metric metric() const { return metric_; }
    const std::optional<WhiteningStats>& stats() const { return stats_; }
    const std::string& subject(std::size_t i) const { return subjects_[i]; }
    const FeatureVector& vector(std::size_t i) const { return vectors_[i]; }

private:
    Metric metric_;
    std::optional<WhiteningStats> stats_;
    std::vector<std::string> subjects_;
    std::vector<FeatureVector> vectors_;
    int dim_ = -1;                       // fixed by the first enrollment
    Modality modality_ = Modality::face;
};

} // namespace biofuse
