// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biofuse/config.hpp"
#include "biofuse/dataset.hpp"

namespace biofuse {

struct RocPoint {
    double threshold = 0.0;
    double far = 0.0;  // nondecreasing in threshold
    double frr = 0.0;  // nonincreasing in threshold
};

/// Recognition and verification rates for one evaluation run.
/// rank1_rate is the fused rate when both modalities ran, otherwise the
/// single modality's rate.
struct EvalReport {
    std::string config_digest;
    double rank1_rate = 0.0;
    std::optional<double> rank1_face;
    std::optional<double> rank1_fingerprint;
    std::optional<double> rank1_fused;
    double eer = 0.0;
    std::vector<RocPoint> roc;
    std::vector<std::string> excluded_subjects;
    std::uint64_t enrolled_templates = 0;
    std::uint64_t probes = 0;
};

/// Runs the configured pipeline end to end on train/test splits: preprocess,
/// extract, reduce, whiten/normalize, fuse when both manifests are given, then
/// match every test probe and sweep verification thresholds. Deterministic for
/// a fixed config regardless of cfg.threads.
EvalReport evaluate(const std::optional<DatasetManifest>& face,
                    const std::optional<DatasetManifest>& fingerprint,
                    const PipelineConfig& cfg);

/// Genuine/impostor score sweep shared by evaluate and the property tests.
/// Thresholds are the sorted unique scores; FAR counts impostors <= t, FRR
/// counts genuines > t. eer is the linear-interpolated crossing.
std::vector<RocPoint> roc_sweep(std::vector<double> genuine, std::vector<double> impostor);
double equal_error_rate(const std::vector<RocPoint>& roc);

std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(const std::string& text);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Shortest decimal form that parses back to the same double ("0.9735", not
/// locale- or precision-mangled).
std::string format_double(double value);

} // namespace biofuse
