// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "biofuse/dataset.hpp"
#include "biofuse/gabor.hpp"
#include "biofuse/matching.hpp"

namespace biofuse {

enum class Extractor { gabor, pixels, w2dpca };
enum class PairingMode { modulo, shuffled };

std::string to_string(Extractor e);
Extractor extractor_from_string(const std::string& s);
std::string to_string(PairingMode m);
PairingMode pairing_mode_from_string(const std::string& s);

/// Every tunable of the pipeline, one flat dotted key each. Defaults are the
/// member initializers; unknown keys are a hard error wherever config text is
/// parsed.
struct PipelineConfig {
    std::string face_root;                          // dataset.face_root
    DatasetLayout face_layout = DatasetLayout::orl; // dataset.face_layout
    std::string fingerprint_root;                   // dataset.fingerprint_root
    DatasetLayout fingerprint_layout = DatasetLayout::orl;

    int image_width = 92;   // image.width   (working resolution, pixels)
    int image_height = 112; // image.height

    BankSpec bank;          // bank.*

    int downsample_factor = 64;            // downsample.factor
    Extractor extractor = Extractor::gabor; // pipeline.extractor

    int pca_components = 0;              // pca.components (0 = use fraction)
    double pca_variance_fraction = 0.95; // pca.variance_fraction
    int w2dpca_components = 8;           // w2dpca.components

    double tanh_c = 0.01;     // fusion.tanh_c
    double sigma_floor = 1e-8; // fusion.sigma_floor

    int train_count = 0;  // split.train_count (0 = ceil(samples/2) per subject)

    PairingMode pairing_mode = PairingMode::modulo; // pairing.mode
    std::uint64_t pairing_seed = 0;                  // pairing.seed

    Metric metric = Metric::euclidean; // metric
    int knn = 1;                       // match.knn
    int threads = 1;                   // threads

    std::string models_dir = "models";       // output.models_dir
    std::string store_path = "store.bfts";   // output.store
    std::string report_csv = "report.csv";   // output.report_csv
    std::string report_json = "report.json"; // output.report_json
};

/// All keys with their current values, canonically formatted, sorted by key.
std::map<std::string, std::string> config_to_map(const PipelineConfig& cfg);

/// Sets one dotted key. Unknown key or unparsable value -> ConfigError.
void config_set(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// key = value lines, # comments, blank lines ignored.
PipelineConfig parse_config_text(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});

/// Applies BIOFUSE_OPT_* environment overrides (dots become underscores,
/// uppercased: pca.components -> BIOFUSE_OPT_PCA_COMPONENTS). An unmapped
/// BIOFUSE_OPT_ variable is a ConfigError; other BIOFUSE_* names are left to
/// the surrounding tooling.
void apply_env_overrides(PipelineConfig& cfg);

/// FNV-1a 64 over the canonical key-sorted "key=value" dump, hex encoded.
std::string config_digest(const PipelineConfig& cfg);

/// One "key  default  description" line per key, for --help output.
std::string config_help_text();

/// FNV-1a 64 of arbitrary bytes, hex encoded (also used for model manifests).
std::string fnv1a_hex(const void* data, std::size_t size);

} // namespace biofuse
