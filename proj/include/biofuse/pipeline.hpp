// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "biofuse/config.hpp"
#include "biofuse/dataset.hpp"
#include "biofuse/enhance.hpp"
#include "biofuse/fusion.hpp"
#include "biofuse/pca.hpp"

namespace biofuse {

/// Reduction and whitening models for one modality.
struct ModalityModels {
    std::optional<PcaModel> pca;       // gabor / pixels extractors
    std::optional<W2dpcaModel> w2dpca; // w2dpca extractor
    WhiteningStats whitening;
};

/// Everything needed to turn an image (or an image pair) into a matchable
/// vector: the extraction config plus per-modality fitted models.
struct FittedPipeline {
    PipelineConfig config;
    std::optional<ModalityModels> face;
    std::optional<ModalityModels> fingerprint;

    bool bimodal() const { return face.has_value() && fingerprint.has_value(); }
};

/// Resample to the working resolution, then equalize.
GrayImage preprocess(const GrayImage& img, const PipelineConfig& cfg);

/// Intensities scaled to [0,1] as an H x W matrix (the w2dpca/pixels domain).
Matrix image_unit_matrix(const GrayImage& img);

/// Extractor-stage feature of a preprocessed image (before reduction).
/// For the w2dpca extractor this is only meaningful through reduced_vector.
FeatureVector raw_features(const GrayImage& preprocessed, const FilterBank& bank,
                           const PipelineConfig& cfg, Modality modality);

/// preprocess -> extract -> reduce. The unimodal matching representation.
FeatureVector reduced_vector(const FittedPipeline& p, const GrayImage& img, Modality modality);

/// whiten -> tanh, the fusion-ready form of a reduced vector.
FeatureVector normalized_vector(const FittedPipeline& p, const FeatureVector& reduced);

/// Fused template from an image pair (both modalities must be fitted).
FeatureVector fused_vector(const FittedPipeline& p, const GrayImage& face_img,
                           const GrayImage& fingerprint_img);

/// The operational transform behind enroll/identify/verify: fused when the
/// pipeline is bimodal, the reduced unimodal vector otherwise.
FeatureVector operational_template(const FittedPipeline& p,
                                   const std::optional<GrayImage>& face_img,
                                   const std::optional<GrayImage>& fingerprint_img);

/// Per-subject training images, already preprocessed, aligned with subjects.
struct TrainingSet {
    std::vector<std::string> subject_ids;
    std::vector<std::vector<GrayImage>> face_images;        // empty if modality absent
    std::vector<std::vector<GrayImage>> fingerprint_images; // empty if modality absent
};

/// Fits PCA (matched component count across modalities) or weighted-2DPCA,
/// plus whitening stats, from training images. cfg.threads parallelizes the
/// extraction stage without changing any output.
FittedPipeline fit_pipeline(const TrainingSet& train, const PipelineConfig& cfg);

/// One modality on its own: reduction model plus whitening from preprocessed
/// training images. When reduced_out is given it receives the reduced training
/// vectors in input order (the same ones whitening was fitted on).
ModalityModels fit_modality_models(const std::vector<GrayImage>& images,
                                   const PipelineConfig& cfg, Modality modality,
                                   std::vector<FeatureVector>* reduced_out = nullptr);

/// Truncates both PCA models (and their whitening stats) to the smaller
/// component count so fusion can average componentwise. No-op unless the
/// pipeline is bimodal with PCA reduction.
void match_component_counts(FittedPipeline& p);

/// Model bundle persistence: the model files plus models.json carrying the
/// full config and a digest per file.
void save_pipeline(const FittedPipeline& p, const std::filesystem::path& dir);
FittedPipeline load_pipeline(const std::filesystem::path& dir);

} // namespace biofuse
