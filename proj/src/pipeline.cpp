// SPDX-License-Identifier: Apache-2.0
#include "biofuse/pipeline.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "biofuse/gabor.hpp"
#include "biofuse/parallel.hpp"
#include "biofuse/serialize.hpp"

namespace biofuse {

namespace {

using ordered_json = nlohmann::ordered_json;

FeatureVector pixel_features(const GrayImage& img, Modality modality) {
    FeatureVector v;
    v.modality = modality;
    v.values.reserve(img.pixel_count());
    const double scale = 1.0 / img.max_value();
    for (std::uint16_t p : img.pixels) v.values.push_back(p * scale);
    return v;
}

const ModalityModels& models_for(const FittedPipeline& p, Modality modality) {
    const std::optional<ModalityModels>* models = nullptr;
    switch (modality) {
        case Modality::face: models = &p.face; break;
        case Modality::fingerprint: models = &p.fingerprint; break;
        case Modality::fused:
            throw ConfigError("the fused modality has no per-modality models");
    }
    if (!models->has_value())
        throw ConfigError("pipeline has no fitted models for modality " + to_string(modality));
    return **models;
}

/// All training images of one modality flattened, remembering per-subject
/// extents so labels line up afterwards.
struct FlatImages {
    std::vector<const GrayImage*> images;
    std::vector<std::string> labels;
};

FlatImages flatten(const std::vector<std::string>& ids,
                   const std::vector<std::vector<GrayImage>>& per_subject, Modality modality) {
    if (per_subject.size() != ids.size())
        throw DataError("training set: " + to_string(modality) + " image rows (" +
                        std::to_string(per_subject.size()) + ") do not match subject count (" +
                        std::to_string(ids.size()) + ")");
    FlatImages flat;
    for (std::size_t s = 0; s < ids.size(); ++s) {
        if (per_subject[s].empty())
            throw DataError("training set: subject " + ids[s] + " has no " +
                            to_string(modality) + " images");
        for (const GrayImage& img : per_subject[s]) {
            flat.images.push_back(&img);
            flat.labels.push_back(ids[s]);
        }
    }
    return flat;
}

std::vector<FeatureVector> extract_all(const std::vector<const GrayImage*>& images,
                                       const PipelineConfig& cfg, Modality modality) {
    std::vector<FeatureVector> out(images.size());
    if (cfg.extractor == Extractor::gabor) {
        const FilterBank bank = build_bank(cfg.bank);
        parallel_for(images.size(), cfg.threads, [&](std::size_t i) {
            out[i] = extract_features(*images[i], bank, cfg.downsample_factor, modality);
        });
    } else {
        parallel_for(images.size(), cfg.threads, [&](std::size_t i) {
            out[i] = pixel_features(*images[i], modality);
        });
    }
    return out;
}

ModalityModels fit_modality(const std::vector<const GrayImage*>& images,
                            const PipelineConfig& cfg, Modality modality,
                            std::vector<FeatureVector>* reduced_out) {
    ModalityModels models;
    std::vector<FeatureVector> reduced(images.size());
    if (cfg.extractor == Extractor::w2dpca) {
        std::vector<Matrix> mats;
        mats.reserve(images.size());
        for (const GrayImage* img : images) mats.push_back(image_unit_matrix(*img));
        const std::vector<double> weights(mats.size(), 1.0);
        models.w2dpca = fit_w2dpca(mats, weights, cfg.w2dpca_components);
        for (std::size_t i = 0; i < mats.size(); ++i)
            reduced[i] = project_w2dpca(*models.w2dpca, mats[i], modality);
    } else {
        const std::vector<FeatureVector> features = extract_all(images, cfg, modality);
        models.pca = fit_pca(features, PcaTarget{cfg.pca_components, cfg.pca_variance_fraction});
        for (std::size_t i = 0; i < features.size(); ++i)
            reduced[i] = project(*models.pca, features[i]);
    }
    models.whitening = fit_whitening(reduced, cfg.sigma_floor);
    if (reduced_out) *reduced_out = std::move(reduced);
    return models;
}

// Projection coordinates are componentwise, so dropping trailing PCA
// components just drops the matching whitening entries.
void truncate_modality(ModalityModels& models, int k) {
    models.pca = truncate(*models.pca, k);
    models.whitening.mu.resize(k);
    models.whitening.sigma.resize(k);
}

std::string file_digest(const std::vector<std::uint8_t>& bytes) {
    return fnv1a_hex(bytes.data(), bytes.size());
}

} // namespace

Matrix image_unit_matrix(const GrayImage& img) {
    Matrix m(img.height, img.width);
    const double scale = 1.0 / img.max_value();
    for (int y = 0; y < img.height; ++y) {
        double* row = m.row(y);
        for (int x = 0; x < img.width; ++x) row[x] = img.at(x, y) * scale;
    }
    return m;
}

GrayImage preprocess(const GrayImage& img, const PipelineConfig& cfg) {
    if (img.width == cfg.image_width && img.height == cfg.image_height) return equalize(img);
    return equalize(resample(img, cfg.image_width, cfg.image_height));
}

FeatureVector raw_features(const GrayImage& preprocessed, const FilterBank& bank,
                           const PipelineConfig& cfg, Modality modality) {
    if (cfg.extractor == Extractor::gabor)
        return extract_features(preprocessed, bank, cfg.downsample_factor, modality);
    return pixel_features(preprocessed, modality);
}

FeatureVector reduced_vector(const FittedPipeline& p, const GrayImage& img, Modality modality) {
    const ModalityModels& models = models_for(p, modality);
    const GrayImage pre = preprocess(img, p.config);
    if (p.config.extractor == Extractor::w2dpca)
        return project_w2dpca(*models.w2dpca, image_unit_matrix(pre), modality);
    const FilterBank bank = build_bank(p.config.bank);
    return project(*models.pca, raw_features(pre, bank, p.config, modality));
}

FeatureVector normalized_vector(const FittedPipeline& p, const FeatureVector& reduced) {
    const ModalityModels& models = models_for(p, reduced.modality);
    return tanh_normalize(whiten(reduced, models.whitening), p.config.tanh_c);
}

FeatureVector fused_vector(const FittedPipeline& p, const GrayImage& face_img,
                           const GrayImage& fingerprint_img) {
    if (!p.bimodal()) throw ConfigError("fusion requires both modalities to be fitted");
    const FeatureVector face =
        normalized_vector(p, reduced_vector(p, face_img, Modality::face));
    const FeatureVector fingerprint =
        normalized_vector(p, reduced_vector(p, fingerprint_img, Modality::fingerprint));
    return fuse(face, fingerprint);
}

FeatureVector operational_template(const FittedPipeline& p,
                                   const std::optional<GrayImage>& face_img,
                                   const std::optional<GrayImage>& fingerprint_img) {
    if (p.bimodal()) {
        if (!face_img || !fingerprint_img)
            throw ConfigError("bimodal pipeline needs both a face and a fingerprint image");
        return fused_vector(p, *face_img, *fingerprint_img);
    }
    if (p.face) {
        if (!face_img) throw ConfigError("face pipeline needs a face image");
        if (fingerprint_img)
            throw ConfigError("pipeline has no fingerprint models for the given image");
        return reduced_vector(p, *face_img, Modality::face);
    }
    if (p.fingerprint) {
        if (!fingerprint_img) throw ConfigError("fingerprint pipeline needs a fingerprint image");
        if (face_img) throw ConfigError("pipeline has no face models for the given image");
        return reduced_vector(p, *fingerprint_img, Modality::fingerprint);
    }
    throw ConfigError("pipeline has no fitted models");
}

FittedPipeline fit_pipeline(const TrainingSet& train, const PipelineConfig& cfg) {
    if (train.subject_ids.empty()) throw DataError("training set has no subjects");
    const bool has_face = !train.face_images.empty();
    const bool has_fingerprint = !train.fingerprint_images.empty();
    if (!has_face && !has_fingerprint)
        throw DataError("training set has no images for either modality");

    FittedPipeline p;
    p.config = cfg;

    if (has_face)
        p.face = fit_modality(flatten(train.subject_ids, train.face_images, Modality::face).images,
                              cfg, Modality::face, nullptr);
    if (has_fingerprint)
        p.fingerprint = fit_modality(
            flatten(train.subject_ids, train.fingerprint_images, Modality::fingerprint).images,
            cfg, Modality::fingerprint, nullptr);

    match_component_counts(p);
    return p;
}

ModalityModels fit_modality_models(const std::vector<GrayImage>& images,
                                   const PipelineConfig& cfg, Modality modality,
                                   std::vector<FeatureVector>* reduced_out) {
    if (images.size() < 2)
        throw DataError("fitting " + to_string(modality) + " models needs at least 2 images");
    std::vector<const GrayImage*> ptrs;
    ptrs.reserve(images.size());
    for (const GrayImage& img : images) ptrs.push_back(&img);
    return fit_modality(ptrs, cfg, modality, reduced_out);
}

// Fusion averages the two normalized vectors componentwise, so both modalities
// must agree on k; the wider model loses its trailing components.
void match_component_counts(FittedPipeline& p) {
    if (!p.bimodal() || p.config.extractor == Extractor::w2dpca) return;
    const int k = std::min(p.face->pca->components(), p.fingerprint->pca->components());
    if (p.face->pca->components() != k) truncate_modality(*p.face, k);
    if (p.fingerprint->pca->components() != k) truncate_modality(*p.fingerprint, k);
}

void save_pipeline(const FittedPipeline& p, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    ordered_json files = ordered_json::object();

    const auto emit = [&](const std::string& name, const std::vector<std::uint8_t>& bytes) {
        write_file(dir / name, bytes);
        files[name] = file_digest(bytes);
    };
    const auto emit_modality = [&](const ModalityModels& m, const std::string& prefix) {
        if (m.pca) emit(prefix + "_pca.bfpc", serialize_pca(*m.pca));
        if (m.w2dpca) emit(prefix + "_w2dpca.bf2d", serialize_w2dpca(*m.w2dpca));
        emit(prefix + "_whitening.bfws", serialize_whitening(m.whitening));
    };
    if (p.face) emit_modality(*p.face, "face");
    if (p.fingerprint) emit_modality(*p.fingerprint, "fingerprint");

    ordered_json manifest;
    ordered_json config = ordered_json::object();
    for (const auto& [key, value] : config_to_map(p.config)) config[key] = value;
    manifest["config"] = std::move(config);
    manifest["config_digest"] = config_digest(p.config);
    manifest["files"] = std::move(files);
    write_file(dir / "models.json", manifest.dump(2) + "\n");
}

FittedPipeline load_pipeline(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "models.json";
    const std::vector<std::uint8_t> manifest_bytes = read_file(manifest_path);
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(manifest_bytes.begin(), manifest_bytes.end());
    } catch (const std::exception& e) {
        throw DataError(manifest_path.string() + ": " + e.what());
    }
    if (!manifest.is_object() || !manifest.contains("config") || !manifest.contains("files"))
        throw DataError(manifest_path.string() + ": missing config or files section");

    FittedPipeline p;
    for (const auto& [key, value] : manifest["config"].items())
        config_set(p.config, key, value.get<std::string>());

    std::map<std::string, std::vector<std::uint8_t>> payloads;
    for (const auto& [name, digest] : manifest["files"].items()) {
        std::vector<std::uint8_t> bytes = read_file(dir / name);
        if (file_digest(bytes) != digest.get<std::string>())
            throw DataError(dir.string() + "/" + name + ": digest mismatch with models.json");
        payloads[name] = std::move(bytes);
    }

    const auto load_modality = [&](const std::string& prefix) -> std::optional<ModalityModels> {
        const auto whitening = payloads.find(prefix + "_whitening.bfws");
        if (whitening == payloads.end()) return std::nullopt;
        ModalityModels m;
        m.whitening = deserialize_whitening(whitening->second);
        if (const auto it = payloads.find(prefix + "_pca.bfpc"); it != payloads.end())
            m.pca = deserialize_pca(it->second);
        if (const auto it = payloads.find(prefix + "_w2dpca.bf2d"); it != payloads.end())
            m.w2dpca = deserialize_w2dpca(it->second);
        if (!m.pca && !m.w2dpca)
            throw DataError(dir.string() + ": " + prefix + " has whitening stats but no model");
        return m;
    };
    p.face = load_modality("face");
    p.fingerprint = load_modality("fingerprint");
    if (!p.face && !p.fingerprint)
        throw DataError(dir.string() + ": models.json lists no modality models");
    return p;
}

} // namespace biofuse
