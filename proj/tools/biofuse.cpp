// SPDX-License-Identifier: Apache-2.0
//
// biofuse command line: equalize, gabor-dump, ingest, train, enroll,
// identify, verify, evaluate. Configuration comes from one key-value file,
// BIOFUSE_OPT_* environment variables, and --set flags, in rising precedence.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biofuse/config.hpp"
#include "biofuse/dataset.hpp"
#include "biofuse/enhance.hpp"
#include "biofuse/evaluate.hpp"
#include "biofuse/gabor.hpp"
#include "biofuse/image.hpp"
#include "biofuse/parallel.hpp"
#include "biofuse/pipeline.hpp"
#include "biofuse/serialize.hpp"

namespace {

using biofuse::PipelineConfig;
using json = nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    int threads = 0;  // 0 = not given
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key = value config file");
    cmd->add_option("--set", args.sets, "override one config key (key=value), repeatable");
    cmd->add_option("--threads", args.threads, "worker thread cap (results never depend on it)");
    cmd->footer(biofuse::config_help_text());
}

PipelineConfig resolve_config(const CommonArgs& args) {
    PipelineConfig cfg;
    if (!args.config_path.empty()) cfg = biofuse::load_config_file(args.config_path, cfg);
    biofuse::apply_env_overrides(cfg);
    for (const std::string& kv : args.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw biofuse::ConfigError("--set expects key=value, got \"" + kv + "\"");
        biofuse::config_set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.threads > 0) cfg.threads = args.threads;
    return cfg;
}

std::optional<biofuse::GrayImage> load_optional(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return biofuse::load_pgm(path);
}

// Enrollment must keep appending to an existing store with whatever metric it
// was created with; a fresh store takes its metric from the pipeline mode.
biofuse::TemplateStore open_or_create_store(const biofuse::FittedPipeline& p,
                                            const PipelineConfig& cfg) {
    if (std::filesystem::exists(cfg.store_path)) return biofuse::load_store(cfg.store_path);
    if (p.bimodal()) return biofuse::TemplateStore(biofuse::Metric::euclidean);
    const biofuse::ModalityModels& models = p.face ? *p.face : *p.fingerprint;
    if (cfg.metric == biofuse::Metric::mahalanobis)
        return biofuse::TemplateStore(cfg.metric, models.whitening);
    return biofuse::TemplateStore(cfg.metric);
}

int cmd_equalize(const std::string& in_path, const std::string& out_path) {
    const std::vector<std::uint8_t> bytes = biofuse::read_file(in_path);
    const biofuse::GrayImage img = biofuse::decode_pgm(bytes);
    const biofuse::GrayImage eq = biofuse::equalize(img);
    if (eq.pixels == img.pixels) {
        biofuse::write_file(out_path, bytes);  // degenerate case: verbatim copy
        return 0;
    }
    biofuse::write_pgm(eq, out_path, biofuse::detect_pgm_format(in_path));
    return 0;
}

int cmd_gabor_dump(const std::string& in_path, const std::string& out_dir,
                   const PipelineConfig& cfg) {
    const biofuse::GrayImage img = biofuse::load_pgm(in_path);
    const biofuse::FilterBank bank = biofuse::build_bank(cfg.bank);
    std::filesystem::create_directories(out_dir);
    for (int s = 0; s < bank.scales; ++s) {
        for (int o = 0; o < bank.orientations; ++o) {
            const biofuse::GaborParams& p = bank.filters[s * bank.orientations + o];
            const biofuse::ResponseMap r =
                biofuse::magnitude_response(img, p, bank.kernel_radius);
            double peak = 0.0;
            for (double v : r.values) peak = std::max(peak, v);
            std::vector<std::uint16_t> pixels(r.values.size(), 0);
            if (peak > 0.0)
                for (std::size_t i = 0; i < r.values.size(); ++i)
                    pixels[i] = static_cast<std::uint16_t>(std::llround(r.values[i] / peak * 255.0));
            const auto out = biofuse::GrayImage::create(r.width, r.height, 256, std::move(pixels));
            const std::string name = "s" + std::to_string(s) + "_o" + std::to_string(o) + ".pgm";
            biofuse::write_pgm(out, std::filesystem::path(out_dir) / name);
        }
    }
    std::cout << json{{"filters", bank.filters.size()}, {"out_dir", out_dir}}.dump() << "\n";
    return 0;
}

int cmd_ingest(const std::string& root, const std::string& layout, const std::string& modality,
               const std::string& out_path) {
    const biofuse::DatasetManifest manifest = biofuse::ingest(
        root, biofuse::layout_from_string(layout), biofuse::modality_from_string(modality));
    const std::string text = biofuse::manifest_to_json(manifest);
    if (out_path.empty())
        std::cout << text;
    else
        biofuse::write_file(out_path, text);
    return 0;
}

// Unlike evaluate (which excludes and reports), training on an explicit
// train_count fails hard when a subject cannot fill it.
std::vector<biofuse::GrayImage> training_images(const biofuse::DatasetManifest& manifest,
                                                const PipelineConfig& cfg) {
    std::vector<std::string> short_subjects;
    std::vector<const std::string*> paths;
    for (const biofuse::SubjectEntry& subject : manifest.subjects) {
        const int n = static_cast<int>(subject.samples.size());
        const int tc = cfg.train_count > 0 ? cfg.train_count : (n + 1) / 2;
        if (n < tc) {
            short_subjects.push_back(subject.id);
            continue;
        }
        for (int j = 0; j < tc; ++j) paths.push_back(&subject.samples[j]);
    }
    if (!short_subjects.empty()) {
        std::string list;
        for (const std::string& id : short_subjects) list += (list.empty() ? "" : ", ") + id;
        throw biofuse::DataError("subjects with fewer than split.train_count samples: " + list);
    }
    std::vector<biofuse::GrayImage> images(paths.size());
    biofuse::parallel_for(paths.size(), cfg.threads, [&](std::size_t i) {
        images[i] = biofuse::preprocess(biofuse::load_pgm(*paths[i]), cfg);
    });
    return images;
}

int cmd_train(const PipelineConfig& cfg) {
    biofuse::FittedPipeline p;
    p.config = cfg;
    json summary;
    if (!cfg.face_root.empty()) {
        const auto manifest = biofuse::ingest(cfg.face_root, cfg.face_layout,
                                              biofuse::Modality::face);
        const auto images = training_images(manifest, cfg);
        p.face = biofuse::fit_modality_models(images, cfg, biofuse::Modality::face);
        summary["face_training_images"] = images.size();
    }
    if (!cfg.fingerprint_root.empty()) {
        const auto manifest = biofuse::ingest(cfg.fingerprint_root, cfg.fingerprint_layout,
                                              biofuse::Modality::fingerprint);
        const auto images = training_images(manifest, cfg);
        p.fingerprint = biofuse::fit_modality_models(images, cfg, biofuse::Modality::fingerprint);
        summary["fingerprint_training_images"] = images.size();
    }
    if (!p.face && !p.fingerprint)
        throw biofuse::ConfigError(
            "train needs dataset.face_root and/or dataset.fingerprint_root");
    biofuse::match_component_counts(p);
    biofuse::save_pipeline(p, cfg.models_dir);
    if (p.face)
        summary["face_components"] = p.face->pca ? p.face->pca->components()
                                                 : p.face->w2dpca->components();
    if (p.fingerprint)
        summary["fingerprint_components"] = p.fingerprint->pca
                                                ? p.fingerprint->pca->components()
                                                : p.fingerprint->w2dpca->components();
    summary["models_dir"] = cfg.models_dir;
    summary["config_digest"] = biofuse::config_digest(cfg);
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_enroll(const PipelineConfig& cfg, const std::string& subject,
               const std::string& face_path, const std::string& fingerprint_path) {
    const biofuse::FittedPipeline p = biofuse::load_pipeline(cfg.models_dir);
    const biofuse::FeatureVector v = biofuse::operational_template(
        p, load_optional(face_path), load_optional(fingerprint_path));
    biofuse::TemplateStore store = open_or_create_store(p, cfg);
    store.enroll(subject, v);
    biofuse::save_store(store, cfg.store_path);
    std::cout << json{{"subject", subject}, {"templates", store.size()}}.dump() << "\n";
    return 0;
}

int cmd_identify(const PipelineConfig& cfg, const std::string& face_path,
                 const std::string& fingerprint_path, int top) {
    const biofuse::FittedPipeline p = biofuse::load_pipeline(cfg.models_dir);
    const biofuse::TemplateStore store = biofuse::load_store(cfg.store_path);
    const biofuse::FeatureVector probe = biofuse::operational_template(
        p, load_optional(face_path), load_optional(fingerprint_path));
    const std::vector<biofuse::MatchResult> ranked = store.identify(probe);
    json matches = json::array();
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(top); ++i)
        matches.push_back({{"subject", ranked[i].subject}, {"distance", ranked[i].distance}});
    std::cout << json{{"subject", store.classify(probe, cfg.knn)}, {"matches", matches}}.dump()
              << "\n";
    return 0;
}

int cmd_verify(const PipelineConfig& cfg, const std::string& subject, double threshold,
               const std::string& face_path, const std::string& fingerprint_path) {
    const biofuse::FittedPipeline p = biofuse::load_pipeline(cfg.models_dir);
    const biofuse::TemplateStore store = biofuse::load_store(cfg.store_path);
    const biofuse::FeatureVector probe = biofuse::operational_template(
        p, load_optional(face_path), load_optional(fingerprint_path));
    const biofuse::VerifyResult result = store.verify(subject, probe, threshold);
    std::cout << json{{"accepted", result.accepted}, {"score", result.score}}.dump() << "\n";
    return 0;
}

int cmd_evaluate(const PipelineConfig& cfg) {
    std::optional<biofuse::DatasetManifest> face, fingerprint;
    if (!cfg.face_root.empty())
        face = biofuse::ingest(cfg.face_root, cfg.face_layout, biofuse::Modality::face);
    if (!cfg.fingerprint_root.empty())
        fingerprint = biofuse::ingest(cfg.fingerprint_root, cfg.fingerprint_layout,
                                      biofuse::Modality::fingerprint);
    const biofuse::EvalReport report = biofuse::evaluate(face, fingerprint, cfg);
    biofuse::write_file(cfg.report_csv, biofuse::report_to_csv(report));
    biofuse::write_file(cfg.report_json, biofuse::report_to_json(report));
    json summary{{"rank1_rate", report.rank1_rate},
                 {"eer", report.eer},
                 {"probes", report.probes},
                 {"report_csv", cfg.report_csv},
                 {"report_json", cfg.report_json}};
    if (report.rank1_face) summary["rank1_face"] = *report.rank1_face;
    if (report.rank1_fingerprint) summary["rank1_fingerprint"] = *report.rank1_fingerprint;
    if (report.rank1_fused) summary["rank1_fused"] = *report.rank1_fused;
    std::cout << summary.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bimodal biometric feature extraction, fusion and matching"};
    app.require_subcommand(1);
    app.footer(biofuse::config_help_text());

    CommonArgs common;

    std::string in_path, out_path, out_dir, root;
    std::string layout = "orl", modality = "face";
    std::string subject, face_path, fingerprint_path;
    double threshold = 0.0;
    int top = 5;

    CLI::App* equalize = app.add_subcommand("equalize", "histogram-equalize one PGM image");
    equalize->add_option("input", in_path, "input PGM")->required();
    equalize->add_option("output", out_path, "output PGM")->required();
    add_common(equalize, common);

    CLI::App* gabor_dump =
        app.add_subcommand("gabor-dump", "write each filter's magnitude response as a PGM");
    gabor_dump->add_option("input", in_path, "input PGM")->required();
    gabor_dump->add_option("out_dir", out_dir, "output directory (created)")->required();
    add_common(gabor_dump, common);

    CLI::App* ingest = app.add_subcommand("ingest", "scan a dataset directory into manifest JSON");
    ingest->add_option("root", root, "dataset root directory")->required();
    ingest->add_option("--layout", layout, "orl or flat");
    ingest->add_option("--modality", modality, "face or fingerprint");
    ingest->add_option("--out", out_path, "manifest path (default stdout)");
    add_common(ingest, common);

    CLI::App* train = app.add_subcommand("train", "fit reduction and whitening models");
    add_common(train, common);

    CLI::App* enroll = app.add_subcommand("enroll", "add one template to the store");
    enroll->add_option("--subject", subject, "subject id")->required();
    enroll->add_option("--face", face_path, "face PGM");
    enroll->add_option("--fingerprint", fingerprint_path, "fingerprint PGM");
    add_common(enroll, common);

    CLI::App* identify = app.add_subcommand("identify", "rank enrolled subjects for a probe");
    identify->add_option("--face", face_path, "face PGM");
    identify->add_option("--fingerprint", fingerprint_path, "fingerprint PGM");
    identify->add_option("--top", top, "ranked matches to print");
    add_common(identify, common);

    CLI::App* verify = app.add_subcommand("verify", "check a probe against a claimed subject");
    verify->add_option("--subject", subject, "claimed subject id")->required();
    verify->add_option("--threshold", threshold, "acceptance distance threshold")->required();
    verify->add_option("--face", face_path, "face PGM");
    verify->add_option("--fingerprint", fingerprint_path, "fingerprint PGM");
    add_common(verify, common);

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "run the full train/test evaluation and write reports");
    add_common(evaluate, common);

    try {
        app.parse(argc, argv);

        if (equalize->parsed()) return cmd_equalize(in_path, out_path);
        if (gabor_dump->parsed()) return cmd_gabor_dump(in_path, out_dir, resolve_config(common));
        if (ingest->parsed()) return cmd_ingest(root, layout, modality, out_path);
        if (train->parsed()) return cmd_train(resolve_config(common));
        if (enroll->parsed())
            return cmd_enroll(resolve_config(common), subject, face_path, fingerprint_path);
        if (identify->parsed())
            return cmd_identify(resolve_config(common), face_path, fingerprint_path, top);
        if (verify->parsed())
            return cmd_verify(resolve_config(common), subject, threshold, face_path,
                              fingerprint_path);
        if (evaluate->parsed()) return cmd_evaluate(resolve_config(common));
        return 2;  // unreachable: require_subcommand
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const biofuse::Error& e) {
        std::cerr << json{{"error", e.category()}, {"message", e.what()}}.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}
