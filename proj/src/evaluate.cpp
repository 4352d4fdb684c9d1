// SPDX-License-Identifier: Apache-2.0
#include "biofuse/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biofuse/gabor.hpp"
#include "biofuse/parallel.hpp"
#include "biofuse/pipeline.hpp"

namespace biofuse {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Kept subjects of one manifest with their split, preprocessed images and
/// reduced vectors. Indices run over kept subjects only.
struct ModalityData {
    Modality modality = Modality::face;
    std::vector<std::string> ids;
    std::vector<std::vector<GrayImage>> train, test;
    std::vector<std::vector<FeatureVector>> train_red, test_red;
    std::vector<std::string> excluded;

    std::size_t train_total() const {
        std::size_t n = 0;
        for (const auto& t : train) n += t.size();
        return n;
    }
};

ModalityData prepare(const DatasetManifest& manifest, const PipelineConfig& cfg) {
    ModalityData d;
    d.modality = manifest.modality;

    struct Item {
        const std::string* path;
        GrayImage* slot;
    };
    std::vector<Item> items;
    for (const SubjectEntry& subject : manifest.subjects) {
        const int n = static_cast<int>(subject.samples.size());
        const int tc = cfg.train_count > 0 ? cfg.train_count : (n + 1) / 2;
        if (n < tc + 1) {  // the split needs tc training images plus a probe
            d.excluded.push_back(subject.id);
            continue;
        }
        d.ids.push_back(subject.id);
        d.train.emplace_back(tc);
        d.test.emplace_back(n - tc);
    }

    std::size_t kept = 0;
    for (const SubjectEntry& subject : manifest.subjects) {
        const int n = static_cast<int>(subject.samples.size());
        const int tc = cfg.train_count > 0 ? cfg.train_count : (n + 1) / 2;
        if (n < tc + 1) continue;
        for (int j = 0; j < n; ++j) {
            GrayImage* slot = j < tc ? &d.train[kept][j] : &d.test[kept][j - tc];
            items.push_back({&subject.samples[j], slot});
        }
        ++kept;
    }

    parallel_for(items.size(), cfg.threads, [&](std::size_t i) {
        *items[i].slot = preprocess(load_pgm(*items[i].path), cfg);
    });
    return d;
}

const ModalityModels& models_of(const FittedPipeline& p, Modality m) {
    return m == Modality::face ? *p.face : *p.fingerprint;
}

FeatureVector reduce_preprocessed(const FittedPipeline& p, const FilterBank& bank,
                                  const GrayImage& pre, Modality m) {
    const ModalityModels& models = models_of(p, m);
    if (p.config.extractor == Extractor::w2dpca)
        return project_w2dpca(*models.w2dpca, image_unit_matrix(pre), m);
    return project(*models.pca, raw_features(pre, bank, p.config, m));
}

/// Distributes a flat reduced-vector list (fit order) back onto the
/// per-subject train grid, trimming every vector to the final component count.
void unflatten_train(ModalityData& d, std::vector<FeatureVector> flat, int k) {
    d.train_red.resize(d.ids.size());
    std::size_t next = 0;
    for (std::size_t s = 0; s < d.ids.size(); ++s) {
        d.train_red[s].resize(d.train[s].size());
        for (auto& slot : d.train_red[s]) {
            slot = std::move(flat[next++]);
            slot.values.resize(k);
        }
    }
}

void reduce_tests(ModalityData& d, const FittedPipeline& p, const FilterBank& bank) {
    struct Item {
        const GrayImage* image;
        FeatureVector* slot;
    };
    std::vector<Item> items;
    d.test_red.resize(d.ids.size());
    for (std::size_t s = 0; s < d.ids.size(); ++s) {
        d.test_red[s].resize(d.test[s].size());
        for (std::size_t j = 0; j < d.test[s].size(); ++j)
            items.push_back({&d.test[s][j], &d.test_red[s][j]});
    }
    parallel_for(items.size(), p.config.threads, [&](std::size_t i) {
        *items[i].slot = reduce_preprocessed(p, bank, *items[i].image, d.modality);
    });
}

/// A matching problem: an enrolled store plus labeled probes.
struct MatchSet {
    TemplateStore store;
    std::vector<std::string> probe_subjects;
    std::vector<const FeatureVector*> probes;
};

double rank1_of(const MatchSet& set, const PipelineConfig& cfg) {
    if (set.probes.empty()) throw DataError("evaluation produced no probes");
    std::vector<char> correct(set.probes.size(), 0);
    parallel_for(set.probes.size(), cfg.threads, [&](std::size_t i) {
        correct[i] = set.store.classify(*set.probes[i], cfg.knn) == set.probe_subjects[i];
    });
    const auto hits = std::count(correct.begin(), correct.end(), char(1));
    return static_cast<double>(hits) / static_cast<double>(set.probes.size());
}

/// Verification scores: per probe, the min distance to every enrolled subject;
/// the true subject's score is genuine, the rest are impostor scores.
void verification_scores(const MatchSet& set, int threads, std::vector<double>& genuine,
                         std::vector<double>& impostor) {
    std::vector<std::string> order;
    for (std::size_t t = 0; t < set.store.size(); ++t)
        if (std::find(order.begin(), order.end(), set.store.subject(t)) == order.end())
            order.push_back(set.store.subject(t));

    const std::size_t n = set.probes.size();
    std::vector<double> genuine_slot(n);
    std::vector<std::vector<double>> impostor_slot(n);
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<double> best(order.size(), std::numeric_limits<double>::infinity());
        for (std::size_t t = 0; t < set.store.size(); ++t) {
            const double dist = set.store.distance(*set.probes[i], set.store.vector(t));
            for (std::size_t s = 0; s < order.size(); ++s)
                if (order[s] == set.store.subject(t)) {
                    best[s] = std::min(best[s], dist);
                    break;
                }
        }
        impostor_slot[i].reserve(order.size() - 1);
        for (std::size_t s = 0; s < order.size(); ++s) {
            if (order[s] == set.probe_subjects[i])
                genuine_slot[i] = best[s];
            else
                impostor_slot[i].push_back(best[s]);
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        genuine.push_back(genuine_slot[i]);
        impostor.insert(impostor.end(), impostor_slot[i].begin(), impostor_slot[i].end());
    }
}

/// Deterministic Fisher-Yates driven by raw mt19937_64 draws; std::shuffle's
/// output is implementation-defined, which would break cross-platform
/// reproducibility of shuffled pairings.
std::vector<std::size_t> pairing_order(std::size_t count, const PipelineConfig& cfg) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.pairing_mode == PairingMode::shuffled) {
        std::mt19937_64 rng(cfg.pairing_seed);
        for (std::size_t i = count; i > 1; --i)
            std::swap(order[i - 1], order[rng() % i]);
    }
    return order;
}

} // namespace

EvalReport evaluate(const std::optional<DatasetManifest>& face,
                    const std::optional<DatasetManifest>& fingerprint,
                    const PipelineConfig& cfg) {
    if (!face && !fingerprint)
        throw ConfigError("evaluate needs at least one dataset manifest");

    EvalReport report;
    report.config_digest = config_digest(cfg);

    std::optional<ModalityData> fd, pd;
    if (face) fd = prepare(*face, cfg);
    if (fingerprint) pd = prepare(*fingerprint, cfg);
    if (fd)
        for (const std::string& id : fd->excluded)
            report.excluded_subjects.push_back("face:" + id);
    if (pd)
        for (const std::string& id : pd->excluded)
            report.excluded_subjects.push_back("fingerprint:" + id);
    if (fd && fd->ids.empty()) throw DataError("no face subject satisfies the split");
    if (pd && pd->ids.empty()) throw DataError("no fingerprint subject satisfies the split");

    FittedPipeline p;
    p.config = cfg;
    std::vector<FeatureVector> face_flat, fp_flat;
    const auto flat_train = [](const ModalityData& d) {
        std::vector<GrayImage> flat;
        flat.reserve(d.train_total());
        for (const auto& images : d.train) flat.insert(flat.end(), images.begin(), images.end());
        return flat;
    };
    if (fd) p.face = fit_modality_models(flat_train(*fd), cfg, Modality::face, &face_flat);
    if (pd)
        p.fingerprint =
            fit_modality_models(flat_train(*pd), cfg, Modality::fingerprint, &fp_flat);
    match_component_counts(p);

    const FilterBank bank = build_bank(cfg.bank);
    if (fd) {
        unflatten_train(*fd, std::move(face_flat), p.face->whitening.dim());
        reduce_tests(*fd, p, bank);
    }
    if (pd) {
        unflatten_train(*pd, std::move(fp_flat), p.fingerprint->whitening.dim());
        reduce_tests(*pd, p, bank);
    }

    const auto unimodal_set = [&](const ModalityData& d) {
        const std::optional<WhiteningStats> stats =
            cfg.metric == Metric::mahalanobis
                ? std::optional<WhiteningStats>(models_of(p, d.modality).whitening)
                : std::nullopt;
        MatchSet set{TemplateStore(cfg.metric, stats), {}, {}};
        for (std::size_t s = 0; s < d.ids.size(); ++s)
            for (const FeatureVector& v : d.train_red[s]) set.store.enroll(d.ids[s], v);
        for (std::size_t s = 0; s < d.ids.size(); ++s)
            for (const FeatureVector& v : d.test_red[s]) {
                set.probe_subjects.push_back(d.ids[s]);
                set.probes.push_back(&v);
            }
        return set;
    };

    std::optional<MatchSet> primary;
    std::vector<FeatureVector> fused_probes;  // keeps fused probe storage alive
    if (fd && pd) {
        const std::vector<std::size_t> order = pairing_order(pd->ids.size(), cfg);
        MatchSet fused_set{TemplateStore(Metric::euclidean), {}, {}};

        const auto fuse_pair = [&](const FeatureVector& f, const FeatureVector& q) {
            return fuse(tanh_normalize(whiten(f, p.face->whitening), cfg.tanh_c),
                        tanh_normalize(whiten(q, p.fingerprint->whitening), cfg.tanh_c));
        };
        for (std::size_t i = 0; i < fd->ids.size(); ++i) {
            const std::size_t q = order[i % pd->ids.size()];
            const std::size_t enrolls = std::min(fd->train_red[i].size(), pd->train_red[q].size());
            for (std::size_t j = 0; j < enrolls; ++j)
                fused_set.store.enroll(fd->ids[i],
                                       fuse_pair(fd->train_red[i][j], pd->train_red[q][j]));
            const std::size_t probes = std::min(fd->test_red[i].size(), pd->test_red[q].size());
            for (std::size_t j = 0; j < probes; ++j) {
                fused_probes.push_back(fuse_pair(fd->test_red[i][j], pd->test_red[q][j]));
                fused_set.probe_subjects.push_back(fd->ids[i]);
            }
        }
        for (const FeatureVector& v : fused_probes) fused_set.probes.push_back(&v);

        report.rank1_face = rank1_of(unimodal_set(*fd), cfg);
        report.rank1_fingerprint = rank1_of(unimodal_set(*pd), cfg);
        report.rank1_fused = rank1_of(fused_set, cfg);
        report.rank1_rate = *report.rank1_fused;
        primary = std::move(fused_set);
    } else {
        MatchSet set = unimodal_set(fd ? *fd : *pd);
        report.rank1_rate = rank1_of(set, cfg);
        if (fd)
            report.rank1_face = report.rank1_rate;
        else
            report.rank1_fingerprint = report.rank1_rate;
        primary = std::move(set);
    }

    report.enrolled_templates = primary->store.size();
    report.probes = primary->probes.size();

    std::vector<double> genuine, impostor;
    verification_scores(*primary, cfg.threads, genuine, impostor);
    report.roc = roc_sweep(std::move(genuine), std::move(impostor));
    report.eer = equal_error_rate(report.roc);
    return report;
}

std::vector<RocPoint> roc_sweep(std::vector<double> genuine, std::vector<double> impostor) {
    for (double s : genuine)
        if (!std::isfinite(s)) throw DataError("roc_sweep: non-finite genuine score");
    for (double s : impostor)
        if (!std::isfinite(s)) throw DataError("roc_sweep: non-finite impostor score");

    std::vector<double> thresholds;
    thresholds.reserve(genuine.size() + impostor.size());
    thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
    thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::sort(genuine.begin(), genuine.end());
    std::sort(impostor.begin(), impostor.end());

    std::vector<RocPoint> roc;
    roc.reserve(thresholds.size());
    for (double t : thresholds) {
        RocPoint point;
        point.threshold = t;
        if (!impostor.empty()) {
            const auto le = std::upper_bound(impostor.begin(), impostor.end(), t);
            point.far = static_cast<double>(le - impostor.begin()) /
                        static_cast<double>(impostor.size());
        }
        if (!genuine.empty()) {
            const auto le = std::upper_bound(genuine.begin(), genuine.end(), t);
            point.frr = static_cast<double>(genuine.end() - le) /
                        static_cast<double>(genuine.size());
        }
        roc.push_back(point);
    }
    return roc;
}

double equal_error_rate(const std::vector<RocPoint>& roc) {
    if (roc.empty()) return 0.0;
    // far - frr is nondecreasing in the threshold; find where it crosses zero.
    if (roc.front().far >= roc.front().frr)
        return (roc.front().far + roc.front().frr) / 2.0;
    if (roc.back().far < roc.back().frr)
        return (roc.back().far + roc.back().frr) / 2.0;
    for (std::size_t i = 1; i < roc.size(); ++i) {
        const RocPoint& a = roc[i - 1];
        const RocPoint& b = roc[i];
        if (b.far < b.frr) continue;
        const double da = a.frr - a.far;  // > 0
        const double db = b.far - b.frr;  // >= 0
        if (da + db == 0.0) return a.far;
        const double s = da / (da + db);
        return a.far + s * (b.far - a.far);
    }
    return (roc.back().far + roc.back().frr) / 2.0;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw DataError("cannot format double");
    return std::string(buf, ptr);
}

namespace {

double parse_csv_double(const std::string& text, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DataError(std::string("report csv: bad ") + what + " value \"" + text + "\"");
    return v;
}

std::uint64_t parse_csv_u64(const std::string& text, const char* what) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DataError(std::string("report csv: bad ") + what + " value \"" + text + "\"");
    return v;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

std::string report_to_csv(const EvalReport& report) {
    std::string out = "key,value\n";
    out += "config_digest," + report.config_digest + "\n";
    out += "rank1_rate," + format_double(report.rank1_rate) + "\n";
    if (report.rank1_face) out += "rank1_face," + format_double(*report.rank1_face) + "\n";
    if (report.rank1_fingerprint)
        out += "rank1_fingerprint," + format_double(*report.rank1_fingerprint) + "\n";
    if (report.rank1_fused) out += "rank1_fused," + format_double(*report.rank1_fused) + "\n";
    out += "eer," + format_double(report.eer) + "\n";
    out += "enrolled_templates," + std::to_string(report.enrolled_templates) + "\n";
    out += "probes," + std::to_string(report.probes) + "\n";
    std::string excluded;
    for (const std::string& id : report.excluded_subjects) {
        if (!excluded.empty()) excluded += ';';
        excluded += id;
    }
    out += "excluded_subjects," + excluded + "\n";
    if (!report.roc.empty()) {
        out += "\nthreshold,far,frr\n";
        for (const RocPoint& point : report.roc)
            out += format_double(point.threshold) + "," + format_double(point.far) + "," +
                   format_double(point.frr) + "\n";
    }
    return out;
}

EvalReport report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "key,value")
        throw DataError("report csv: missing key,value header");

    EvalReport report;
    bool have_rank1 = false;
    while (std::getline(in, line) && !line.empty()) {
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("report csv: bad summary line \"" + line + "\"");
        const std::string key = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (key == "config_digest") {
            report.config_digest = value;
        } else if (key == "rank1_rate") {
            report.rank1_rate = parse_csv_double(value, "rank1_rate");
            have_rank1 = true;
        } else if (key == "rank1_face") {
            report.rank1_face = parse_csv_double(value, "rank1_face");
        } else if (key == "rank1_fingerprint") {
            report.rank1_fingerprint = parse_csv_double(value, "rank1_fingerprint");
        } else if (key == "rank1_fused") {
            report.rank1_fused = parse_csv_double(value, "rank1_fused");
        } else if (key == "eer") {
            report.eer = parse_csv_double(value, "eer");
        } else if (key == "enrolled_templates") {
            report.enrolled_templates = parse_csv_u64(value, "enrolled_templates");
        } else if (key == "probes") {
            report.probes = parse_csv_u64(value, "probes");
        } else if (key == "excluded_subjects") {
            if (!value.empty()) report.excluded_subjects = split_on(value, ';');
        } else {
            throw DataError("report csv: unknown summary key \"" + key + "\"");
        }
    }
    if (!have_rank1) throw DataError("report csv: missing rank1_rate");

    if (std::getline(in, line)) {
        if (line != "threshold,far,frr")
            throw DataError("report csv: missing threshold,far,frr header");
        while (std::getline(in, line)) {
            if (line.empty()) break;
            const std::vector<std::string> cells = split_on(line, ',');
            if (cells.size() != 3)
                throw DataError("report csv: bad roc line \"" + line + "\"");
            report.roc.push_back({parse_csv_double(cells[0], "threshold"),
                                  parse_csv_double(cells[1], "far"),
                                  parse_csv_double(cells[2], "frr")});
        }
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    ordered_json j;
    j["config_digest"] = report.config_digest;
    j["rank1_rate"] = report.rank1_rate;
    if (report.rank1_face) j["rank1_face"] = *report.rank1_face;
    if (report.rank1_fingerprint) j["rank1_fingerprint"] = *report.rank1_fingerprint;
    if (report.rank1_fused) j["rank1_fused"] = *report.rank1_fused;
    j["eer"] = report.eer;
    j["enrolled_templates"] = report.enrolled_templates;
    j["probes"] = report.probes;
    j["excluded_subjects"] = report.excluded_subjects;
    ordered_json roc = ordered_json::array();
    for (const RocPoint& point : report.roc)
        roc.push_back({{"threshold", point.threshold}, {"far", point.far}, {"frr", point.frr}});
    j["roc"] = std::move(roc);
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("report json: ") + e.what());
    }
    EvalReport report;
    try {
        report.config_digest = j.at("config_digest").get<std::string>();
        report.rank1_rate = j.at("rank1_rate").get<double>();
        if (j.contains("rank1_face")) report.rank1_face = j["rank1_face"].get<double>();
        if (j.contains("rank1_fingerprint"))
            report.rank1_fingerprint = j["rank1_fingerprint"].get<double>();
        if (j.contains("rank1_fused")) report.rank1_fused = j["rank1_fused"].get<double>();
        report.eer = j.at("eer").get<double>();
        report.enrolled_templates = j.at("enrolled_templates").get<std::uint64_t>();
        report.probes = j.at("probes").get<std::uint64_t>();
        for (const auto& id : j.at("excluded_subjects"))
            report.excluded_subjects.push_back(id.get<std::string>());
        for (const auto& point : j.at("roc"))
            report.roc.push_back({point.at("threshold").get<double>(),
                                  point.at("far").get<double>(),
                                  point.at("frr").get<double>()});
    } catch (const ordered_json::exception& e) {
        throw DataError(std::string("report json: ") + e.what());
    }
    return report;
}

} // namespace biofuse
