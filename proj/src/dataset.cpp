// SPDX-License-Identifier: Apache-2.0
#include "biofuse/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <json.hpp>

namespace fs = std::filesystem;

namespace biofuse {

std::string to_string(DatasetLayout l) { return l == DatasetLayout::orl ? "orl" : "flat"; }

DatasetLayout layout_from_string(const std::string& s) {
    if (s == "orl") return DatasetLayout::orl;
    if (s == "flat") return DatasetLayout::flat;
    throw ConfigError("unknown dataset layout \"" + s + "\" (expected orl or flat)");
}

bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) &&
            std::isdigit(static_cast<unsigned char>(b[j]))) {
            const std::size_t ia = i, jb = j;
            while (i < a.size() && std::isdigit(static_cast<unsigned char>(a[i]))) ++i;
            while (j < b.size() && std::isdigit(static_cast<unsigned char>(b[j]))) ++j;
            std::string_view ra = a.substr(ia, i - ia);
            std::string_view rb = b.substr(jb, j - jb);
            std::string_view sa = ra.substr(std::min(ra.find_first_not_of('0'), ra.size() - 1));
            std::string_view sb = rb.substr(std::min(rb.find_first_not_of('0'), rb.size() - 1));
            if (sa.size() != sb.size()) return sa.size() < sb.size();
            if (sa != sb) return sa < sb;
            if (ra != rb) return ra < rb;  // equal value, differing zero padding
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return (a.size() - i) < (b.size() - j);
}

namespace {

bool is_pgm_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".pgm";
}

DatasetManifest ingest_orl(const fs::path& root, Modality modality) {
    std::vector<SubjectEntry> subjects;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        SubjectEntry subject;
        subject.id = entry.path().filename().string();
        std::vector<std::pair<std::string, std::string>> samples;  // (sample id, path)
        for (const auto& file : fs::directory_iterator(entry.path())) {
            if (!file.is_regular_file() || !is_pgm_file(file.path())) continue;
            samples.emplace_back(file.path().stem().string(), file.path().string());
        }
        if (samples.empty()) continue;  // stray directory without images
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return natural_less(a.first, b.first); });
        for (auto& [id, path] : samples) subject.samples.push_back(std::move(path));
        subjects.push_back(std::move(subject));
    }
    if (subjects.empty()) throw DataError("no subjects found under " + root.string());
    std::sort(subjects.begin(), subjects.end(),
              [](const auto& a, const auto& b) { return natural_less(a.id, b.id); });
    return DatasetManifest{modality, std::move(subjects)};
}

DatasetManifest ingest_flat(const fs::path& root, Modality modality) {
    // stem "subjectid_sampleid"; the last underscore separates the two parts.
    std::map<std::string, std::vector<std::pair<std::string, std::string>>,
             decltype([](const std::string& a, const std::string& b) {
                 return natural_less(a, b);
             })>
        by_subject;
    std::vector<std::string> offending;
    for (const auto& file : fs::directory_iterator(root)) {
        if (!file.is_regular_file() || !is_pgm_file(file.path())) continue;
        const std::string stem = file.path().stem().string();
        const std::size_t sep = stem.rfind('_');
        if (sep == std::string::npos || sep == 0 || sep + 1 == stem.size()) {
            offending.push_back(file.path().string());
            continue;
        }
        by_subject[stem.substr(0, sep)].emplace_back(stem.substr(sep + 1),
                                                     file.path().string());
    }
    if (!offending.empty()) {
        std::sort(offending.begin(), offending.end());
        std::string msg = "unparsable flat-layout filenames (expected subjectid_sampleid.pgm):";
        for (const auto& p : offending) msg += "\n  " + p;
        throw DataError(msg);
    }
    if (by_subject.empty()) throw DataError("no subjects found under " + root.string());

    std::vector<SubjectEntry> subjects;
    for (auto& [id, samples] : by_subject) {
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return natural_less(a.first, b.first); });
        SubjectEntry subject;
        subject.id = id;
        for (auto& [sid, path] : samples) subject.samples.push_back(std::move(path));
        subjects.push_back(std::move(subject));
    }
    return DatasetManifest{modality, std::move(subjects)};
}

} // namespace

DatasetManifest ingest(const fs::path& root, DatasetLayout layout, Modality modality) {
    if (!fs::exists(root)) throw IoError("dataset root does not exist: " + root.string());
    if (!fs::is_directory(root)) throw IoError("dataset root is not a directory: " + root.string());
    return layout == DatasetLayout::orl ? ingest_orl(root, modality)
                                        : ingest_flat(root, modality);
}

std::string manifest_to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["modality"] = to_string(m.modality);
    j["subjects"] = nlohmann::ordered_json::array();
    for (const auto& s : m.subjects) {
        nlohmann::ordered_json subj;
        subj["id"] = s.id;
        subj["samples"] = s.samples;
        j["subjects"].push_back(std::move(subj));
    }
    return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest parse error: ") + e.what());
    }
    try {
        DatasetManifest m;
        m.modality = modality_from_string(j.at("modality").get<std::string>());
        for (const auto& subj : j.at("subjects")) {
            SubjectEntry s;
            s.id = subj.at("id").get<std::string>();
            for (const auto& p : subj.at("samples")) s.samples.push_back(p.get<std::string>());
            if (s.samples.empty())
                throw DataError("manifest subject \"" + s.id + "\" has no samples");
            m.subjects.push_back(std::move(s));
        }
        std::set<std::string> seen;
        for (const auto& s : m.subjects)
            if (!seen.insert(s.id).second)
                throw DataError("manifest has duplicate subject id \"" + s.id + "\"");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest field error: ") + e.what());
    }
}

} // namespace biofuse
