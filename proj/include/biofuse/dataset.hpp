// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "biofuse/features.hpp"

namespace biofuse {

enum class DatasetLayout { orl, flat };

std::string to_string(DatasetLayout l);
DatasetLayout layout_from_string(const std::string& s);

struct SubjectEntry {
    std::string id;
    std::vector<std::string> samples;  // image paths, ordered by sample id

    bool operator==(const SubjectEntry&) const = default;
};

/// Directory-structured dataset resolved into a deterministic listing.
/// Subjects are sorted by id, samples by sample id, independent of filesystem
/// enumeration order.
struct DatasetManifest {
    Modality modality = Modality::face;
    std::vector<SubjectEntry> subjects;

    bool operator==(const DatasetManifest&) const = default;
};

/// orl layout:  root/<subject-dir>/<sample>.pgm
/// flat layout: root/<subjectid>_<sampleid>.<ext>
DatasetManifest ingest(const std::filesystem::path& root, DatasetLayout layout, Modality modality);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

/// Digit-aware ordering: "s2" sorts before "s10".
bool natural_less(std::string_view a, std::string_view b);

} // namespace biofuse
