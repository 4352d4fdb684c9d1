// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "biofuse/fusion.hpp"
#include "biofuse/matching.hpp"
#include "biofuse/pca.hpp"

namespace biofuse {

// Versioned little-endian binary containers. Magic bytes identify the payload
// kind: "BFPC" PCA model, "BFWS" whitening stats, "BF2D" weighted-2DPCA
// model, "BFTS" template store. A wrong magic or version fails loudly.

std::vector<std::uint8_t> serialize_pca(const PcaModel& model);
PcaModel deserialize_pca(std::span<const std::uint8_t> bytes);
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_whitening(const WhiteningStats& stats);
WhiteningStats deserialize_whitening(std::span<const std::uint8_t> bytes);
void save_whitening(const WhiteningStats& stats, const std::filesystem::path& path);
WhiteningStats load_whitening(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_w2dpca(const W2dpcaModel& model);
W2dpcaModel deserialize_w2dpca(std::span<const std::uint8_t> bytes);
void save_w2dpca(const W2dpcaModel& model, const std::filesystem::path& path);
W2dpcaModel load_w2dpca(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_store(const TemplateStore& store);
TemplateStore deserialize_store(std::span<const std::uint8_t> bytes);
void save_store(const TemplateStore& store, const std::filesystem::path& path);
TemplateStore load_store(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, const std::string& text);

} // namespace biofuse
