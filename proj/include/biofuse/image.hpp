// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "biofuse/errors.hpp"

namespace biofuse {

/// Integer-intensity raster, row-major, top-left origin.
/// `levels` is the number of gray levels N; every pixel lies in [0, N-1].
struct GrayImage {
    int width = 0;
    int height = 0;
    int levels = 0;
    std::vector<std::uint16_t> pixels;

    static GrayImage create(int width, int height, int levels, std::vector<std::uint16_t> pixels);

    std::uint16_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    int max_value() const { return levels - 1; }
    std::size_t pixel_count() const { return pixels.size(); }

    bool operator==(const GrayImage&) const = default;
};

enum class PgmFormat { binary, ascii };  // P5 / P2

/// Decodes a P5 (binary) or P2 (ASCII) PGM buffer. Errors name the byte offset.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage load_pgm(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pgm(const GrayImage& img, PgmFormat format = PgmFormat::binary);
void write_pgm(const GrayImage& img, const std::filesystem::path& path,
               PgmFormat format = PgmFormat::binary);

/// Reads only the magic number of a PGM file, remembering the source format.
PgmFormat detect_pgm_format(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers. Same-size targets are bit-identical
/// to the input; intensities are rounded half away from zero and clamped.
GrayImage resample(const GrayImage& img, int target_w, int target_h);

} // namespace biofuse
