// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "biofuse/image.hpp"

namespace biofuse {

/// Gray-level occurrence counts plus the running cumulative distribution.
struct Histogram {
    std::vector<std::uint64_t> counts;  // one slot per gray level
    std::vector<std::uint64_t> cdf;     // running sum of counts
    std::uint64_t cdf_min = 0;          // smallest nonzero cdf value
};

Histogram histogram(const GrayImage& img);

/// Global histogram equalization:
///   h(v) = round((cdf(v) - cdf_min) * (N - 1) / (W*H - cdf_min))
/// with round half away from zero. A constant image (zero denominator) is
/// returned unchanged.
GrayImage equalize(const GrayImage& img);

/// The remap table h(v) for every gray level of the image.
std::vector<std::uint16_t> equalize_lut(const Histogram& h, std::uint64_t pixel_count, int levels);

} // namespace biofuse
