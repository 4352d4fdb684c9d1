// SPDX-License-Identifier: Apache-2.0
#include "biofuse/enhance.hpp"

#include <cmath>

namespace biofuse {

Histogram histogram(const GrayImage& img) {
    Histogram h;
    h.counts.assign(img.levels, 0);
    for (std::uint16_t p : img.pixels) ++h.counts[p];

    h.cdf.resize(img.levels);
    std::uint64_t running = 0;
    h.cdf_min = 0;
    for (int v = 0; v < img.levels; ++v) {
        running += h.counts[v];
        h.cdf[v] = running;
        if (h.cdf_min == 0 && h.counts[v] > 0) h.cdf_min = h.cdf[v];
    }
    return h;
}

std::vector<std::uint16_t> equalize_lut(const Histogram& h, std::uint64_t pixel_count,
                                        int levels) {
    std::vector<std::uint16_t> lut(levels);
    const std::uint64_t denom = pixel_count - h.cdf_min;
    if (denom == 0) {
        // Constant image: the remap is the identity by convention.
        for (int v = 0; v < levels; ++v) lut[v] = static_cast<std::uint16_t>(v);
        return lut;
    }
    for (int v = 0; v < levels; ++v) {
        // h(v) = round((cdf(v) - cdf_min) * (N-1) / (W*H - cdf_min)),
        // round half away from zero. cdf(v) < cdf_min only for levels below
        // the first occupied one; those map to 0.
        const std::uint64_t cdf_v = h.cdf[v];
        double scaled = 0.0;
        if (cdf_v > h.cdf_min)
            scaled = static_cast<double>(cdf_v - h.cdf_min) * (levels - 1) /
                     static_cast<double>(denom);
        lut[v] = static_cast<std::uint16_t>(std::llround(scaled));
    }
    return lut;
}

GrayImage equalize(const GrayImage& img) {
    const Histogram h = histogram(img);
    if (img.pixel_count() == h.cdf_min) return img;  // constant image, degenerate denominator

    const auto lut = equalize_lut(h, img.pixel_count(), img.levels);
    std::vector<std::uint16_t> out(img.pixel_count());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out[i] = lut[img.pixels[i]];
    return GrayImage::create(img.width, img.height, img.levels, std::move(out));
}

} // namespace biofuse
