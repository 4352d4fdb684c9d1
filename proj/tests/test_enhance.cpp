// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "biofuse/enhance.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"
#include "support/synthetic.hpp"

using namespace biofuse;

TEST_CASE("histogram counts the 2x2 reference image") {
    const auto img = GrayImage::create(2, 2, 256, {0, 64, 128, 255});
    const auto h = histogram(img);
    REQUIRE(h.counts.size() == 256);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[64] == 1);
    CHECK(h.counts[128] == 1);
    CHECK(h.counts[255] == 1);
    CHECK(h.cdf[0] == 1);
    CHECK(h.cdf[64] == 2);
    CHECK(h.cdf[128] == 3);
    CHECK(h.cdf[255] == 4);
    CHECK(h.cdf_min == 1);
}

TEST_CASE("histogram of constant and single-pixel images") {
    const auto c = histogram(GrayImage::create(3, 3, 256, std::vector<std::uint16_t>(9, 5)));
    CHECK(c.counts[5] == 9);
    CHECK(c.cdf_min == 9);
    const auto s = histogram(GrayImage::create(1, 1, 256, {0}));
    CHECK(s.counts[0] == 1);
    CHECK(s.cdf_min == 1);
}

TEST_CASE("histogram invariants hold on random images") {
    oracles::Rng rng(21);
    for (int i = 0; i < 50; ++i) {
        const int levels = 2 + rng.below(300);
        const auto img = synth::random_image(rng, 1 + rng.below(32), 1 + rng.below(32), levels);
        const auto h = histogram(img);
        const std::uint64_t total =
            std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0});
        CHECK(total == img.pixel_count());
        CHECK(h.cdf.back() == img.pixel_count());
        for (std::size_t v = 1; v < h.cdf.size(); ++v) CHECK(h.cdf[v] >= h.cdf[v - 1]);
        std::uint64_t cdf_min = 0;
        for (std::size_t v = 0; v < h.counts.size(); ++v)
            if (h.counts[v] > 0) {
                cdf_min = h.cdf[v];
                break;
            }
        CHECK(h.cdf_min == cdf_min);
    }
}

// Eq. 3 by hand: h(0)=0, h(64)=round(255/3)=85, h(128)=round(2*255/3)=170,
// h(255)=255.
TEST_CASE("equalize maps the 2x2 reference image to [0,85,170,255]") {
    const auto img = GrayImage::create(2, 2, 256, {0, 64, 128, 255});
    const auto eq = equalize(img);
    CHECK(eq.pixels == std::vector<std::uint16_t>{0, 85, 170, 255});
    CHECK(eq.width == 2);
    CHECK(eq.height == 2);
    CHECK(eq.levels == 256);
}

TEST_CASE("equalize leaves a constant image unchanged") {
    const auto img = GrayImage::create(4, 3, 256, std::vector<std::uint16_t>(12, 200));
    CHECK(equalize(img) == img);
}

TEST_CASE("equalize is the identity on a perfectly uniform 16x16 spread") {
    // each level of [0,255] exactly once: cdf(v)=v+1, cdf_min=1, so
    // h(v) = round(v * 255 / 255) = v.
    std::vector<std::uint16_t> px(256);
    std::iota(px.begin(), px.end(), 0);
    const auto img = GrayImage::create(16, 16, 256, std::move(px));
    CHECK(equalize(img) == img);
}

TEST_CASE("equalize maps the lowest occupied level to zero") {
    oracles::Rng rng(22);
    for (int i = 0; i < 50; ++i) {
        const auto img = synth::random_image(rng, 2 + rng.below(16), 2 + rng.below(16), 256);
        const auto mm = std::minmax_element(img.pixels.begin(), img.pixels.end());
        if (*mm.first == *mm.second) continue;  // constant image: degenerate rule
        const auto eq = equalize(img);
        const auto out_min = *std::min_element(eq.pixels.begin(), eq.pixels.end());
        CHECK(out_min == 0);
    }
}

TEST_CASE("equalize preserves pixel rank order") {
    oracles::Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        const auto img = synth::random_image(rng, 1 + rng.below(24), 1 + rng.below(24), 256);
        const auto eq = equalize(img);
        for (std::size_t a = 0; a < img.pixels.size(); ++a)
            for (std::size_t b = a + 1; b < img.pixels.size(); ++b)
                if (img.pixels[a] <= img.pixels[b]) CHECK(eq.pixels[a] <= eq.pixels[b]);
    }
}

TEST_CASE("equalize matches a direct Eq. 3 oracle loop") {
    oracles::Rng rng(24);
    for (int i = 0; i < 200; ++i) {
        const int levels = 2 + rng.below(511);
        const auto img = synth::random_image(rng, 1 + rng.below(24), 1 + rng.below(24), levels);
        const auto h = histogram(img);
        const std::uint64_t wh = img.pixel_count();
        if (wh == h.cdf_min) continue;  // constant image handled elsewhere
        const auto eq = equalize(img);
        for (std::size_t p = 0; p < img.pixels.size(); ++p) {
            const std::uint64_t cdf_v = h.cdf[img.pixels[p]];
            // numerator product first, as the formula is written
            const double arg = static_cast<double>(cdf_v - h.cdf_min) * (levels - 1) /
                               static_cast<double>(wh - h.cdf_min);
            CHECK(eq.pixels[p] == static_cast<std::uint16_t>(std::llround(arg)));
        }
    }
}

TEST_CASE("equalization property sweep (range, monotonicity, mass)") {
    const auto r = prop::equalization_properties(250, 0x1E);
    INFO(r.detail);
    CHECK(r.ok);
}
