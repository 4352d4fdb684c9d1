// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "biofuse/fusion.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace biofuse;

namespace {

FeatureVector fv(std::vector<double> values, Modality m = Modality::face) {
    return {m, std::move(values)};
}

} // namespace

TEST_CASE("fit_whitening on the two-point example") {
    const std::vector<FeatureVector> samples = {fv({0, 0}), fv({2, 2})};
    const auto stats = fit_whitening(samples);
    CHECK(stats.modality == Modality::face);
    CHECK(stats.mu == std::vector<double>{1.0, 1.0});
    const double sqrt2 = std::sqrt(2.0);
    CHECK(stats.sigma[0] == doctest::Approx(sqrt2).epsilon(1e-15));
    CHECK(stats.sigma[1] == doctest::Approx(sqrt2).epsilon(1e-15));
}

TEST_CASE("fit_whitening floors the sigma of degenerate components") {
    const std::vector<FeatureVector> samples = {fv({3, 1}), fv({3, 2}), fv({3, 3})};
    const auto stats = fit_whitening(samples);
    CHECK(stats.sigma[0] == 1e-8);
    CHECK(stats.sigma[1] > 1e-8);
}

TEST_CASE("fit_whitening rejects underfilled or mixed input") {
    CHECK_THROWS_AS(fit_whitening({fv({1, 2})}), DataError);
    CHECK_THROWS_AS(fit_whitening({fv({1}), fv({1, 2})}), DataError);
    CHECK_THROWS_AS(fit_whitening({fv({1}), fv({2}, Modality::fingerprint)}), DataError);
}

TEST_CASE("whiten applies (v - mu) / sigma componentwise") {
    WhiteningStats stats{Modality::face, {1.0, 1.0}, {2.0, 4.0}};
    const auto out = whiten(fv({3, 5}), stats);
    CHECK(out.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.values[1] == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(whiten(fv({1, 1}), stats).values == std::vector<double>{0.0, 0.0});

    WhiteningStats unit{Modality::face, {0.0, 0.0}, {1.0, 1.0}};
    CHECK(whiten(fv({0.25, -3.5}), unit).values == std::vector<double>{0.25, -3.5});

    CHECK_THROWS_AS(whiten(fv({1, 2, 3}), stats), DataError);
}

TEST_CASE("whitened training set has zero mean and unit variance") {
    oracles::Rng rng(61);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> v(6);
        for (int j = 0; j < 6; ++j) v[j] = rng.uniform(-3.0, 3.0) * (j + 1);
        samples.push_back(fv(v));
    }
    const auto stats = fit_whitening(samples);
    std::vector<double> mean(6, 0.0), var(6, 0.0);
    for (const auto& s : samples) {
        const auto w = whiten(s, stats);
        for (int j = 0; j < 6; ++j) mean[j] += w.values[j];
    }
    for (auto& m : mean) m /= samples.size();
    for (const auto& s : samples) {
        const auto w = whiten(s, stats);
        for (int j = 0; j < 6; ++j) var[j] += (w.values[j] - mean[j]) * (w.values[j] - mean[j]);
    }
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(mean[j]) <= 1e-8);
        CHECK(std::sqrt(var[j] / (samples.size() - 1)) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("whitening is invariant to per-component rescaling of the raw data") {
    oracles::Rng rng(62);
    std::vector<FeatureVector> samples, scaled;
    const std::vector<double> a = {3.0, 0.25, 17.0};
    for (int i = 0; i < 12; ++i) {
        std::vector<double> v(3), sv(3);
        for (int j = 0; j < 3; ++j) {
            v[j] = rng.uniform(-2.0, 2.0);
            sv[j] = a[j] * v[j];
        }
        samples.push_back(fv(v));
        scaled.push_back(fv(sv));
    }
    const auto s0 = fit_whitening(samples);
    const auto s1 = fit_whitening(scaled);
    for (int i = 0; i < 12; ++i) {
        const auto w0 = whiten(samples[i], s0);
        const auto w1 = whiten(scaled[i], s1);
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(w0.values[j] - w1.values[j]) <= 1e-9);
    }
}

TEST_CASE("tanh_normalize hits the documented anchors") {
    CHECK(tanh_normalize(fv({0.0})).values[0] == 0.5);
    // v=100, c=0.01: (tanh(1)+1)/2
    CHECK(std::abs(tanh_normalize(fv({100.0})).values[0] - 0.880797) <= 1e-6);
    // saturation stays strictly inside (0,1)
    const auto hi = tanh_normalize(fv({1e300}));
    const auto lo = tanh_normalize(fv({-1e300}));
    CHECK(hi.values[0] < 1.0);
    CHECK(hi.values[0] > 0.99);
    CHECK(lo.values[0] > 0.0);
    CHECK(lo.values[0] < 0.01);
}

TEST_CASE("tanh_normalize is strictly monotone and order preserving") {
    oracles::Rng rng(63);
    std::vector<double> xs(50);
    for (auto& x : xs) x = rng.uniform(-500.0, 500.0);
    const auto out = tanh_normalize(fv(xs));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j)
            if (xs[i] < xs[j]) CHECK(out.values[i] < out.values[j]);
}

TEST_CASE("tanh_normalize respects the scale constant") {
    const double x = 42.0, c = 0.05;
    const auto out = tanh_normalize(fv({x}), c);
    CHECK(out.values[0] == doctest::Approx(0.5 * (std::tanh(c * x) + 1.0)).epsilon(1e-15));
}

TEST_CASE("fuse averages componentwise and tags the result fused") {
    const auto a = fv({0.2, 0.2, 0.2});
    const auto b = fv({0.8, 0.8, 0.8}, Modality::fingerprint);
    const auto f = fuse(a, b);
    CHECK(f.modality == Modality::fused);
    CHECK(f.values == std::vector<double>{0.5, 0.5, 0.5});

    CHECK(fuse(a, a).values == a.values);           // average of equals
    CHECK(fuse(a, b).values == fuse(b, a).values);  // commutative
    CHECK_THROWS_AS(fuse(a, fv({0.1, 0.2}, Modality::fingerprint)), DataError);
}

TEST_CASE("mahalanobis_distance on the documented example is sqrt(2)") {
    WhiteningStats stats{Modality::face, {1.0, 1.0}, {2.0, 4.0}};
    CHECK(std::abs(mahalanobis_distance(fv({3, 5}), stats) - std::sqrt(2.0)) <= 1e-12);
    CHECK(mahalanobis_distance(fv({1, 1}), stats) == 0.0);

    WhiteningStats unit{Modality::face, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    const auto v = fv({3.0, -4.0, 12.0});
    CHECK(mahalanobis_distance(v, unit) == doctest::Approx(13.0).epsilon(1e-15));
}

TEST_CASE("make_fused_template enforces the open-interval invariant") {
    auto good = fv({0.3, 0.7}, Modality::fused);
    const auto t = make_fused_template("s1", good);
    CHECK(t.subject == "s1");
    CHECK(t.vector.dim() == 2);
    CHECK_THROWS_AS(make_fused_template("s2", fv({0.0, 0.5}, Modality::fused)), DataError);
    CHECK_THROWS_AS(make_fused_template("s3", fv({0.5, 1.0}, Modality::fused)), DataError);
}

TEST_CASE("fusion property sweep (dimension, open range, average rule)") {
    const auto r = prop::fusion_properties(1000, 0x61);
    INFO(r.detail);
    CHECK(r.ok);
}
