// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "biofuse/jacobi.hpp"
#include "biofuse/pca.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace biofuse;

namespace {

FeatureVector fv(std::vector<double> values, Modality m = Modality::face) {
    return {m, std::move(values)};
}

Matrix random_symmetric(oracles::Rng& rng, int n) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
    return a;
}

} // namespace

TEST_CASE("jacobi_eigen of the identity") {
    const auto eig = jacobi_eigen(Matrix::identity(4));
    for (double l : eig.values) CHECK(l == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(eig.vectors(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
}

TEST_CASE("jacobi_eigen solves [[2,1],[1,2]] analytically") {
    Matrix a(2, 2);
    a(0, 0) = a(1, 1) = 2.0;
    a(0, 1) = a(1, 0) = 1.0;
    const auto eig = jacobi_eigen(a);
    REQUIRE(eig.values.size() == 2);
    CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(eig.vectors(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    CHECK(eig.vectors(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    // sign convention: largest-magnitude (first, on ties) entry positive
    CHECK(eig.vectors(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    CHECK(eig.vectors(1, 1) == doctest::Approx(-inv_sqrt2).epsilon(1e-10));
}

TEST_CASE("jacobi_eigen satisfies A v = lambda v on random symmetric matrices") {
    oracles::Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + rng.below(12);
        const auto a = random_symmetric(rng, n);
        const auto eig = jacobi_eigen(a);

        double trace = 0.0, eigsum = 0.0;
        for (int i = 0; i < n; ++i) trace += a(i, i);
        for (int k = 0; k < n; ++k) {
            eigsum += eig.values[k];
            if (k > 0) CHECK(eig.values[k] <= eig.values[k - 1] + 1e-12);
            double res = 0.0, norm = 0.0;
            for (int i = 0; i < n; ++i) {
                double av = 0.0;
                for (int j = 0; j < n; ++j) av += a(i, j) * eig.vectors(j, k);
                const double d = av - eig.values[k] * eig.vectors(i, k);
                res += d * d;
                norm += eig.vectors(i, k) * eig.vectors(i, k);
            }
            CHECK(std::sqrt(res) <= 1e-8);
            CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-10));
        }
        CHECK(eigsum == doctest::Approx(trace).epsilon(1e-10));
    }
}

TEST_CASE("jacobi_eigen rejects non-square input") {
    CHECK_THROWS_AS(jacobi_eigen(Matrix(2, 3)), DataError);
}

TEST_CASE("fit_pca on collinear points finds the diagonal axis") {
    const std::vector<FeatureVector> samples = {fv({1, 1}), fv({2, 2}), fv({3, 3})};
    const auto model = fit_pca(samples, {1, 0.95});
    CHECK(model.mean[0] == doctest::Approx(2.0));
    CHECK(model.mean[1] == doctest::Approx(2.0));
    REQUIRE(model.components() == 1);
    CHECK(model.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(model.basis(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    CHECK(model.basis(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    // explained fraction 1.0: the single eigenvalue carries the whole trace
    CHECK(model.eigenvalues[0] / model.total_variance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("snapshot and direct covariance agree on 10 random 50-dim samples") {
    oracles::Rng rng(42);
    std::vector<std::vector<double>> raw(10, std::vector<double>(50));
    std::vector<FeatureVector> samples;
    for (auto& r : raw) {
        for (auto& x : r) x = rng.uniform(-1.0, 1.0);
        samples.push_back(fv(r));
    }
    const auto model = fit_pca(samples, {0, 1.0});  // snapshot path: n=10 < d=50

    const auto cov = oracles::covariance_reference(raw);
    const auto direct = jacobi_eigen(cov);
    REQUIRE(model.components() <= 9);
    for (int k = 0; k < model.components(); ++k) {
        CHECK(model.eigenvalues[k] ==
              doctest::Approx(direct.values[k]).epsilon(1e-8));
        // same axis up to sign (signs already canonicalized on both sides)
        double dot = 0.0;
        for (int j = 0; j < 50; ++j) dot += model.basis(j, k) * direct.vectors(j, k);
        CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("variance fraction 1.0 keeps exactly the covariance rank") {
    oracles::Rng rng(43);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> v(3);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        samples.push_back(fv(v));
    }
    CHECK(fit_pca(samples, {0, 1.0}).components() == 3);  // n > d, full rank

    const std::vector<FeatureVector> line = {fv({1, 1}), fv({2, 2}), fv({3, 3})};
    CHECK(fit_pca(line, {0, 1.0}).components() == 1);  // rank 1
}

TEST_CASE("variance fraction selects the smallest sufficient k") {
    // Anisotropic cloud: variances approximately 100 : 1 : 0.01 along axes.
    oracles::Rng rng(44);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 60; ++i)
        samples.push_back(
            fv({10.0 * rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                0.1 * rng.uniform(-1.0, 1.0)}));
    const auto model = fit_pca(samples, {0, 0.95});
    CHECK(model.components() == 1);  // first axis alone explains > 98%
    double cum = 0.0;
    for (double l : model.eigenvalues) cum += l;
    CHECK(cum >= 0.95 * model.total_variance);
}

TEST_CASE("project maps the mean to zero and basis directions to unit axes") {
    oracles::Rng rng(45);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 8; ++i) {
        std::vector<double> v(5);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        samples.push_back(fv(v));
    }
    const auto model = fit_pca(samples, {0, 1.0});

    const auto zero = project(model, fv(model.mean));
    for (double x : zero.values) CHECK(std::abs(x) <= 1e-12);

    std::vector<double> shifted = model.mean;
    const double c = 1.7;
    for (int j = 0; j < 5; ++j) shifted[j] += c * model.basis(j, 0);
    const auto coords = project(model, fv(shifted));
    CHECK(coords.values[0] == doctest::Approx(c).epsilon(1e-10));
    for (int k = 1; k < coords.dim(); ++k) CHECK(std::abs(coords.values[k]) <= 1e-10);

    CHECK(project(model, fv(model.mean, Modality::fingerprint)).modality ==
          Modality::fingerprint);
    CHECK_THROWS_AS(project(model, fv({1.0, 2.0})), DataError);
}

TEST_CASE("full-rank projection reconstructs the training samples") {
    oracles::Rng rng(46);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 9; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = rng.uniform(-3.0, 3.0);
        samples.push_back(fv(v));
    }
    const auto model = fit_pca(samples, {0, 1.0});
    double mean_mag = 0.0;
    for (const auto& s : samples) {
        const auto coords = project(model, s);
        const auto rec = reconstruct(model, coords);
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(rec.values[j] - s.values[j]) <=
                  1e-6 * std::max(1.0, std::abs(s.values[j])));
        }
        for (int k = 0; k < coords.dim(); ++k) mean_mag += coords.values[k];
    }
    // projected training set is centered
    CHECK(std::abs(mean_mag) / samples.size() <= 1e-8);
}

TEST_CASE("reconstruction error is nonincreasing in k") {
    oracles::Rng rng(47);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 12; ++i) {
        std::vector<double> v(6);
        for (auto& x : v) x = rng.uniform(-2.0, 2.0);
        samples.push_back(fv(v));
    }
    const auto full = fit_pca(samples, {0, 1.0});
    double prev = -1.0;
    for (int k = full.components(); k >= 1; --k) {
        const auto model = truncate(full, k);
        double err = 0.0;
        for (const auto& s : samples) {
            const auto rec = reconstruct(model, project(model, s));
            for (int j = 0; j < 6; ++j) {
                const double d = rec.values[j] - s.values[j];
                err += d * d;
            }
        }
        if (prev >= 0.0) CHECK(err >= prev - 1e-10);  // error grows as k shrinks
        prev = err;
    }
}

TEST_CASE("truncate keeps the leading components") {
    oracles::Rng rng(48);
    std::vector<FeatureVector> samples;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        samples.push_back(fv(v));
    }
    const auto full = fit_pca(samples, {0, 1.0});
    const auto cut = truncate(full, 2);
    CHECK(cut.components() == 2);
    CHECK(cut.mean == full.mean);
    CHECK(cut.total_variance == full.total_variance);
    for (int c = 0; c < 2; ++c) {
        CHECK(cut.eigenvalues[c] == full.eigenvalues[c]);
        for (int j = 0; j < 4; ++j) CHECK(cut.basis(j, c) == full.basis(j, c));
    }
    CHECK_THROWS_AS(truncate(full, 0), ConfigError);
    CHECK_THROWS_AS(truncate(full, full.components() + 1), ConfigError);
}

TEST_CASE("fit_pca rejects degenerate inputs") {
    CHECK_THROWS_AS(fit_pca({fv({1, 2})}, {0, 0.95}), DataError);  // n < 2
    CHECK_THROWS_AS(fit_pca({fv({1, 2}), fv({1, 2, 3})}, {0, 0.95}), DataError);
    CHECK_THROWS_WITH_AS(fit_pca({fv({1, 2}), fv({1, 2}), fv({1, 2})}, {0, 0.95}),
                         doctest::Contains("rank 0"), DataError);
    CHECK_THROWS_AS(fit_pca({fv({1, 1}), fv({2, 2})}, {2, 0.95}), DataError);  // k > rank
    CHECK_THROWS_AS(fit_pca({fv({1, 1}), fv({2, 2})}, {0, 0.0}), ConfigError);
}

TEST_CASE("pca snapshot property sweep") {
    const auto r = prop::pca_snapshot_oracle(25, 0x41);
    INFO(r.detail);
    CHECK(r.ok);
}

TEST_CASE("fit_w2dpca with equal weights is weight-scale invariant") {
    oracles::Rng rng(49);
    std::vector<Matrix> images(4, Matrix(5, 4));
    for (auto& img : images)
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 4; ++c) img(r, c) = rng.uniform(-1.0, 1.0);

    const auto ones = fit_w2dpca(images, {1, 1, 1, 1}, 3);
    const auto twos = fit_w2dpca(images, {2, 2, 2, 2}, 3);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(ones.mean_image(r, c) == doctest::Approx(twos.mean_image(r, c)).epsilon(1e-12));
    for (int k = 0; k < 3; ++k)
        CHECK(ones.eigenvalues[k] == doctest::Approx(twos.eigenvalues[k]).epsilon(1e-10));

    // equal weights reduce Eq. 1 to the plain mean
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 4; ++c) {
            double m = 0.0;
            for (const auto& img : images) m += img(r, c);
            CHECK(ones.mean_image(r, c) == doctest::Approx(m / 4.0).epsilon(1e-12));
        }
}

TEST_CASE("fit_w2dpca on a single image gives zero scatter") {
    oracles::Rng rng(50);
    Matrix img(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) img(r, c) = rng.uniform(-1.0, 1.0);
    const auto model = fit_w2dpca({img}, {1.0}, 2);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(model.mean_image(r, c) == img(r, c));
    for (double l : model.eigenvalues) CHECK(l == 0.0);
    const auto proj = project_w2dpca(model, img);
    for (double x : proj.values) CHECK(x == 0.0);
}

TEST_CASE("fit_w2dpca weighted example matches the brute-force Eq. 1/2 oracle") {
    oracles::Rng rng(51);
    std::vector<Matrix> images(3, Matrix(4, 3));
    for (auto& img : images)
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c) img(r, c) = rng.uniform(-2.0, 2.0);
    const std::vector<double> weights = {1.0, 2.0, 3.0};

    const auto model = fit_w2dpca(images, weights, 3);
    const auto mean = oracles::weighted_mean_reference(images, weights);
    const auto g = oracles::weighted_scatter_reference(images, weights);

    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(model.mean_image(r, c) - mean(r, c)) <= 1e-12);

    // G symmetric within 1e-12, eigenvalues nonnegative under the clamp
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(std::abs(g(a, b) - g(b, a)) <= 1e-12);
    for (double l : model.eigenvalues) CHECK(l >= 0.0);

    // basis columns are eigenvectors of the oracle G
    for (int k = 0; k < 3; ++k) {
        for (int a = 0; a < 3; ++a) {
            double gv = 0.0;
            for (int b = 0; b < 3; ++b) gv += g(a, b) * model.basis(b, k);
            CHECK(gv == doctest::Approx(model.eigenvalues[k] * model.basis(a, k)).epsilon(1e-8));
        }
    }
}

TEST_CASE("project_w2dpca dimensions and completeness") {
    oracles::Rng rng(52);
    std::vector<Matrix> images(5, Matrix(4, 3));
    for (auto& img : images)
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c) img(r, c) = rng.uniform(-1.0, 1.0);
    const std::vector<double> w = {1, 1, 1, 1, 1};

    const auto two = fit_w2dpca(images, w, 2);
    CHECK(project_w2dpca(two, images[0]).dim() == 8);  // H=4, k=2

    const auto full = fit_w2dpca(images, w, 3);  // k == W
    const auto proj = project_w2dpca(full, images[1]);
    // reconstruct (img - mean) = proj * basis^T row by row
    for (int r = 0; r < 4; ++r)
        for (int j = 0; j < 3; ++j) {
            double rec = 0.0;
            for (int k = 0; k < 3; ++k) rec += proj.values[r * 3 + k] * full.basis(j, k);
            CHECK(rec ==
                  doctest::Approx(images[1](r, j) - full.mean_image(r, j)).epsilon(1e-8));
        }

    CHECK(project_w2dpca(full, full.mean_image).values ==
          std::vector<double>(12, 0.0));
    CHECK_THROWS_AS(project_w2dpca(full, Matrix(3, 3)), DataError);
}

TEST_CASE("fit_w2dpca rejects bad weights and component counts") {
    const std::vector<Matrix> images = {Matrix(2, 2, 1.0), Matrix(2, 2, 2.0)};
    CHECK_THROWS_AS(fit_w2dpca(images, {0.0, 0.0}, 1), DataError);
    CHECK_THROWS_AS(fit_w2dpca(images, {1.0, -1.0}, 1), DataError);
    CHECK_THROWS_AS(fit_w2dpca(images, {1.0, 1.0}, 3), ConfigError);
    CHECK_THROWS_AS(fit_w2dpca({}, {}, 1), DataError);
    CHECK_THROWS_AS(fit_w2dpca({Matrix(2, 2), Matrix(3, 2)}, {1, 1}, 1), DataError);
}

TEST_CASE("w2dpca property sweep against the summation oracle") {
    const auto r = prop::w2dpca_oracle(30, 0x2D2D);
    INFO(r.detail);
    CHECK(r.ok);
}
