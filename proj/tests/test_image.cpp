// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "biofuse/dataset.hpp"
#include "biofuse/image.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace biofuse;
namespace fs = std::filesystem;

namespace {
std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }
} // namespace

TEST_CASE("decode_pgm reads the P5 reference bytes") {
    auto buf = bytes_of("P5\n2 2\n255\n");
    const std::uint8_t payload[] = {0, 64, 128, 255};
    buf.insert(buf.end(), payload, payload + 4);

    const auto img = decode_pgm(buf);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.levels == 256);
    CHECK(img.pixels == std::vector<std::uint16_t>{0, 64, 128, 255});
}

TEST_CASE("decode_pgm P2 text equals the binary decoding") {
    const auto ascii = decode_pgm(bytes_of("P2\n2 2\n255\n0 64\n128 255\n"));
    auto bin = bytes_of("P5\n2 2\n255\n");
    const std::uint8_t payload[] = {0, 64, 128, 255};
    bin.insert(bin.end(), payload, payload + 4);
    CHECK(ascii == decode_pgm(bin));
}

TEST_CASE("decode_pgm rejects color P6 input") {
    CHECK_THROWS_WITH_AS(decode_pgm(bytes_of("P6\n1 1\n255\nabc")),
                         doctest::Contains("unsupported magic"), DataError);
}

TEST_CASE("decode_pgm names the byte offset of a truncated payload") {
    auto buf = bytes_of("P5\n2 2\n255\n");
    buf.push_back(7);  // one of four payload bytes
    try {
        decode_pgm(buf);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("byte") != std::string::npos);
        CHECK(msg.find("truncated") != std::string::npos);
    }
}

TEST_CASE("decode_pgm handles header comments and 16-bit samples") {
    auto buf = bytes_of("P5\n# synthetic\n1 2\n# maxval next\n65535\n");
    const std::uint8_t payload[] = {0x01, 0x00, 0xff, 0xfe};  // big-endian 256, 65534
    buf.insert(buf.end(), payload, payload + 4);
    const auto img = decode_pgm(buf);
    CHECK(img.levels == 65536);
    CHECK(img.pixels == std::vector<std::uint16_t>{256, 65534});
}

TEST_CASE("encode/decode round-trips random images in both formats") {
    oracles::Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const int levels = 2 + static_cast<int>(rng.next() % 65535);
        const auto img =
            synth::random_image(rng, 1 + rng.below(20), 1 + rng.below(20), levels);
        CHECK(decode_pgm(encode_pgm(img, PgmFormat::binary)) == img);
        CHECK(decode_pgm(encode_pgm(img, PgmFormat::ascii)) == img);
    }
}

TEST_CASE("write_pgm/load_pgm round-trips through the filesystem") {
    const auto dir = synth::fresh_dir("imageio");
    oracles::Rng rng(12);
    const auto img = synth::random_image(rng, 9, 7, 256);
    write_pgm(img, dir / "a.pgm");
    CHECK(load_pgm(dir / "a.pgm") == img);
    CHECK(detect_pgm_format(dir / "a.pgm") == PgmFormat::binary);
    write_pgm(img, dir / "b.pgm", PgmFormat::ascii);
    CHECK(load_pgm(dir / "b.pgm") == img);
    CHECK(detect_pgm_format(dir / "b.pgm") == PgmFormat::ascii);
    CHECK_THROWS_AS(load_pgm(dir / "missing.pgm"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("resample to the same size is bit-identical") {
    oracles::Rng rng(13);
    const auto img = synth::random_image(rng, 112, 92, 256);
    CHECK(resample(img, 112, 92) == img);
}

TEST_CASE("resample keeps a constant field constant") {
    const auto img = GrayImage::create(2, 2, 256, {7, 7, 7, 7});
    const auto out = resample(img, 5, 5);
    CHECK(out.width == 5);
    CHECK(out.height == 5);
    for (auto p : out.pixels) CHECK(p == 7);
}

TEST_CASE("resample 2:1 matches the scalar bilinear reference") {
    oracles::Rng rng(14);
    const auto img = synth::random_image(rng, 224, 184, 256);
    const auto out = resample(img, 112, 92);
    REQUIRE(out.width == 112);
    REQUIRE(out.height == 92);
    for (int y = 0; y < 92; ++y) {
        for (int x = 0; x < 112; ++x) {
            // source coordinate ((x+0.5)*2-0.5, (y+0.5)*2-0.5)
            const double want =
                oracles::bilinear_reference(img, (x + 0.5) * 2.0 - 0.5, (y + 0.5) * 2.0 - 0.5);
            long long rounded = std::llround(want);
            rounded = std::min<long long>(std::max<long long>(rounded, 0), 255);
            CHECK(out.at(x, y) == rounded);
        }
    }
}

TEST_CASE("resample matches the reference on arbitrary geometries") {
    oracles::Rng rng(15);
    for (int i = 0; i < 25; ++i) {
        const auto img = synth::random_image(rng, 2 + rng.below(30), 2 + rng.below(30), 256);
        const int tw = 1 + rng.below(40);
        const int th = 1 + rng.below(40);
        const auto out = resample(img, tw, th);
        const double sx_scale = static_cast<double>(img.width) / tw;
        const double sy_scale = static_cast<double>(img.height) / th;
        for (int y = 0; y < th; ++y) {
            for (int x = 0; x < tw; ++x) {
                const double want = oracles::bilinear_reference(img, (x + 0.5) * sx_scale - 0.5,
                                                                (y + 0.5) * sy_scale - 0.5);
                CHECK(std::abs(out.at(x, y) - want) <= 0.5 + 1e-9);
            }
        }
    }
}

TEST_CASE("ingest orl layout enumerates sorted subjects and samples") {
    const auto dir = synth::fresh_dir("ingest-orl");
    const auto one = GrayImage::create(1, 1, 256, {0});
    fs::create_directories(dir / "s1");
    fs::create_directories(dir / "s2");
    write_pgm(one, dir / "s1" / "1.pgm");
    write_pgm(one, dir / "s1" / "2.pgm");
    write_pgm(one, dir / "s2" / "1.pgm");

    const auto m = ingest(dir, DatasetLayout::orl, Modality::face);
    REQUIRE(m.subjects.size() == 2);
    CHECK(m.subjects[0].id == "s1");
    REQUIRE(m.subjects[0].samples.size() == 2);
    CHECK(fs::path(m.subjects[0].samples[0]).filename() == "1.pgm");
    CHECK(fs::path(m.subjects[0].samples[1]).filename() == "2.pgm");
    CHECK(m.subjects[1].id == "s2");
    CHECK(m.subjects[1].samples.size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("ingest sorts numerically, not lexicographically") {
    const auto dir = synth::fresh_dir("ingest-natural");
    const auto one = GrayImage::create(1, 1, 256, {0});
    for (const char* s : {"s10", "s2", "s1"}) {
        fs::create_directories(dir / s);
        write_pgm(one, dir / s / "10.pgm");
        write_pgm(one, dir / s / "9.pgm");
        write_pgm(one, dir / s / "1.pgm");
    }
    const auto m = ingest(dir, DatasetLayout::orl, Modality::face);
    REQUIRE(m.subjects.size() == 3);
    CHECK(m.subjects[0].id == "s1");
    CHECK(m.subjects[1].id == "s2");
    CHECK(m.subjects[2].id == "s10");
    CHECK(fs::path(m.subjects[0].samples[0]).filename() == "1.pgm");
    CHECK(fs::path(m.subjects[0].samples[1]).filename() == "9.pgm");
    CHECK(fs::path(m.subjects[0].samples[2]).filename() == "10.pgm");
    fs::remove_all(dir);
}

TEST_CASE("ingest flat layout parses subjectid_sampleid names") {
    const auto dir = synth::fresh_dir("ingest-flat");
    const auto one = GrayImage::create(1, 1, 256, {0});
    write_pgm(one, dir / "a_1.pgm");
    write_pgm(one, dir / "a_2.pgm");
    write_pgm(one, dir / "b_1.pgm");

    const auto m = ingest(dir, DatasetLayout::flat, Modality::fingerprint);
    CHECK(m.modality == Modality::fingerprint);
    REQUIRE(m.subjects.size() == 2);
    CHECK(m.subjects[0].id == "a");
    CHECK(m.subjects[0].samples.size() == 2);
    CHECK(m.subjects[1].id == "b");
    CHECK(m.subjects[1].samples.size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("ingest flat layout rejects unparsable filenames, listing them") {
    const auto dir = synth::fresh_dir("ingest-bad");
    const auto one = GrayImage::create(1, 1, 256, {0});
    write_pgm(one, dir / "noseparator.pgm");
    try {
        ingest(dir, DatasetLayout::flat, Modality::face);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("noseparator.pgm") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("ingest of an empty root reports no subjects") {
    const auto dir = synth::fresh_dir("ingest-empty");
    CHECK_THROWS_WITH_AS(ingest(dir, DatasetLayout::orl, Modality::face),
                         doctest::Contains("no subjects found"), DataError);
    CHECK_THROWS_AS(ingest(dir / "nope", DatasetLayout::orl, Modality::face), IoError);
    fs::remove_all(dir);
}

TEST_CASE("manifest JSON round-trips") {
    DatasetManifest m;
    m.modality = Modality::fingerprint;
    m.subjects = {{"s1", {"/d/s1/1.pgm", "/d/s1/2.pgm"}}, {"s2", {"/d/s2/1.pgm"}}};
    CHECK(manifest_from_json(manifest_to_json(m)) == m);
}

TEST_CASE("natural_less orders digit runs by value") {
    CHECK(natural_less("s2", "s10"));
    CHECK_FALSE(natural_less("s10", "s2"));
    CHECK(natural_less("a", "b"));
    CHECK_FALSE(natural_less("a", "a"));
    CHECK(natural_less("a1b2", "a1b10"));
}

TEST_CASE("GrayImage::create enforces its invariants") {
    CHECK_THROWS_AS(GrayImage::create(0, 1, 256, {}), DataError);
    CHECK_THROWS_AS(GrayImage::create(1, 1, 1, {0}), DataError);
    CHECK_THROWS_AS(GrayImage::create(2, 1, 256, {0}), DataError);
    CHECK_THROWS_AS(GrayImage::create(1, 1, 4, {9}), DataError);
}
