// SPDX-License-Identifier: Apache-2.0
#include "biofuse/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace biofuse {

GrayImage GrayImage::create(int width, int height, int levels, std::vector<std::uint16_t> pixels) {
    if (width < 1 || height < 1) throw DataError("image dimensions must be at least 1x1");
    if (levels < 2 || levels > 65536) throw DataError("gray level count must lie in [2, 65536]");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw DataError("pixel count does not match width*height");
    const int maxv = levels - 1;
    for (std::uint16_t p : pixels)
        if (p > maxv) throw DataError("pixel intensity " + std::to_string(p) + " exceeds maxval " +
                                      std::to_string(maxv));
    GrayImage img;
    img.width = width;
    img.height = height;
    img.levels = levels;
    img.pixels = std::move(pixels);
    return img;
}

namespace {

bool is_pgm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

struct Cursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    std::uint8_t peek() const { return bytes[pos]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError("pgm decode error at byte " + std::to_string(pos) + ": " + what);
    }

    // Whitespace and '#' comments are interchangeable between header tokens.
    void skip_separators() {
        while (!eof()) {
            if (is_pgm_space(peek())) {
                ++pos;
            } else if (peek() == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    long parse_int(const char* what) {
        skip_separators();
        if (eof()) fail(std::string("unexpected end of header, expected ") + what);
        if (!std::isdigit(peek())) fail(std::string("expected ") + what + ", found byte 0x" +
                                        [&] {
                                            char b[3];
                                            std::snprintf(b, sizeof b, "%02x", peek());
                                            return std::string(b);
                                        }());
        long value = 0;
        while (!eof() && std::isdigit(peek())) {
            value = value * 10 + (peek() - '0');
            if (value > 1'000'000'000L) fail(std::string(what) + " is out of range");
            ++pos;
        }
        return value;
    }
};

} // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    Cursor cur{bytes};
    if (bytes.size() < 2)
        throw DataError("pgm decode error at byte 0: file too short for a magic number");
    const char m0 = static_cast<char>(bytes[0]);
    const char m1 = static_cast<char>(bytes[1]);
    if (m0 != 'P' || (m1 != '2' && m1 != '5')) {
        throw DataError(std::string("pgm decode error at byte 0: unsupported magic \"") + m0 + m1 +
                        "\" (only P2 and P5 are supported)");
    }
    const bool binary = (m1 == '5');
    cur.pos = 2;

    const long width = cur.parse_int("width");
    const long height = cur.parse_int("height");
    const long maxval = cur.parse_int("maxval");
    if (width < 1 || height < 1) cur.fail("dimensions must be at least 1x1");
    if (maxval < 1) cur.fail("maxval must be at least 1");
    if (maxval > 65535) cur.fail("maxval " + std::to_string(maxval) + " exceeds 65535");

    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<std::uint16_t> pixels(count);

    if (binary) {
        // Exactly one whitespace byte separates the header from the payload.
        if (cur.eof() || !is_pgm_space(cur.peek())) cur.fail("expected whitespace before payload");
        ++cur.pos;
        const int bytes_per = maxval > 255 ? 2 : 1;
        const std::size_t need = count * bytes_per;
        if (bytes.size() - cur.pos < need) {
            cur.fail("truncated payload: need " + std::to_string(need) + " bytes, have " +
                     std::to_string(bytes.size() - cur.pos));
        }
        for (std::size_t i = 0; i < count; ++i) {
            std::uint16_t v;
            if (bytes_per == 1) {
                v = bytes[cur.pos];
            } else {
                v = static_cast<std::uint16_t>((bytes[cur.pos] << 8) | bytes[cur.pos + 1]);
            }
            if (v > maxval)
                cur.fail("sample value " + std::to_string(v) + " exceeds maxval " +
                         std::to_string(maxval));
            pixels[i] = v;
            cur.pos += bytes_per;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = cur.parse_int("sample value");
            if (v > maxval)
                cur.fail("sample value " + std::to_string(v) + " exceeds maxval " +
                         std::to_string(maxval));
            pixels[i] = static_cast<std::uint16_t>(v);
        }
    }
    return GrayImage::create(static_cast<int>(width), static_cast<int>(height),
                             static_cast<int>(maxval) + 1, std::move(pixels));
}

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    try {
        return decode_pgm(bytes);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img, PgmFormat format) {
    std::string header = (format == PgmFormat::binary ? "P5\n" : "P2\n");
    header += std::to_string(img.width) + " " + std::to_string(img.height) + "\n";
    header += std::to_string(img.max_value()) + "\n";

    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (format == PgmFormat::binary) {
        const bool wide = img.max_value() > 255;
        out.reserve(out.size() + img.pixels.size() * (wide ? 2 : 1));
        for (std::uint16_t v : img.pixels) {
            if (wide) out.push_back(static_cast<std::uint8_t>(v >> 8));
            out.push_back(static_cast<std::uint8_t>(v & 0xff));
        }
    } else {
        std::string body;
        std::size_t line_len = 0;
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            std::string tok = std::to_string(img.pixels[i]);
            // Netpbm keeps plain-format lines at 70 characters or fewer.
            if (line_len != 0 && line_len + 1 + tok.size() > 70) {
                body += '\n';
                line_len = 0;
            } else if (line_len != 0) {
                body += ' ';
                ++line_len;
            }
            body += tok;
            line_len += tok.size();
        }
        body += '\n';
        out.insert(out.end(), body.begin(), body.end());
    }
    return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path, PgmFormat format) {
    const auto bytes = encode_pgm(img, format);
    std::ofstream outfile(path, std::ios::binary | std::ios::trunc);
    if (!outfile) throw IoError("cannot open " + path.string() + " for writing");
    outfile.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    if (!outfile) throw IoError("write failed for " + path.string());
}

PgmFormat detect_pgm_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] == 'P' && magic[1] == '2') return PgmFormat::ascii;
    if (magic[0] == 'P' && magic[1] == '5') return PgmFormat::binary;
    throw DataError(path.string() + ": pgm decode error at byte 0: unsupported magic \"" +
                    std::string(magic, 2) + "\" (only P2 and P5 are supported)");
}

GrayImage resample(const GrayImage& img, int target_w, int target_h) {
    if (target_w < 1 || target_h < 1) throw ConfigError("resample target must be at least 1x1");
    if (target_w == img.width && target_h == img.height) return img;

    const double scale_x = static_cast<double>(img.width) / target_w;
    const double scale_y = static_cast<double>(img.height) / target_h;
    const int maxv = img.max_value();

    std::vector<std::uint16_t> out(static_cast<std::size_t>(target_w) * target_h);
    for (int y = 0; y < target_h; ++y) {
        // Half-pixel centers, sample coordinate clamped to the source extent.
        const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, img.height - 1.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < target_w; ++x) {
            const double sx = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, img.width - 1.0);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;

            const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
            const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
            const double value = top * (1.0 - fy) + bot * fy;
            const long long rounded = std::llround(value);
            out[static_cast<std::size_t>(y) * target_w + x] = static_cast<std::uint16_t>(
                std::clamp<long long>(rounded, 0, maxv));
        }
    }
    return GrayImage::create(target_w, target_h, img.levels, std::move(out));
}

} // namespace biofuse
