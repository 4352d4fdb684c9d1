// SPDX-License-Identifier: Apache-2.0
#include "biofuse/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "biofuse/errors.hpp"

namespace biofuse {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) f64(p[i]);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void magic(const char tag[4]) { bytes.insert(bytes.end(), tag, tag + 4); }
};

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
    const char* what;  // container name for error messages

    void need(std::size_t n) const {
        if (pos + n > bytes.size())
            throw DataError(std::string(what) + ": truncated at byte " + std::to_string(pos));
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void f64s(double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) p[i] = f64();
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
    void expect_magic(const char tag[4]) {
        need(4);
        if (std::memcmp(bytes.data() + pos, tag, 4) != 0)
            throw DataError(std::string(what) + ": bad magic bytes (expected " +
                            std::string(tag, 4) + ")");
        pos += 4;
    }
    void expect_version() {
        const std::uint32_t v = u32();
        if (v != kFormatVersion)
            throw DataError(std::string(what) + ": unsupported format version " +
                            std::to_string(v));
    }
    void expect_end() const {
        if (pos != bytes.size())
            throw DataError(std::string(what) + ": " + std::to_string(bytes.size() - pos) +
                            " trailing bytes");
    }
};

std::uint8_t modality_tag(Modality m) { return static_cast<std::uint8_t>(m); }

Modality modality_from_tag(std::uint8_t tag, const char* what) {
    if (tag > 2) throw DataError(std::string(what) + ": invalid modality tag");
    return static_cast<Modality>(tag);
}

void write_whitening_payload(Writer& w, const WhiteningStats& stats) {
    w.u8(modality_tag(stats.modality));
    w.u32(static_cast<std::uint32_t>(stats.mu.size()));
    w.f64s(stats.mu.data(), stats.mu.size());
    w.f64s(stats.sigma.data(), stats.sigma.size());
}

WhiteningStats read_whitening_payload(Reader& r) {
    WhiteningStats stats;
    stats.modality = modality_from_tag(r.u8(), r.what);
    const std::uint32_t d = r.u32();
    stats.mu.resize(d);
    stats.sigma.resize(d);
    r.f64s(stats.mu.data(), d);
    r.f64s(stats.sigma.data(), d);
    return stats;
}

} // namespace

std::vector<std::uint8_t> serialize_pca(const PcaModel& model) {
    Writer w;
    w.magic("BFPC");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(model.dim()));
    w.u32(static_cast<std::uint32_t>(model.components()));
    w.f64(model.total_variance);
    w.f64s(model.mean.data(), model.mean.size());
    w.f64s(model.eigenvalues.data(), model.eigenvalues.size());
    w.f64s(model.basis.data(), static_cast<std::size_t>(model.dim()) * model.components());
    return std::move(w.bytes);
}

PcaModel deserialize_pca(std::span<const std::uint8_t> bytes) {
    Reader r{bytes, 0, "BFPC"};
    r.expect_magic("BFPC");
    r.expect_version();
    const std::uint32_t d = r.u32();
    const std::uint32_t k = r.u32();
    PcaModel model;
    model.total_variance = r.f64();
    model.mean.resize(d);
    r.f64s(model.mean.data(), d);
    model.eigenvalues.resize(k);
    r.f64s(model.eigenvalues.data(), k);
    model.basis = Matrix(static_cast<int>(d), static_cast<int>(k));
    r.f64s(model.basis.data(), static_cast<std::size_t>(d) * k);
    r.expect_end();
    return model;
}

std::vector<std::uint8_t> serialize_whitening(const WhiteningStats& stats) {
    Writer w;
    w.magic("BFWS");
    w.u32(kFormatVersion);
    write_whitening_payload(w, stats);
    return std::move(w.bytes);
}

WhiteningStats deserialize_whitening(std::span<const std::uint8_t> bytes) {
    Reader r{bytes, 0, "BFWS"};
    r.expect_magic("BFWS");
    r.expect_version();
    WhiteningStats stats = read_whitening_payload(r);
    r.expect_end();
    return stats;
}

std::vector<std::uint8_t> serialize_w2dpca(const W2dpcaModel& model) {
    Writer w;
    w.magic("BF2D");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(model.image_height()));
    w.u32(static_cast<std::uint32_t>(model.image_width()));
    w.u32(static_cast<std::uint32_t>(model.components()));
    w.f64s(model.mean_image.data(),
           static_cast<std::size_t>(model.image_height()) * model.image_width());
    w.f64s(model.eigenvalues.data(), model.eigenvalues.size());
    w.f64s(model.basis.data(), static_cast<std::size_t>(model.image_width()) * model.components());
    return std::move(w.bytes);
}

W2dpcaModel deserialize_w2dpca(std::span<const std::uint8_t> bytes) {
    Reader r{bytes, 0, "BF2D"};
    r.expect_magic("BF2D");
    r.expect_version();
    const std::uint32_t h = r.u32();
    const std::uint32_t width = r.u32();
    const std::uint32_t k = r.u32();
    W2dpcaModel model;
    model.mean_image = Matrix(static_cast<int>(h), static_cast<int>(width));
    r.f64s(model.mean_image.data(), static_cast<std::size_t>(h) * width);
    model.eigenvalues.resize(k);
    r.f64s(model.eigenvalues.data(), k);
    model.basis = Matrix(static_cast<int>(width), static_cast<int>(k));
    r.f64s(model.basis.data(), static_cast<std::size_t>(width) * k);
    r.expect_end();
    return model;
}

std::vector<std::uint8_t> serialize_store(const TemplateStore& store) {
    Writer w;
    w.magic("BFTS");
    w.u32(kFormatVersion);
    w.u8(store.metric() == Metric::euclidean ? 0 : 1);
    w.u8(store.stats() ? 1 : 0);
    if (store.stats()) write_whitening_payload(w, *store.stats());
    w.u64(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const FeatureVector& v = store.vector(i);
        w.str(store.subject(i));
        w.u8(modality_tag(v.modality));
        w.u32(static_cast<std::uint32_t>(v.values.size()));
        w.f64s(v.values.data(), v.values.size());
    }
    return std::move(w.bytes);
}

TemplateStore deserialize_store(std::span<const std::uint8_t> bytes) {
    Reader r{bytes, 0, "BFTS"};
    r.expect_magic("BFTS");
    r.expect_version();
    const std::uint8_t metric_tag = r.u8();
    if (metric_tag > 1) throw DataError("BFTS: invalid metric tag");
    const Metric metric = metric_tag == 0 ? Metric::euclidean : Metric::mahalanobis;
    std::optional<WhiteningStats> stats;
    if (r.u8() != 0) stats = read_whitening_payload(r);
    TemplateStore store(metric, std::move(stats));
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string subject = r.str();
        FeatureVector v;
        v.modality = modality_from_tag(r.u8(), r.what);
        const std::uint32_t d = r.u32();
        v.values.resize(d);
        r.f64s(v.values.data(), d);
        store.enroll(std::move(subject), std::move(v));
    }
    r.expect_end();
    return store;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
    write_file(path, serialize_pca(model));
}
PcaModel load_pca(const std::filesystem::path& path) { return deserialize_pca(read_file(path)); }

void save_whitening(const WhiteningStats& stats, const std::filesystem::path& path) {
    write_file(path, serialize_whitening(stats));
}
WhiteningStats load_whitening(const std::filesystem::path& path) {
    return deserialize_whitening(read_file(path));
}

void save_w2dpca(const W2dpcaModel& model, const std::filesystem::path& path) {
    write_file(path, serialize_w2dpca(model));
}
W2dpcaModel load_w2dpca(const std::filesystem::path& path) {
    return deserialize_w2dpca(read_file(path));
}

void save_store(const TemplateStore& store, const std::filesystem::path& path) {
    write_file(path, serialize_store(store));
}
TemplateStore load_store(const std::filesystem::path& path) {
    return deserialize_store(read_file(path));
}

} // namespace biofuse
