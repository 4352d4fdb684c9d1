// SPDX-License-Identifier: Apache-2.0
#include "biofuse/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>

#include "biofuse/errors.hpp"
#include "biofuse/evaluate.hpp"  // format_double

extern char** environ;

namespace biofuse {

std::string to_string(Extractor e) {
    switch (e) {
        case Extractor::gabor: return "gabor";
        case Extractor::pixels: return "pixels";
        case Extractor::w2dpca: return "w2dpca";
    }
    return "gabor";
}

Extractor extractor_from_string(const std::string& s) {
    if (s == "gabor") return Extractor::gabor;
    if (s == "pixels") return Extractor::pixels;
    if (s == "w2dpca") return Extractor::w2dpca;
    throw ConfigError("unknown extractor \"" + s + "\" (expected gabor, pixels, or w2dpca)");
}

std::string to_string(PairingMode m) {
    return m == PairingMode::modulo ? "modulo" : "shuffled";
}

PairingMode pairing_mode_from_string(const std::string& s) {
    if (s == "modulo") return PairingMode::modulo;
    if (s == "shuffled") return PairingMode::shuffled;
    throw ConfigError("unknown pairing mode \"" + s + "\" (expected modulo or shuffled)");
}

std::string fnv1a_hex(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

namespace {

int parse_int(const std::string& key, const std::string& value, int min_value) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(key + ": \"" + value + "\" is not an integer");
    if (v < min_value)
        throw ConfigError(key + ": " + value + " is below the minimum " + std::to_string(min_value));
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(key + ": \"" + value + "\" is not an unsigned integer");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(key + ": \"" + value + "\" is not a number");
    return v;
}

double parse_positive(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (!(v > 0.0)) throw ConfigError(key + ": " + value + " must be positive");
    return v;
}

struct KeyEntry {
    const char* key;
    const char* description;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
};

// One row per config key; config_to_map, config_set, the env overrides, and
// --help all read from this table so they cannot drift apart.
const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = {
        {"bank.gamma", "Gabor spatial aspect ratio",
         [](const PipelineConfig& c) { return format_double(c.bank.gamma); },
         [](PipelineConfig& c, const std::string& v) { c.bank.gamma = parse_positive("bank.gamma", v); }},
        {"bank.kernel_radius_cap", "max kernel radius in pixels",
         [](const PipelineConfig& c) { return std::to_string(c.bank.kernel_radius_cap); },
         [](PipelineConfig& c, const std::string& v) { c.bank.kernel_radius_cap = parse_int("bank.kernel_radius_cap", v, 1); }},
        {"bank.lambda0", "base wavelength in pixels",
         [](const PipelineConfig& c) { return format_double(c.bank.lambda0); },
         [](PipelineConfig& c, const std::string& v) { c.bank.lambda0 = parse_positive("bank.lambda0", v); }},
        {"bank.lambda_ratio", "wavelength ratio between scales",
         [](const PipelineConfig& c) { return format_double(c.bank.lambda_ratio); },
         [](PipelineConfig& c, const std::string& v) { c.bank.lambda_ratio = parse_positive("bank.lambda_ratio", v); }},
        {"bank.orientations", "orientation count of the bank",
         [](const PipelineConfig& c) { return std::to_string(c.bank.orientations); },
         [](PipelineConfig& c, const std::string& v) { c.bank.orientations = parse_int("bank.orientations", v, 1); }},
        {"bank.scales", "scale count of the bank",
         [](const PipelineConfig& c) { return std::to_string(c.bank.scales); },
         [](PipelineConfig& c, const std::string& v) { c.bank.scales = parse_int("bank.scales", v, 1); }},
        {"bank.sigma_over_lambda", "envelope width as a fraction of wavelength",
         [](const PipelineConfig& c) { return format_double(c.bank.sigma_over_lambda); },
         [](PipelineConfig& c, const std::string& v) { c.bank.sigma_over_lambda = parse_positive("bank.sigma_over_lambda", v); }},
        {"dataset.face_layout", "face dataset layout: orl or flat",
         [](const PipelineConfig& c) { return to_string(c.face_layout); },
         [](PipelineConfig& c, const std::string& v) { c.face_layout = layout_from_string(v); }},
        {"dataset.face_root", "face dataset directory",
         [](const PipelineConfig& c) { return c.face_root; },
         [](PipelineConfig& c, const std::string& v) { c.face_root = v; }},
        {"dataset.fingerprint_layout", "fingerprint dataset layout: orl or flat",
         [](const PipelineConfig& c) { return to_string(c.fingerprint_layout); },
         [](PipelineConfig& c, const std::string& v) { c.fingerprint_layout = layout_from_string(v); }},
        {"dataset.fingerprint_root", "fingerprint dataset directory",
         [](const PipelineConfig& c) { return c.fingerprint_root; },
         [](PipelineConfig& c, const std::string& v) { c.fingerprint_root = v; }},
        {"downsample.factor", "feature map reduction factor (perfect square)",
         [](const PipelineConfig& c) { return std::to_string(c.downsample_factor); },
         [](PipelineConfig& c, const std::string& v) { c.downsample_factor = parse_int("downsample.factor", v, 1); }},
        {"fusion.sigma_floor", "minimum per-component sigma for whitening",
         [](const PipelineConfig& c) { return format_double(c.sigma_floor); },
         [](PipelineConfig& c, const std::string& v) { c.sigma_floor = parse_positive("fusion.sigma_floor", v); }},
        {"fusion.tanh_c", "tanh normalization scale",
         [](const PipelineConfig& c) { return format_double(c.tanh_c); },
         [](PipelineConfig& c, const std::string& v) { c.tanh_c = parse_positive("fusion.tanh_c", v); }},
        {"image.height", "working image height in pixels",
         [](const PipelineConfig& c) { return std::to_string(c.image_height); },
         [](PipelineConfig& c, const std::string& v) { c.image_height = parse_int("image.height", v, 1); }},
        {"image.width", "working image width in pixels",
         [](const PipelineConfig& c) { return std::to_string(c.image_width); },
         [](PipelineConfig& c, const std::string& v) { c.image_width = parse_int("image.width", v, 1); }},
        {"match.knn", "neighbor count for classification",
         [](const PipelineConfig& c) { return std::to_string(c.knn); },
         [](PipelineConfig& c, const std::string& v) { c.knn = parse_int("match.knn", v, 1); }},
        {"metric", "matching distance: euclidean or mahalanobis",
         [](const PipelineConfig& c) { return to_string(c.metric); },
         [](PipelineConfig& c, const std::string& v) { c.metric = metric_from_string(v); }},
        {"output.models_dir", "directory for fitted model files",
         [](const PipelineConfig& c) { return c.models_dir; },
         [](PipelineConfig& c, const std::string& v) { c.models_dir = v; }},
        {"output.report_csv", "evaluation report CSV path",
         [](const PipelineConfig& c) { return c.report_csv; },
         [](PipelineConfig& c, const std::string& v) { c.report_csv = v; }},
        {"output.report_json", "evaluation report JSON path",
         [](const PipelineConfig& c) { return c.report_json; },
         [](PipelineConfig& c, const std::string& v) { c.report_json = v; }},
        {"output.store", "template store path",
         [](const PipelineConfig& c) { return c.store_path; },
         [](PipelineConfig& c, const std::string& v) { c.store_path = v; }},
        {"pairing.mode", "chimeric pairing: modulo or shuffled",
         [](const PipelineConfig& c) { return to_string(c.pairing_mode); },
         [](PipelineConfig& c, const std::string& v) { c.pairing_mode = pairing_mode_from_string(v); }},
        {"pairing.seed", "seed for shuffled pairing",
         [](const PipelineConfig& c) { return std::to_string(c.pairing_seed); },
         [](PipelineConfig& c, const std::string& v) { c.pairing_seed = parse_u64("pairing.seed", v); }},
        {"pca.components", "PCA components to keep (0 = use variance_fraction)",
         [](const PipelineConfig& c) { return std::to_string(c.pca_components); },
         [](PipelineConfig& c, const std::string& v) { c.pca_components = parse_int("pca.components", v, 0); }},
        {"pca.variance_fraction", "cumulative variance target when components = 0",
         [](const PipelineConfig& c) { return format_double(c.pca_variance_fraction); },
         [](PipelineConfig& c, const std::string& v) {
             const double f = parse_double("pca.variance_fraction", v);
             if (!(f > 0.0) || f > 1.0)
                 throw ConfigError("pca.variance_fraction: " + v + " must be in (0, 1]");
             c.pca_variance_fraction = f;
         }},
        {"pipeline.extractor", "feature extractor: gabor, pixels, or w2dpca",
         [](const PipelineConfig& c) { return to_string(c.extractor); },
         [](PipelineConfig& c, const std::string& v) { c.extractor = extractor_from_string(v); }},
        {"split.train_count", "training samples per subject (0 = ceil(half))",
         [](const PipelineConfig& c) { return std::to_string(c.train_count); },
         [](PipelineConfig& c, const std::string& v) { c.train_count = parse_int("split.train_count", v, 0); }},
        {"threads", "worker thread cap (never changes results)",
         [](const PipelineConfig& c) { return std::to_string(c.threads); },
         [](PipelineConfig& c, const std::string& v) { c.threads = parse_int("threads", v, 1); }},
        {"w2dpca.components", "weighted-2DPCA column components",
         [](const PipelineConfig& c) { return std::to_string(c.w2dpca_components); },
         [](PipelineConfig& c, const std::string& v) { c.w2dpca_components = parse_int("w2dpca.components", v, 1); }},
    };
    return table;
}

const KeyEntry* find_key(const std::string& key) {
    for (const auto& entry : key_table())
        if (key == entry.key) return &entry;
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string env_name_for(const std::string& key) {
    std::string name = "BIOFUSE_OPT_";
    for (char c : key)
        name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

} // namespace

std::map<std::string, std::string> config_to_map(const PipelineConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& entry : key_table()) out[entry.key] = entry.get(cfg);
    return out;
}

void config_set(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    const KeyEntry* entry = find_key(key);
    if (!entry) throw ConfigError("unknown config key \"" + key + "\"");
    entry->set(cfg, value);
}

PipelineConfig parse_config_text(const std::string& text, PipelineConfig base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value, got \"" + line + "\"");
        try {
            config_set(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config_text(buf.str(), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_env_overrides(PipelineConfig& cfg) {
    std::map<std::string, const KeyEntry*> by_env;
    for (const auto& entry : key_table()) by_env[env_name_for(entry.key)] = &entry;

    for (char** env = environ; env && *env; ++env) {
        const std::string var(*env);
        if (var.rfind("BIOFUSE_OPT_", 0) != 0) continue;
        const auto eq = var.find('=');
        const std::string name = var.substr(0, eq == std::string::npos ? var.size() : eq);
        const auto it = by_env.find(name);
        if (it == by_env.end())
            throw ConfigError("environment variable " + name + " does not match any config key");
        it->second->set(cfg, eq == std::string::npos ? "" : var.substr(eq + 1));
    }
}

std::string config_digest(const PipelineConfig& cfg) {
    std::string dump;
    for (const auto& [key, value] : config_to_map(cfg)) {
        dump += key;
        dump += '=';
        dump += value;
        dump += '\n';
    }
    return fnv1a_hex(dump.data(), dump.size());
}

std::string config_help_text() {
    PipelineConfig defaults;
    std::size_t key_width = 0, value_width = 0;
    for (const auto& entry : key_table()) {
        key_width = std::max(key_width, std::string(entry.key).size());
        value_width = std::max(value_width, entry.get(defaults).size());
    }
    std::string out = "Config keys (default, description); settable via --config file,\n"
                      "BIOFUSE_OPT_<KEY> environment variables, or --set key=value:\n";
    for (const auto& entry : key_table()) {
        std::string key = entry.key;
        key.resize(key_width + 2, ' ');
        std::string value = entry.get(defaults);
        if (value.empty()) value = "(empty)";
        value.resize(std::max(value_width, std::size_t(7)) + 2, ' ');
        out += "  " + key + value + entry.description + "\n";
    }
    return out;
}

} // namespace biofuse
