// SPDX-License-Identifier: Apache-2.0
#include "biofuse/features.hpp"

#include <cmath>

namespace biofuse {

std::string to_string(Modality m) {
    switch (m) {
        case Modality::face: return "face";
        case Modality::fingerprint: return "fingerprint";
        case Modality::fused: return "fused";
    }
    return "face";
}

Modality modality_from_string(const std::string& s) {
    if (s == "face") return Modality::face;
    if (s == "fingerprint") return Modality::fingerprint;
    if (s == "fused") return Modality::fused;
    throw ConfigError("unknown modality \"" + s + "\" (expected face, fingerprint or fused)");
}

void require_finite(const FeatureVector& v, const char* context) {
    for (double x : v.values)
        if (!std::isfinite(x))
            throw DataError(std::string(context) + ": feature vector has a non-finite component");
}

} // namespace biofuse
