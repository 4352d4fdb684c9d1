// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "biofuse/errors.hpp"

namespace biofuse {

enum class Modality { face, fingerprint, fused };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

/// Real-valued descriptor carried through extraction, reduction and fusion.
struct FeatureVector {
    Modality modality = Modality::face;
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }
};

/// Throws DataError if any component is NaN or infinite.
void require_finite(const FeatureVector& v, const char* context);

} // namespace biofuse
