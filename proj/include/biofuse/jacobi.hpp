// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "biofuse/matrix.hpp"

namespace biofuse {

/// Eigenvalues descending; eigenvectors as matching columns, each with its
/// largest-magnitude entry made positive so decompositions are reproducible.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Converged when every
/// off-diagonal magnitude drops below 1e-10 times the Frobenius norm of the
/// input. Deterministic: fixed sweep order, no pivot heuristics.
SymmetricEigen jacobi_eigen(Matrix a);

} // namespace biofuse
