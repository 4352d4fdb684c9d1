// SPDX-License-Identifier: Apache-2.0
#include "biofuse/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace biofuse {

namespace {

// Largest off-diagonal magnitude.
double max_offdiag(const Matrix& a) {
    double m = 0.0;
    for (int p = 0; p < a.rows(); ++p)
        for (int q = p + 1; q < a.cols(); ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
}

} // namespace

SymmetricEigen jacobi_eigen(Matrix a) {
    if (a.rows() != a.cols()) throw DataError("jacobi_eigen requires a square matrix");
    const int n = a.rows();
    Matrix v = Matrix::identity(n);
    if (n == 0) return {std::vector<double>{}, v};

    const double threshold = 1e-10 * frobenius_norm(a);
    constexpr int max_sweeps = 100;

    for (int sweep = 0; sweep < max_sweeps && max_offdiag(a) > threshold; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= threshold) continue;

                // Rotation angle from the stable tangent formula.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (theta >= 0)
                    t = 1.0 / (theta + std::sqrt(1.0 + theta * theta));
                else
                    t = -1.0 / (-theta + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a(p, p);
                const double aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(p, i) = a(i, p);
                    a(i, q) = s * aip + c * aiq;
                    a(q, i) = a(i, q);
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    if (max_offdiag(a) > threshold)
        throw DataError("jacobi_eigen failed to converge");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    SymmetricEigen result;
    result.values.resize(n);
    result.vectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        result.values[k] = a(src, src);
        // Reproducible sign: largest-magnitude entry positive.
        int arg = 0;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            const double mag = std::abs(v(i, src));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = v(arg, src) < 0 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) result.vectors(i, k) = sign * v(i, src);
    }
    return result;
}

} // namespace biofuse
