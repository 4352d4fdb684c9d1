// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "biofuse/errors.hpp"

namespace biofuse {

/// Dense row-major matrix of doubles. Just enough linear algebra for the
/// pipeline; nothing clever.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw DataError("matrix dimensions must be nonnegative");
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
    double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }

    bool operator==(const Matrix&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DataError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int k = 0; k < a.cols(); ++k) {
            const double av = a(r, k);
            if (av == 0.0) continue;
            const double* brow = b.row(k);
            double* orow = out.row(r);
            for (int c = 0; c < b.cols(); ++c) orow[c] += av * brow[c];
        }
    }
    return out;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    const double* p = a.data();
    const std::size_t n = static_cast<std::size_t>(a.rows()) * a.cols();
    for (std::size_t i = 0; i < n; ++i) s += p[i] * p[i];
    return std::sqrt(s);
}

} // namespace biofuse
