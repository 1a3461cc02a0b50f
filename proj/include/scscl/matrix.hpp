#pragma once

#include <cstddef>
#include <vector>

#include "scscl/errors.hpp"

namespace scscl {

/// Dense row-major matrix of doubles. The one container every module shares.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// Matrix product with a fixed per-entry accumulation order (k ascending),
/// so serial and parallel builds agree bitwise.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

struct NormalizeResult {
    Matrix m;
    // Rows whose norm fell below eps are passed through unchanged and listed here.
    std::vector<std::size_t> degenerate_rows;
};

/// L2-normalize each row; near-zero rows are returned unchanged and flagged.
NormalizeResult l2_normalize_rows(const Matrix& m, double eps = 1e-12);

}  // namespace scscl
