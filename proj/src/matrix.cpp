#include "scscl/matrix.hpp"

#include <cmath>

#include "scscl/kernels.hpp"

namespace scscl {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ConfigError("matmul: shape mismatch (" + std::to_string(a.rows) + "x" +
                          std::to_string(a.cols) + " times " + std::to_string(b.rows) + "x" +
                          std::to_string(b.cols) + ")");
    Matrix out;
    kernels::matmul_into(a, b, out, kernels::Exec::Parallel);
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

NormalizeResult l2_normalize_rows(const Matrix& m, double eps) {
    if (m.cols == 0) throw ConfigError("l2_normalize_rows: matrix has no columns");
    NormalizeResult res;
    res.m = m;
    for (std::size_t i = 0; i < m.rows; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) sq += m(i, j) * m(i, j);
        double norm = std::sqrt(sq);
        if (norm < eps) {
            res.degenerate_rows.push_back(i);
            continue;
        }
        for (std::size_t j = 0; j < m.cols; ++j) res.m(i, j) = m(i, j) / norm;
    }
    return res;
}

}  // namespace scscl
