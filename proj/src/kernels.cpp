#include "scscl/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace scscl::kernels {

namespace {

// Stable softplus: log(1 + e^x).
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Stable logistic sigmoid 1 / (1 + e^-x).
inline double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double dot_seq(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

}  // namespace

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
    const std::size_t m = a.rows, k = a.cols, n = b.cols;
    out.rows = m;
    out.cols = n;
    out.data.assign(m * n, 0.0);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
                out(i, j) = acc;
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
                out(i, j) = acc;
            }
        }
    }
}

void gram_into(const Matrix& c, Matrix& out, Exec exec) {
    const std::size_t b = c.rows, d = c.cols;
    out.rows = b;
    out.cols = b;
    out.data.assign(b * b, 0.0);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t u = 0; u < static_cast<std::int64_t>(b); ++u)
            for (std::size_t v = 0; v < b; ++v)
                out(u, v) = dot_seq(c.row_ptr(u), c.row_ptr(v), d);
    } else {
        for (std::size_t u = 0; u < b; ++u)
            for (std::size_t v = 0; v < b; ++v)
                out(u, v) = dot_seq(c.row_ptr(u), c.row_ptr(v), d);
    }
}

void matmul_at_b_into(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
    const std::size_t m = a.cols, k = a.rows, n = b.cols;
    out.rows = m;
    out.cols = n;
    out.data.assign(m * n, 0.0);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += a(p, i) * b(p, j);
                out(i, j) = acc;
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += a(p, i) * b(p, j);
                out(i, j) = acc;
            }
        }
    }
}

void matmul_a_bt_into(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
    const std::size_t m = a.rows, k = a.cols, n = b.rows;
    out.rows = m;
    out.cols = n;
    out.data.assign(m * n, 0.0);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) = dot_seq(a.row_ptr(i), b.row_ptr(j), k);
    } else {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) = dot_seq(a.row_ptr(i), b.row_ptr(j), k);
    }
}

void sigmoid_pair_terms_into(const Matrix& r, const Matrix& zmat, double t, double bias,
                             bool include_diagonal, Matrix& loss_terms, Matrix& sigma_terms,
                             Exec exec) {
    const std::size_t b = r.rows;
    loss_terms.rows = sigma_terms.rows = b;
    loss_terms.cols = sigma_terms.cols = b;
    loss_terms.data.assign(b * b, 0.0);
    sigma_terms.data.assign(b * b, 0.0);
    auto body = [&](std::size_t u) {
        for (std::size_t v = 0; v < b; ++v) {
            if (!include_diagonal && u == v) continue;
            double x = zmat(u, v) * (-t * r(u, v) + bias);
            loss_terms(u, v) = softplus(x);
            sigma_terms(u, v) = logistic(x);
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t u = 0; u < static_cast<std::int64_t>(b); ++u) body(u);
    } else {
        for (std::size_t u = 0; u < b; ++u) body(u);
    }
}

double ordered_sum(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data) acc += v;
    return acc;
}

}  // namespace scscl::kernels
