#pragma once

#include "scscl/matrix.hpp"

// Data-parallel inner kernels. Every kernel has a serial reference and an
// OpenMP variant; both fill per-element buffers in the same layout and any
// final reduction runs sequentially over that buffer, so results are bitwise
// identical regardless of thread count. The serial variants stay in the build
// as the testing reference and as the baseline for bench_kernels.

namespace scscl::kernels {

enum class Exec { Serial, Parallel };

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out, Exec exec);

/// Gram matrix out[u][v] = row_u . row_v of c (B x D -> B x B).
void gram_into(const Matrix& c, Matrix& out, Exec exec);

/// out = a^T * b (used by backprop weight gradients).
void matmul_at_b_into(const Matrix& a, const Matrix& b, Matrix& out, Exec exec);

/// out = a * b^T.
void matmul_a_bt_into(const Matrix& a, const Matrix& b, Matrix& out, Exec exec);

/// Fill per-pair softplus(z_uv * (-t * r_uv + b)) values and the matching
/// logistic sigmoid (the derivative of softplus at the same argument).
/// `include_diagonal` zeroes the diagonal entries of both outputs.
void sigmoid_pair_terms_into(const Matrix& r, const Matrix& zmat, double t, double bias,
                             bool include_diagonal, Matrix& loss_terms, Matrix& sigma_terms,
                             Exec exec);

/// Sequential sum over the buffer in row-major order; the single reduction
/// point shared by the serial and parallel paths.
double ordered_sum(const Matrix& m);

}  // namespace scscl::kernels
