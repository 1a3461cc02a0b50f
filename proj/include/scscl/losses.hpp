#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "scscl/matrix.hpp"

namespace scscl {

/// Contiguous split of a projected embedding into a class-relevant common
/// field (columns [0, d_common)) and a nuisance style field.
struct FieldPartition {
    std::size_t d_common = 192;
    std::size_t d_style = 64;

    std::size_t d_total() const { return d_common + d_style; }
};

/// A batch of projected embeddings with per-row class labels.
struct EmbeddingBatch {
    Matrix z;  // B x D_p, raw (losses normalize each field internally)
    std::vector<int> labels;
    FieldPartition partition;
};

/// B x B matrix of pair indicators: +1 same class, -1 different class.
struct PairLabelMatrix {
    Matrix z;
};

/// The two learnable decision-boundary scalars. The temperature is stored as
/// its log so t = exp(t_log) stays positive under unconstrained updates.
struct BoundaryParams {
    double t_log = 0.0;
    double b = 0.0;

    double t() const;
};

struct ScalarHypers {
    double tau = 0.1;    // InfoNCE temperature
    double alpha = 0.1;  // style log-softmax weight (CS-SupCon)
    double beta = 1e-3;  // style-distance weight
};

struct LossOutput {
    double value = 0.0;
    Matrix grad_z;  // B x D_p; w.r.t. the raw batch embedding
    double grad_t_log = 0.0;
    double grad_b = 0.0;
    std::size_t pair_count = 0;       // pairs touched by the sigmoid term
    std::size_t skipped_anchors = 0;  // anchors with no positive (InfoNCE family)
};

PairLabelMatrix build_pair_labels(const std::vector<int>& labels);

/// Gram matrix of common rows: r_uv = c_u . c_v.
Matrix similarity_matrix(const Matrix& c);

struct SigmoidPairResult {
    double value = 0.0;
    Matrix grad_r;  // B x B
    double grad_t_log = 0.0;
    double grad_b = 0.0;
    std::size_t pair_count = 0;
};

/// Averaged per-pair logistic loss (1/B^2) sum softplus(z_uv(-t r_uv + b)).
/// The denominator stays B^2 when the diagonal is excluded; only the summed
/// terms change.
SigmoidPairResult sigmoid_pair_loss(const Matrix& r, const PairLabelMatrix& zmat,
                                    const BoundaryParams& params, bool include_diagonal = true);

/// Loss of one pair at similarity r with indicator z in {+1, -1}.
double pair_loss_scalar(double r, int z, const BoundaryParams& params);

struct StylePenaltyResult {
    double value = 0.0;
    Matrix grad_s;  // B x D_s
};

/// -(beta/B) sum_i (1/|P(i)|) sum_{p in P(i)} ||s_i - s_p||. Anchors with no
/// positive contribute 0. Pairs closer than 1e-12 get a zero (sub)gradient.
StylePenaltyResult style_distance_penalty(const Matrix& s, const std::vector<int>& labels,
                                          double beta);

LossOutput scs_supcon_loss(const EmbeddingBatch& batch, const BoundaryParams& params,
                           const ScalarHypers& hypers, bool include_diagonal = true);

LossOutput cs_supcon_loss(const EmbeddingBatch& batch, const ScalarHypers& hypers,
                          bool error_on_no_positive = false);

LossOutput supcon_loss(const Matrix& z_full_as_common, const std::vector<int>& labels, double tau);

LossOutput cross_entropy(const Matrix& logits, const std::vector<int>& labels);

/// Loss as a function of (raw embedding, t_log, b); the interface the
/// finite-difference check perturbs.
using LossClosure = std::function<double(const Matrix& z, double t_log, double b)>;

struct FdReport {
    double max_rel_z = 0.0;
    double max_rel_t_log = 0.0;
    double max_rel_b = 0.0;

    double max_rel() const;
};

/// Central differences over every coordinate of z plus t_log and b, compared
/// against the supplied analytic gradients. Each parameter's relative error
/// uses the denominator max(|analytic|, |numeric|, 1e-8); for z the magnitudes
/// are gradient-vector norms, which keeps the measure meaningful on
/// coordinates whose true gradient sits below the finite-difference noise
/// floor.
FdReport finite_difference_check(const LossClosure& loss_fn, const LossOutput& analytic,
                                 const Matrix& z, const BoundaryParams& params, double h = 1e-6);

// Per-field normalization shared with the model stack: rows of columns
// [c0, c1) are scaled to unit norm unless shorter than eps (then passed
// through). The Jacobian of x -> x/||x|| is used to pull gradients back.
struct FieldNormCache {
    std::vector<double> norms;       // per row
    std::vector<char> degenerate;    // per row
};

void normalize_field(Matrix& z, std::size_t c0, std::size_t c1, FieldNormCache& cache,
                     double eps = 1e-12);

/// Pull a gradient w.r.t. the normalized field back to the raw field.
/// `raw` holds pre-normalization values; grad is rewritten in place.
void backprop_field_norm(const Matrix& raw, std::size_t c0, std::size_t c1,
                         const FieldNormCache& cache, Matrix& grad);

}  // namespace scscl
