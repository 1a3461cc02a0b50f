#include "scscl/losses.hpp"

#include <algorithm>
#include <cmath>

#include "scscl/kernels.hpp"

namespace scscl {

namespace {

constexpr double kNormEps = 1e-12;
constexpr double kDistEps = 1e-12;

void check_batch(const EmbeddingBatch& batch) {
    if (batch.z.rows < 2) throw ConfigError("batch too small: need at least 2 rows");
    if (batch.z.rows != batch.labels.size())
        throw ConfigError("batch: label count does not match row count");
    if (batch.z.cols != batch.partition.d_total())
        throw ConfigError("batch: embedding width does not match partition");
    if (batch.partition.d_common < 1) throw ConfigError("partition: d_common must be >= 1");
}

// sum_i (1/|P(i)|) sum_{p in P(i)} ||s_i - s_p|| plus its gradient, without
// any beta or 1/B scaling (callers apply their own prefactor).
double style_distance_core(const Matrix& s, const std::vector<int>& labels, Matrix& grad) {
    const std::size_t b = s.rows, d = s.cols;
    grad.rows = b;
    grad.cols = d;
    grad.data.assign(b * d, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        std::size_t n_pos = 0;
        for (std::size_t p = 0; p < b; ++p)
            if (p != i && labels[p] == labels[i]) ++n_pos;
        if (n_pos == 0) continue;
        double inv = 1.0 / static_cast<double>(n_pos);
        for (std::size_t p = 0; p < b; ++p) {
            if (p == i || labels[p] != labels[i]) continue;
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                double diff = s(i, k) - s(p, k);
                sq += diff * diff;
            }
            double dist = std::sqrt(sq);
            total += inv * dist;
            if (dist < kDistEps) continue;  // subgradient 0 at the kink
            for (std::size_t k = 0; k < d; ++k) {
                double g = inv * (s(i, k) - s(p, k)) / dist;
                grad(i, k) += g;
                grad(p, k) -= g;
            }
        }
    }
    return total;
}

// grad_c = (G + G^T) C for r_uv = c_u . c_v (covers the diagonal r_uu too,
// where G_uu enters twice).
Matrix gram_backprop(const Matrix& g, const Matrix& c) {
    Matrix gs(g.rows, g.cols);
    for (std::size_t u = 0; u < g.rows; ++u)
        for (std::size_t v = 0; v < g.cols; ++v) gs(u, v) = g(u, v) + g(v, u);
    Matrix out;
    kernels::matmul_into(gs, c, out, kernels::Exec::Parallel);
    return out;
}

}  // namespace

double BoundaryParams::t() const { return std::exp(t_log); }

double FdReport::max_rel() const { return std::max({max_rel_z, max_rel_t_log, max_rel_b}); }

PairLabelMatrix build_pair_labels(const std::vector<int>& labels) {
    if (labels.size() < 2) throw ConfigError("build_pair_labels: need at least 2 labels");
    const std::size_t b = labels.size();
    PairLabelMatrix out;
    out.z = Matrix(b, b);
    for (std::size_t u = 0; u < b; ++u)
        for (std::size_t v = 0; v < b; ++v) out.z(u, v) = labels[u] == labels[v] ? 1.0 : -1.0;
    return out;
}

Matrix similarity_matrix(const Matrix& c) {
    Matrix out;
    kernels::gram_into(c, out, kernels::Exec::Parallel);
    return out;
}

double pair_loss_scalar(double r, int z, const BoundaryParams& params) {
    double x = static_cast<double>(z) * (-params.t() * r + params.b);
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

SigmoidPairResult sigmoid_pair_loss(const Matrix& r, const PairLabelMatrix& zmat,
                                    const BoundaryParams& params, bool include_diagonal) {
    const std::size_t b = r.rows;
    if (r.cols != b || zmat.z.rows != b || zmat.z.cols != b)
        throw ConfigError("sigmoid_pair_loss: r and pair labels must both be BxB");
    for (double v : r.data)
        if (!std::isfinite(v)) throw ConfigError("sigmoid_pair_loss: non-finite similarity");

    const double t = params.t();
    Matrix loss_terms, sigma_terms;
    kernels::sigmoid_pair_terms_into(r, zmat.z, t, params.b, include_diagonal, loss_terms,
                                     sigma_terms, kernels::Exec::Parallel);

    SigmoidPairResult out;
    const double inv_b2 = 1.0 / (static_cast<double>(b) * static_cast<double>(b));
    out.value = inv_b2 * kernels::ordered_sum(loss_terms);
    out.pair_count = include_diagonal ? b * b : b * b - b;

    out.grad_r = Matrix(b, b);
    double g_t = 0.0, g_b = 0.0;
    for (std::size_t u = 0; u < b; ++u) {
        for (std::size_t v = 0; v < b; ++v) {
            if (!include_diagonal && u == v) continue;
            double z = zmat.z(u, v);
            double sig = sigma_terms(u, v);
            // x = z(-t r + b), dx/dr = -z t, dx/dt_log = -z t r, dx/db = z
            out.grad_r(u, v) = inv_b2 * sig * (-z * t);
            g_t += sig * (-z * t * r(u, v));
            g_b += sig * z;
        }
    }
    out.grad_t_log = inv_b2 * g_t;
    out.grad_b = inv_b2 * g_b;
    return out;
}

StylePenaltyResult style_distance_penalty(const Matrix& s, const std::vector<int>& labels,
                                          double beta) {
    if (s.rows != labels.size())
        throw ConfigError("style_distance_penalty: label count does not match rows");
    if (beta < 0.0) throw ConfigError("style_distance_penalty: beta must be >= 0");
    StylePenaltyResult out;
    out.grad_s = Matrix(s.rows, s.cols);
    if (beta == 0.0 || s.cols == 0) return out;
    Matrix grad_core;
    double core = style_distance_core(s, labels, grad_core);
    double scale = -beta / static_cast<double>(s.rows);
    out.value = scale * core;
    for (std::size_t i = 0; i < grad_core.data.size(); ++i)
        out.grad_s.data[i] = scale * grad_core.data[i];
    return out;
}

void normalize_field(Matrix& z, std::size_t c0, std::size_t c1, FieldNormCache& cache,
                     double eps) {
    cache.norms.assign(z.rows, 0.0);
    cache.degenerate.assign(z.rows, 0);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double sq = 0.0;
        for (std::size_t j = c0; j < c1; ++j) sq += z(i, j) * z(i, j);
        double norm = std::sqrt(sq);
        cache.norms[i] = norm;
        if (norm < eps) {
            cache.degenerate[i] = 1;
            continue;
        }
        for (std::size_t j = c0; j < c1; ++j) z(i, j) /= norm;
    }
}

void backprop_field_norm(const Matrix& raw, std::size_t c0, std::size_t c1,
                         const FieldNormCache& cache, Matrix& grad) {
    for (std::size_t i = 0; i < raw.rows; ++i) {
        if (cache.degenerate[i]) continue;  // pass-through rows have identity Jacobian
        double norm = cache.norms[i];
        double dot = 0.0;
        for (std::size_t j = c0; j < c1; ++j) dot += grad(i, j) * raw(i, j) / norm;
        for (std::size_t j = c0; j < c1; ++j)
            grad(i, j) = (grad(i, j) - dot * raw(i, j) / norm) / norm;
    }
}

LossOutput scs_supcon_loss(const EmbeddingBatch& batch, const BoundaryParams& params,
                           const ScalarHypers& hypers, bool include_diagonal) {
    check_batch(batch);
    const std::size_t b = batch.z.rows;
    const std::size_t dc = batch.partition.d_common;
    const std::size_t dp = batch.partition.d_total();

    Matrix zn = batch.z;
    FieldNormCache cache_c, cache_s;
    normalize_field(zn, 0, dc, cache_c, kNormEps);
    if (dc < dp) normalize_field(zn, dc, dp, cache_s, kNormEps);

    Matrix common(b, dc), style(b, dp - dc);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < dc; ++j) common(i, j) = zn(i, j);
        for (std::size_t j = dc; j < dp; ++j) style(i, j - dc) = zn(i, j);
    }

    PairLabelMatrix zmat = build_pair_labels(batch.labels);
    Matrix r = similarity_matrix(common);
    SigmoidPairResult sig = sigmoid_pair_loss(r, zmat, params, include_diagonal);
    StylePenaltyResult sty = style_distance_penalty(style, batch.labels, hypers.beta);

    LossOutput out;
    out.value = sig.value + sty.value;
    out.grad_t_log = sig.grad_t_log;
    out.grad_b = sig.grad_b;
    out.pair_count = sig.pair_count;

    Matrix grad_common = gram_backprop(sig.grad_r, common);
    out.grad_z = Matrix(b, dp);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < dc; ++j) out.grad_z(i, j) = grad_common(i, j);
        for (std::size_t j = dc; j < dp; ++j) out.grad_z(i, j) = sty.grad_s(i, j - dc);
    }
    backprop_field_norm(batch.z, 0, dc, cache_c, out.grad_z);
    if (dc < dp) backprop_field_norm(batch.z, dc, dp, cache_s, out.grad_z);
    return out;
}

LossOutput cs_supcon_loss(const EmbeddingBatch& batch, const ScalarHypers& hypers,
                          bool error_on_no_positive) {
    check_batch(batch);
    if (hypers.tau <= 0.0) throw ConfigError("cs_supcon_loss: tau must be > 0");
    const std::size_t b = batch.z.rows;
    const std::size_t dc = batch.partition.d_common;
    const std::size_t dp = batch.partition.d_total();
    const std::size_t ds = dp - dc;
    const double tau = hypers.tau;

    Matrix zn = batch.z;
    FieldNormCache cache_c, cache_s;
    normalize_field(zn, 0, dc, cache_c, kNormEps);
    if (ds > 0) normalize_field(zn, dc, dp, cache_s, kNormEps);

    Matrix common(b, dc), style(b, ds);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < dc; ++j) common(i, j) = zn(i, j);
        for (std::size_t j = dc; j < dp; ++j) style(i, j - dc) = zn(i, j);
    }

    Matrix rc = similarity_matrix(common);
    Matrix rs;
    const bool use_style_softmax = hypers.alpha != 0.0 && ds > 0;
    if (use_style_softmax) rs = similarity_matrix(style);

    LossOutput out;
    Matrix gc(b, b);  // dL/d r_c, anchors as rows
    Matrix gs_sim(b, b);

    std::vector<double> w(b);
    for (std::size_t i = 0; i < b; ++i) {
        std::vector<std::size_t> pos;
        for (std::size_t p = 0; p < b; ++p)
            if (p != i && batch.labels[p] == batch.labels[i]) pos.push_back(p);
        if (pos.empty()) {
            if (error_on_no_positive)
                throw ConfigError("cs_supcon_loss: anchor " + std::to_string(i) +
                                  " has no positive");
            ++out.skipped_anchors;
            continue;
        }
        const double inv_p = 1.0 / static_cast<double>(pos.size());

        // Common InfoNCE: sum_p (1/|P|)(-r_ip/tau + logsumexp_{j!=i} r_ij/tau)
        double mx = -1e300;
        for (std::size_t j = 0; j < b; ++j)
            if (j != i) mx = std::max(mx, rc(i, j) / tau);
        double denom = 0.0;
        for (std::size_t j = 0; j < b; ++j)
            if (j != i) denom += std::exp(rc(i, j) / tau - mx);
        double lse = mx + std::log(denom);
        double pos_mean = 0.0;
        for (std::size_t p : pos) pos_mean += rc(i, p);
        pos_mean *= inv_p;
        out.value += -pos_mean / tau + lse;
        for (std::size_t j = 0; j < b; ++j) {
            if (j == i) continue;
            double wj = std::exp(rc(i, j) / tau - lse);
            gc(i, j) += wj / tau;
        }
        for (std::size_t p : pos) gc(i, p) -= inv_p / tau;

        // Style log-softmax: +alpha [ (1/|P|) sum_p r_ip/tau - logsumexp ]
        if (use_style_softmax) {
            double mxs = -1e300;
            for (std::size_t j = 0; j < b; ++j)
                if (j != i) mxs = std::max(mxs, rs(i, j) / tau);
            double denoms = 0.0;
            for (std::size_t j = 0; j < b; ++j)
                if (j != i) denoms += std::exp(rs(i, j) / tau - mxs);
            double lses = mxs + std::log(denoms);
            double pos_mean_s = 0.0;
            for (std::size_t p : pos) pos_mean_s += rs(i, p);
            pos_mean_s *= inv_p;
            out.value += hypers.alpha * (pos_mean_s / tau - lses);
            for (std::size_t j = 0; j < b; ++j) {
                if (j == i) continue;
                double wj = std::exp(rs(i, j) / tau - lses);
                gs_sim(i, j) -= hypers.alpha * wj / tau;
            }
            for (std::size_t p : pos) gs_sim(i, p) += hypers.alpha * inv_p / tau;
        }
    }

    Matrix grad_common = gram_backprop(gc, common);
    Matrix grad_style(b, ds);
    if (use_style_softmax) grad_style = gram_backprop(gs_sim, style);

    // Style distance, unaveraged form: -beta sum_i (1/|P|) sum_p ||s_i - s_p||
    if (hypers.beta != 0.0 && ds > 0) {
        Matrix grad_core;
        double core = style_distance_core(style, batch.labels, grad_core);
        out.value -= hypers.beta * core;
        for (std::size_t i = 0; i < grad_style.data.size(); ++i)
            grad_style.data[i] -= hypers.beta * grad_core.data[i];
    }

    out.grad_z = Matrix(b, dp);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < dc; ++j) out.grad_z(i, j) = grad_common(i, j);
        for (std::size_t j = dc; j < dp; ++j) out.grad_z(i, j) = grad_style(i, j - dc);
    }
    backprop_field_norm(batch.z, 0, dc, cache_c, out.grad_z);
    if (ds > 0) backprop_field_norm(batch.z, dc, dp, cache_s, out.grad_z);
    return out;
}

LossOutput supcon_loss(const Matrix& z_full_as_common, const std::vector<int>& labels,
                       double tau) {
    EmbeddingBatch batch;
    batch.z = z_full_as_common;
    batch.labels = labels;
    batch.partition = FieldPartition{z_full_as_common.cols, 0};
    ScalarHypers hypers;
    hypers.tau = tau;
    hypers.alpha = 0.0;
    hypers.beta = 0.0;
    return cs_supcon_loss(batch, hypers);
}

LossOutput cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    if (logits.rows == 0 || logits.rows != labels.size())
        throw ConfigError("cross_entropy: label count does not match rows");
    const std::size_t b = logits.rows, c = logits.cols;
    LossOutput out;
    out.grad_z = Matrix(b, c);
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t i = 0; i < b; ++i) {
        int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw ConfigError("cross_entropy: label " + std::to_string(y) + " out of range");
        double mx = logits(i, 0);
        for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, logits(i, k));
        double denom = 0.0;
        for (std::size_t k = 0; k < c; ++k) denom += std::exp(logits(i, k) - mx);
        double lse = mx + std::log(denom);
        out.value += inv_b * (lse - logits(i, y));
        for (std::size_t k = 0; k < c; ++k) {
            double p = std::exp(logits(i, k) - lse);
            out.grad_z(i, k) = inv_b * (p - (static_cast<int>(k) == y ? 1.0 : 0.0));
        }
    }
    return out;
}

FdReport finite_difference_check(const LossClosure& loss_fn, const LossOutput& analytic,
                                 const Matrix& z, const BoundaryParams& params, double h) {
    if (h < 1e-8 || h > 1e-4)
        throw ConfigError("finite_difference_check: h must be in [1e-8, 1e-4]");
    auto rel = [](double a, double n) {
        return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
    };
    FdReport rep;
    Matrix zp = z;
    double diff_sq = 0.0, a_sq = 0.0, n_sq = 0.0;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        double orig = zp.data[i];
        zp.data[i] = orig + h;
        double up = loss_fn(zp, params.t_log, params.b);
        zp.data[i] = orig - h;
        double dn = loss_fn(zp, params.t_log, params.b);
        zp.data[i] = orig;
        double numeric = (up - dn) / (2 * h);
        double a = analytic.grad_z.data[i];
        diff_sq += (a - numeric) * (a - numeric);
        a_sq += a * a;
        n_sq += numeric * numeric;
    }
    rep.max_rel_z = std::sqrt(diff_sq) /
                    std::max({std::sqrt(a_sq), std::sqrt(n_sq), 1e-8});
    {
        double up = loss_fn(z, params.t_log + h, params.b);
        double dn = loss_fn(z, params.t_log - h, params.b);
        rep.max_rel_t_log = rel(analytic.grad_t_log, (up - dn) / (2 * h));
    }
    {
        double up = loss_fn(z, params.t_log, params.b + h);
        double dn = loss_fn(z, params.t_log, params.b - h);
        rep.max_rel_b = rel(analytic.grad_b, (up - dn) / (2 * h));
    }
    return rep;
}

}  // namespace scscl
