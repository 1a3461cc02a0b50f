#include "scscl/training.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <map>

namespace scscl {

namespace {

constexpr double kDivergenceLimit = 1e6;

struct Velocity {
    MlpParams encoder;
    MlpParams projection;
    double t_log = 0.0;
    double b = 0.0;
};

MlpParams zeros_like(const MlpParams& mlp) {
    MlpParams z;
    for (const auto& l : mlp.layers) {
        DenseLayer zl;
        zl.w = Matrix(l.w.rows, l.w.cols);
        zl.bias.assign(l.bias.size(), 0.0);
        z.layers.push_back(std::move(zl));
    }
    return z;
}

void step_mlp(MlpParams& params, const MlpParams& grads, MlpParams& velocity, double lr,
              double momentum, double weight_decay) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        sgd_momentum_step(params.layers[l].w.data, grads.layers[l].w.data,
                          velocity.layers[l].w.data, lr, momentum, weight_decay);
        sgd_momentum_step(params.layers[l].bias, grads.layers[l].bias, velocity.layers[l].bias,
                          lr, momentum, weight_decay);
    }
}

void step_scalar(double& p, double g, double& v, double lr, double momentum) {
    v = momentum * v + g;  // boundary scalars are never weight-decayed
    p -= lr * v;
}

// Batches of sample indices. With V >= 2 views every sample carries its own
// positive, so a plain shuffled chunking suffices; with V == 1 batches are
// assembled from shuffled same-class pairs so P(i) stays non-empty.
std::vector<std::vector<std::size_t>> make_batches(const Dataset& dataset,
                                                   const std::vector<std::size_t>& pool,
                                                   std::size_t batch_size,
                                                   std::size_t views_per_sample, SeededRng& rng) {
    std::vector<std::vector<std::size_t>> batches;
    if (views_per_sample >= 2) {
        std::vector<std::size_t> order = pool;
        shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            std::size_t end = std::min(order.size(), start + batch_size);
            batches.emplace_back(order.begin() + start, order.begin() + end);
        }
    } else {
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t idx : pool) by_class[dataset.labels[idx]].push_back(idx);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (auto& [label, members] : by_class) {
            shuffle(members, rng);
            for (std::size_t i = 0; i + 1 < members.size(); i += 2)
                pairs.emplace_back(members[i], members[i + 1]);
        }
        shuffle(pairs, rng);
        std::size_t pairs_per_batch = std::max<std::size_t>(1, batch_size / 2);
        for (std::size_t start = 0; start < pairs.size(); start += pairs_per_batch) {
            std::size_t end = std::min(pairs.size(), start + pairs_per_batch);
            std::vector<std::size_t> batch;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(pairs[i].first);
                batch.push_back(pairs[i].second);
            }
            batches.push_back(std::move(batch));
        }
    }
    // A lone row cannot form any pair.
    std::erase_if(batches, [&](const auto& b) { return b.size() * views_per_sample < 2; });
    return batches;
}

FieldPartition effective_partition(const TrainConfig& config) {
    // The SupCon baseline contrasts (and classifies on) the whole embedding.
    if (config.loss_kind == LossKind::SupCon)
        return FieldPartition{config.partition.d_total(), 0};
    return config.partition;
}

}  // namespace

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "supcon") return LossKind::SupCon;
    if (s == "cs_supcon") return LossKind::CsSupCon;
    if (s == "scs_supcon") return LossKind::ScsSupCon;
    throw ConfigError("unknown loss_kind '" + s +
                      "' (expected supcon, cs_supcon, or scs_supcon)");
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::SupCon: return "supcon";
        case LossKind::CsSupCon: return "cs_supcon";
        case LossKind::ScsSupCon: return "scs_supcon";
    }
    return "?";
}

double cosine_lr(double base_lr, std::size_t epoch, std::size_t total) {
    if (epoch >= total) throw ConfigError("cosine_lr: epoch must be < total");
    return base_lr * (1.0 + std::cos(M_PI * static_cast<double>(epoch) /
                                     static_cast<double>(total))) / 2.0;
}

void sgd_momentum_step(std::vector<double>& params, const std::vector<double>& grads,
                       std::vector<double>& velocity, double lr, double momentum,
                       double weight_decay) {
    if (params.size() != grads.size() || params.size() != velocity.size())
        throw ConfigError("sgd_momentum_step: shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] + (grads[i] + weight_decay * params[i]);
        params[i] -= lr * velocity[i];
    }
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("save_trajectory_csv: cannot open " + path);
    std::string out = "epoch,loss,t,b,style_dist,lr\n";
    char buf[48];
    for (const auto& row : traj) {
        out += std::to_string(row.epoch);
        for (double v : {row.loss, row.t, row.b, row.style_dist, row.lr}) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            out += buf;
        }
        out += "\n";
    }
    f << out;
}

double mean_intra_class_style_distance(const Matrix& embedding, const std::vector<int>& labels,
                                       const FieldPartition& partition) {
    const std::size_t n = embedding.rows;
    const std::size_t dc = partition.d_common;
    const std::size_t dp = partition.d_total();
    if (dc == dp) return 0.0;
    double total = 0.0;
    std::size_t anchors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (p == i || labels[p] != labels[i]) continue;
            double sq = 0.0;
            for (std::size_t j = dc; j < dp; ++j) {
                double d = embedding(i, j) - embedding(p, j);
                sq += d * d;
            }
            sum += std::sqrt(sq);
            ++cnt;
        }
        if (cnt > 0) {
            total += sum / static_cast<double>(cnt);
            ++anchors;
        }
    }
    return anchors > 0 ? total / static_cast<double>(anchors) : 0.0;
}

Matrix embed(const ModelState& state, const Dataset& dataset,
             const std::vector<std::size_t>& indices) {
    std::vector<std::size_t> idx = indices;
    if (idx.empty()) {
        idx.resize(dataset.x.rows);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    }
    Matrix out(idx.size(), state.partition.d_total());
    constexpr std::size_t kChunk = 256;
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
        std::size_t end = std::min(idx.size(), start + kChunk);
        Matrix x(end - start, dataset.x.cols);
        for (std::size_t i = start; i < end; ++i)
            for (std::size_t j = 0; j < dataset.x.cols; ++j)
                x(i - start, j) = dataset.x(idx[i], j);
        ForwardCache cache;
        ForwardResult res = forward(state, x, cache);
        for (std::size_t i = start; i < end; ++i)
            for (std::size_t j = 0; j < out.cols; ++j)
                out(i, j) = res.embedding(i - start, j);
    }
    return out;
}

Stage1Result train_stage1(const TrainConfig& config, const Dataset& dataset) {
    if (config.stage1.lr <= 0.0 || config.stage1.momentum < 0.0 ||
        config.stage1.momentum >= 1.0 || config.stage1.weight_decay < 0.0)
        throw ConfigError("train_stage1: bad optimizer settings");
    {
        std::vector<int> seen;
        for (int l : dataset.labels)
            if (std::find(seen.begin(), seen.end(), l) == seen.end()) seen.push_back(l);
        if (seen.size() < 2) throw ConfigError("train_stage1: need at least 2 classes");
    }

    FieldPartition partition = effective_partition(config);
    ModelSizes sizes;
    sizes.input_dim = dataset.x.cols;
    sizes.encoder_hidden = config.encoder_hidden;
    sizes.projection_hidden = config.projection_hidden;
    sizes.partition = partition;

    Stage1Result result;
    result.state = init_model(sizes, SeededRng::derive_seed(config.seed, 1), config.t0,
                              config.b0);
    if (config.stage1.epochs == 0) return result;

    Velocity vel;
    vel.encoder = zeros_like(result.state.encoder);
    vel.projection = zeros_like(result.state.projection);

    std::vector<std::size_t> all(dataset.x.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    SeededRng rng(SeededRng::derive_seed(config.seed, 2));
    for (std::size_t epoch = 0; epoch < config.stage1.epochs; ++epoch) {
        double lr = cosine_lr(config.stage1.lr, epoch, config.stage1.epochs);
        auto batches = make_batches(dataset, all, config.stage1.batch_size,
                                    config.views_per_sample, rng);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (const auto& batch_idx : batches) {
            ViewBatch vb = augment(dataset, batch_idx, config.views_per_sample,
                                   config.aug_sigma, rng);
            ForwardCache cache;
            ForwardResult fwd = forward(result.state, vb.x_views, cache);

            LossOutput loss;
            switch (config.loss_kind) {
                case LossKind::SupCon:
                    loss = supcon_loss(fwd.embedding, vb.labels, config.hypers.tau);
                    break;
                case LossKind::CsSupCon: {
                    EmbeddingBatch eb{fwd.embedding, vb.labels, partition};
                    loss = cs_supcon_loss(eb, config.hypers);
                    break;
                }
                case LossKind::ScsSupCon: {
                    EmbeddingBatch eb{fwd.embedding, vb.labels, partition};
                    loss = scs_supcon_loss(eb, result.state.boundary, config.hypers,
                                           config.include_diagonal);
                    break;
                }
            }
            if (!std::isfinite(loss.value) || std::abs(loss.value) > kDivergenceLimit)
                throw DivergenceError("stage 1 diverged at epoch " + std::to_string(epoch) +
                                      " (loss=" + std::to_string(loss.value) + ")");

            ModelGrads grads = backward(result.state, cache, loss.grad_z);
            step_mlp(result.state.encoder, grads.encoder, vel.encoder, lr,
                     config.stage1.momentum, config.stage1.weight_decay);
            step_mlp(result.state.projection, grads.projection, vel.projection, lr,
                     config.stage1.momentum, config.stage1.weight_decay);
            if (config.loss_kind == LossKind::ScsSupCon) {
                step_scalar(result.state.boundary.t_log, loss.grad_t_log, vel.t_log, lr,
                            config.stage1.momentum);
                step_scalar(result.state.boundary.b, loss.grad_b, vel.b, lr,
                            config.stage1.momentum);
            }
            if (!(result.state.boundary.t() > 0.0) ||
                !std::isfinite(result.state.boundary.t_log))
                throw DivergenceError("stage 1: temperature left the positive domain");

            epoch_loss += loss.value;
            ++n_batches;
        }

        TrajectoryRow row;
        row.epoch = epoch;
        row.loss = n_batches > 0 ? epoch_loss / static_cast<double>(n_batches) : 0.0;
        row.t = result.state.boundary.t();
        row.b = result.state.boundary.b;
        row.lr = lr;
        Matrix emb = embed(result.state, dataset);
        row.style_dist = mean_intra_class_style_distance(emb, dataset.labels, partition);
        result.trajectory.push_back(row);
    }
    return result;
}

Stage2Result train_stage2(const ModelState& frozen, const TrainConfig& config,
                          const Dataset& dataset, const std::vector<std::size_t>& train_indices,
                          const std::vector<std::size_t>& test_indices) {
    const std::size_t dc = frozen.partition.d_common;
    int max_label = 0;
    for (int l : dataset.labels) max_label = std::max(max_label, l);
    const std::size_t n_classes = static_cast<std::size_t>(max_label) + 1;

    Matrix train_emb = embed(frozen, dataset, train_indices);
    Matrix train_common(train_emb.rows, dc);
    for (std::size_t i = 0; i < train_emb.rows; ++i)
        for (std::size_t j = 0; j < dc; ++j) train_common(i, j) = train_emb(i, j);
    std::vector<int> train_labels(train_indices.size());
    for (std::size_t i = 0; i < train_indices.size(); ++i)
        train_labels[i] = dataset.labels[train_indices[i]];

    Stage2Result result;
    result.classifier = init_classifier(dc, n_classes, SeededRng::derive_seed(config.seed, 3));
    std::vector<double> vel_w(result.classifier.weight.data.size(), 0.0);
    std::vector<double> vel_b(result.classifier.bias.size(), 0.0);

    SeededRng rng(SeededRng::derive_seed(config.seed, 4));
    std::vector<std::size_t> order(train_indices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < config.stage2.epochs; ++epoch) {
        double lr = cosine_lr(config.stage2.lr, epoch, config.stage2.epochs);
        shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += config.stage2.batch_size) {
            std::size_t end = std::min(order.size(), start + config.stage2.batch_size);
            Matrix xb(end - start, dc);
            std::vector<int> yb(end - start);
            for (std::size_t i = start; i < end; ++i) {
                for (std::size_t j = 0; j < dc; ++j) xb(i - start, j) = train_common(order[i], j);
                yb[i - start] = train_labels[order[i]];
            }
            Matrix logits = classify(result.classifier, xb);
            LossOutput ce = cross_entropy(logits, yb);
            if (!std::isfinite(ce.value) || std::abs(ce.value) > kDivergenceLimit)
                throw DivergenceError("stage 2 diverged at epoch " + std::to_string(epoch));

            // Linear-layer gradients from dL/dlogits.
            Matrix gw(dc, n_classes);
            std::vector<double> gb(n_classes, 0.0);
            for (std::size_t i = 0; i < xb.rows; ++i) {
                for (std::size_t k = 0; k < n_classes; ++k) {
                    double g = ce.grad_z(i, k);
                    gb[k] += g;
                    for (std::size_t j = 0; j < dc; ++j) gw(j, k) += xb(i, j) * g;
                }
            }
            sgd_momentum_step(result.classifier.weight.data, gw.data, vel_w, lr,
                              config.stage2.momentum, config.stage2.weight_decay);
            sgd_momentum_step(result.classifier.bias, gb, vel_b, lr, config.stage2.momentum,
                              config.stage2.weight_decay);
        }
    }

    Matrix test_emb = embed(frozen, dataset, test_indices);
    Matrix test_common(test_emb.rows, dc);
    for (std::size_t i = 0; i < test_emb.rows; ++i)
        for (std::size_t j = 0; j < dc; ++j) test_common(i, j) = test_emb(i, j);
    Matrix logits = classify(result.classifier, test_common);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < logits.cols; ++k)
            if (logits(i, k) > logits(i, best)) best = k;
        if (static_cast<int>(best) == dataset.labels[test_indices[i]]) ++correct;
    }
    result.accuracy = test_indices.empty()
                          ? 0.0
                          : static_cast<double>(correct) / static_cast<double>(test_indices.size());
    return result;
}

TrainedRun train_full(const TrainConfig& config, const Dataset& dataset,
                      const std::vector<std::size_t>& train_indices,
                      const std::vector<std::size_t>& test_indices) {
    Dataset train_ds;
    train_ds.x = Matrix(train_indices.size(), dataset.x.cols);
    train_ds.labels.resize(train_indices.size());
    for (std::size_t i = 0; i < train_indices.size(); ++i) {
        for (std::size_t j = 0; j < dataset.x.cols; ++j)
            train_ds.x(i, j) = dataset.x(train_indices[i], j);
        train_ds.labels[i] = dataset.labels[train_indices[i]];
    }

    Stage1Result s1 = train_stage1(config, train_ds);
    Stage2Result s2 = train_stage2(s1.state, config, dataset, train_indices, test_indices);

    TrainedRun run;
    run.state = std::move(s1.state);
    run.classifier = std::move(s2.classifier);
    run.trajectory = std::move(s1.trajectory);
    run.accuracy = s2.accuracy;
    run.seed = config.seed;
    return run;
}

ExperimentResult run_experiment(const TrainConfig& config, const Dataset& dataset,
                                std::size_t k_folds) {
    auto folds = kfold_split(dataset.x.rows, k_folds, SeededRng::derive_seed(config.seed, 5));
    ExperimentResult result;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        TrainConfig fold_config = config;
        fold_config.seed = SeededRng::derive_seed(config.seed, 100 + f);
        result.fold_seeds.push_back(fold_config.seed);
        TrainedRun run = train_full(fold_config, dataset, folds[f].train_indices,
                                    folds[f].test_indices);
        result.fold_accuracies.push_back(run.accuracy);
    }
    double sum = 0.0;
    for (double a : result.fold_accuracies) sum += a;
    result.mean_accuracy = sum / static_cast<double>(result.fold_accuracies.size());
    return result;
}

SearchResult random_search(const SearchSpace& space, std::size_t trials,
                           const std::function<double(double, double, double)>& objective,
                           std::uint64_t seed) {
    if (trials < 1) throw ConfigError("random_search: trials must be >= 1");
    SeededRng rng(seed);
    SearchResult result;
    for (std::size_t i = 0; i < trials; ++i) {
        SearchTrial trial;
        trial.index = i;
        trial.t0 = rng.log_uniform(space.t0_lo, space.t0_hi);
        trial.b0 = rng.uniform(space.b0_lo, space.b0_hi);
        trial.beta = rng.log_uniform(space.beta_lo, space.beta_hi);
        trial.objective = objective(trial.t0, trial.b0, trial.beta);
        result.trials.push_back(trial);
        if (i == 0 || trial.objective > result.best.objective) result.best = trial;
    }
    return result;
}

void stratified_holdout(const Dataset& dataset, const std::vector<std::size_t>& indices,
                        double fraction, std::uint64_t seed,
                        std::vector<std::size_t>& train_out, std::vector<std::size_t>& val_out) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw ConfigError("stratified_holdout: fraction must be in (0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t idx : indices) by_class[dataset.labels[idx]].push_back(idx);
    SeededRng rng(seed);
    train_out.clear();
    val_out.clear();
    for (auto& [label, members] : by_class) {
        shuffle(members, rng);
        std::size_t n_val = std::max<std::size_t>(
            1, static_cast<std::size_t>(fraction * static_cast<double>(members.size())));
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < n_val ? val_out : train_out).push_back(members[i]);
    }
    std::sort(train_out.begin(), train_out.end());
    std::sort(val_out.begin(), val_out.end());
}

}  // namespace scscl
