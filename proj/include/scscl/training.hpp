#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scscl/data.hpp"
#include "scscl/losses.hpp"
#include "scscl/model.hpp"

namespace scscl {

enum class LossKind { SupCon, CsSupCon, ScsSupCon };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind kind);

struct StageConfig {
    double lr = 0.1;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    double momentum = 0.9;
    double weight_decay = 1e-4;
};

struct TrainConfig {
    LossKind loss_kind = LossKind::ScsSupCon;
    ScalarHypers hypers;
    double t0 = 0.1;
    double b0 = 0.0;
    StageConfig stage1{0.1, 100, 64, 0.9, 1e-4};
    StageConfig stage2{0.1, 50, 64, 0.9, 0.0};
    std::size_t views_per_sample = 2;
    double aug_sigma = 0.1;
    std::uint64_t seed = 0;
    bool include_diagonal = true;
    std::vector<std::size_t> encoder_hidden = {64, 64};
    std::size_t projection_hidden = 0;  // 0 -> D_p
    FieldPartition partition{192, 64};
};

struct TrajectoryRow {
    std::size_t epoch = 0;
    double loss = 0.0;
    double t = 0.0;
    double b = 0.0;
    double style_dist = 0.0;  // mean intra-class style distance over the data
    double lr = 0.0;
};

using Trajectory = std::vector<TrajectoryRow>;

void save_trajectory_csv(const Trajectory& traj, const std::string& path);

/// base_lr * (1 + cos(pi * epoch / total)) / 2.
double cosine_lr(double base_lr, std::size_t epoch, std::size_t total);

/// v' = momentum*v + (g + weight_decay*p); p' = p - lr*v'. Spans must be the
/// same length.
void sgd_momentum_step(std::vector<double>& params, const std::vector<double>& grads,
                       std::vector<double>& velocity, double lr, double momentum,
                       double weight_decay);

struct Stage1Result {
    ModelState state;
    Trajectory trajectory;
};

Stage1Result train_stage1(const TrainConfig& config, const Dataset& dataset);

/// Embed rows `indices` (all rows if empty) with the frozen model.
Matrix embed(const ModelState& state, const Dataset& dataset,
             const std::vector<std::size_t>& indices = {});

struct Stage2Result {
    LinearClassifier classifier;
    double accuracy = 0.0;
};

Stage2Result train_stage2(const ModelState& frozen, const TrainConfig& config,
                          const Dataset& dataset, const std::vector<std::size_t>& train_indices,
                          const std::vector<std::size_t>& test_indices);

struct TrainedRun {
    ModelState state;
    LinearClassifier classifier;
    Trajectory trajectory;
    double accuracy = 0.0;
    std::uint64_t seed = 0;
};

/// Stage 1 + Stage 2 on an explicit train/test split.
TrainedRun train_full(const TrainConfig& config, const Dataset& dataset,
                      const std::vector<std::size_t>& train_indices,
                      const std::vector<std::size_t>& test_indices);

struct ExperimentResult {
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    std::vector<std::uint64_t> fold_seeds;
};

ExperimentResult run_experiment(const TrainConfig& config, const Dataset& dataset,
                                std::size_t k_folds);

struct SearchSpace {
    double t0_lo = 0.05, t0_hi = 0.2;     // log-uniform
    double b0_lo = -0.2, b0_hi = 0.2;     // uniform
    double beta_lo = 1e-5, beta_hi = 1e-1;  // log-uniform
};

struct SearchTrial {
    std::size_t index = 0;
    double t0 = 0.0, b0 = 0.0, beta = 0.0;
    double objective = 0.0;
};

struct SearchResult {
    SearchTrial best;
    std::vector<SearchTrial> trials;
};

/// Deterministic random search; ties go to the lowest trial index.
SearchResult random_search(const SearchSpace& space, std::size_t trials,
                           const std::function<double(double t0, double b0, double beta)>& objective,
                           std::uint64_t seed);

/// Stratified holdout of `fraction` of the given indices (per class), used as
/// the search validation split.
void stratified_holdout(const Dataset& dataset, const std::vector<std::size_t>& indices,
                        double fraction, std::uint64_t seed,
                        std::vector<std::size_t>& train_out, std::vector<std::size_t>& val_out);

/// Mean over anchors of the mean style-field distance to same-class rows.
double mean_intra_class_style_distance(const Matrix& embedding, const std::vector<int>& labels,
                                       const FieldPartition& partition);

}  // namespace scscl
