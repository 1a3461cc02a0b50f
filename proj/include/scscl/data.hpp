#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scscl/matrix.hpp"
#include "scscl/rng.hpp"

namespace scscl {

/// Synthetic fine-grained data: a fixed content vector per class, a per-sample
/// style draw, both pushed through a fixed random linear map plus noise.
struct SyntheticSpec {
    std::size_t n_classes = 8;
    std::size_t samples_per_class = 200;
    std::size_t content_dim = 4;
    std::size_t style_dim = 4;
    std::size_t observed_dim = 16;
    double class_gap = 0.8;     // inter-class content separation
    double style_spread = 2.0;  // per-sample style magnitude
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;
};

/// Named presets shipped with the repo: "easy" (wide class gaps) and
/// "fine-grained" (small gaps, large style variation).
SyntheticSpec preset_spec(const std::string& name);

struct Dataset {
    Matrix x;  // N x observed_dim
    std::vector<int> labels;
    std::optional<SyntheticSpec> provenance;
};

Dataset generate(const SyntheticSpec& spec);

struct ViewBatch {
    Matrix x_views;  // (V*B) x observed_dim, view-major: rows v*B+i share labels[i]
    std::vector<int> labels;
    std::size_t views_per_sample = 1;
};

ViewBatch augment(const Dataset& dataset, const std::vector<std::size_t>& indices,
                  std::size_t views_per_sample, double aug_sigma, SeededRng& rng);

/// CSV with a header; one "label" column, remaining columns numeric features.
/// Floats are emitted with 17 significant digits so save -> load is exact.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& dataset, const std::string& path);

/// JSON sidecar carrying the generating SyntheticSpec.
void save_sidecar(const SyntheticSpec& spec, const std::string& path);

struct FoldSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

std::vector<FoldSplit> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace scscl
