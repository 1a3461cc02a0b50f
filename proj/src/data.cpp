#include "scscl/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scscl {

namespace {

void check_spec(const SyntheticSpec& spec) {
    if (spec.n_classes < 1 || spec.samples_per_class < 1)
        throw ConfigError("synthetic spec: need at least one class and one sample");
    if (spec.observed_dim < spec.content_dim + spec.style_dim)
        throw ConfigError("synthetic spec: observed_dim must be >= content_dim + style_dim");
    if (spec.class_gap <= 0.0) throw ConfigError("synthetic spec: class_gap must be > 0");
    if (spec.style_spread < 0.0 || spec.noise_sigma < 0.0)
        throw ConfigError("synthetic spec: spreads must be >= 0");
}

// Random unit vector; resampled until it keeps a minimum distance to the
// centroids drawn so far, so class_gap really controls separation.
std::vector<double> draw_centroid(std::size_t dim, const std::vector<std::vector<double>>& prev,
                                  SeededRng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> v(dim);
        double sq = 0.0;
        for (double& x : v) {
            x = rng.gaussian();
            sq += x * x;
        }
        double norm = std::sqrt(sq);
        if (norm < 1e-9) continue;
        for (double& x : v) x /= norm;
        bool ok = true;
        for (const auto& p : prev) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) d2 += (v[k] - p[k]) * (v[k] - p[k]);
            if (d2 < 0.8 * 0.8) {
                ok = false;
                break;
            }
        }
        if (ok) return v;
    }
    throw ConfigError("generate: could not place class centroids; too many classes for "
                      "content_dim");
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

SyntheticSpec preset_spec(const std::string& name) {
    SyntheticSpec spec;
    if (name == "easy") {
        spec.class_gap = 5.0;
        spec.style_spread = 0.5;
    } else if (name == "fine-grained") {
        spec.class_gap = 0.8;
        spec.style_spread = 2.0;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected 'easy' or 'fine-grained')");
    }
    return spec;
}

Dataset generate(const SyntheticSpec& spec) {
    check_spec(spec);
    SeededRng rng(spec.seed);
    const std::size_t latent = spec.content_dim + spec.style_dim;
    const std::size_t n = spec.n_classes * spec.samples_per_class;

    std::vector<std::vector<double>> centroids;
    for (std::size_t k = 0; k < spec.n_classes; ++k)
        centroids.push_back(draw_centroid(spec.content_dim, centroids, rng));

    // Fixed random mixing map, shared by every sample.
    Matrix w(latent, spec.observed_dim);
    double w_scale = 1.0 / std::sqrt(static_cast<double>(latent));
    for (double& v : w.data) v = w_scale * rng.gaussian();

    Dataset ds;
    ds.x = Matrix(n, spec.observed_dim);
    ds.labels.resize(n);
    ds.provenance = spec;
    std::vector<double> z(latent);
    std::size_t row = 0;
    for (std::size_t k = 0; k < spec.n_classes; ++k) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
            for (std::size_t j = 0; j < spec.content_dim; ++j)
                z[j] = spec.class_gap * centroids[k][j];
            for (std::size_t j = 0; j < spec.style_dim; ++j)
                z[spec.content_dim + j] = spec.style_spread * rng.gaussian();
            for (std::size_t j = 0; j < spec.observed_dim; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < latent; ++l) acc += z[l] * w(l, j);
                ds.x(row, j) = acc + spec.noise_sigma * rng.gaussian();
            }
            ds.labels[row] = static_cast<int>(k);
        }
    }
    return ds;
}

ViewBatch augment(const Dataset& dataset, const std::vector<std::size_t>& indices,
                  std::size_t views_per_sample, double aug_sigma, SeededRng& rng) {
    if (indices.empty()) throw ConfigError("augment: empty index list");
    if (views_per_sample < 1) throw ConfigError("augment: views_per_sample must be >= 1");
    const std::size_t b = indices.size();
    const std::size_t d = dataset.x.cols;
    ViewBatch out;
    out.views_per_sample = views_per_sample;
    out.x_views = Matrix(views_per_sample * b, d);
    out.labels.resize(views_per_sample * b);
    for (std::size_t v = 0; v < views_per_sample; ++v) {
        for (std::size_t i = 0; i < b; ++i) {
            std::size_t src = indices[i];
            std::size_t dst = v * b + i;
            for (std::size_t j = 0; j < d; ++j)
                out.x_views(dst, j) =
                    dataset.x(src, j) + (aug_sigma > 0.0 ? aug_sigma * rng.gaussian() : 0.0);
            out.labels[dst] = dataset.labels[src];
        }
    }
    return out;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("load_csv: empty file " + path);

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::ptrdiff_t label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "label") label_col = static_cast<std::ptrdiff_t>(i);
    if (label_col < 0) throw ConfigError("load_csv: no 'label' column in " + path);
    const std::size_t n_cols = header.size();
    const std::size_t n_feat = n_cols - 1;
    if (n_feat == 0) throw ConfigError("load_csv: no feature columns in " + path);

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw ConfigError("load_csv: non-numeric cell at line " +
                                  std::to_string(line_no));
            }
            if (pos != cell.size())
                throw ConfigError("load_csv: non-numeric cell at line " + std::to_string(line_no));
            if (col == static_cast<std::size_t>(label_col))
                labels.push_back(static_cast<int>(v));
            else
                values.push_back(v);
            ++col;
        }
        if (col != n_cols)
            throw ConfigError("load_csv: ragged row at line " + std::to_string(line_no));
    }
    if (labels.empty()) throw ConfigError("load_csv: no data rows in " + path);

    Dataset ds;
    ds.x.rows = labels.size();
    ds.x.cols = n_feat;
    ds.x.data = std::move(values);
    ds.labels = std::move(labels);
    return ds;
}

void save_csv(const Dataset& dataset, const std::string& path) {
    std::string out;
    out += "label";
    for (std::size_t j = 0; j < dataset.x.cols; ++j) out += ",f" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < dataset.x.rows; ++i) {
        out += std::to_string(dataset.labels[i]);
        for (std::size_t j = 0; j < dataset.x.cols; ++j) {
            out += ',';
            format_double(out, dataset.x(i, j));
        }
        out += "\n";
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("save_csv: cannot open " + path);
    f << out;
}

void save_sidecar(const SyntheticSpec& spec, const std::string& path) {
    nlohmann::json j{{"n_classes", spec.n_classes},
                     {"samples_per_class", spec.samples_per_class},
                     {"content_dim", spec.content_dim},
                     {"style_dim", spec.style_dim},
                     {"observed_dim", spec.observed_dim},
                     {"class_gap", spec.class_gap},
                     {"style_spread", spec.style_spread},
                     {"noise_sigma", spec.noise_sigma},
                     {"seed", spec.seed}};
    std::ofstream f(path);
    if (!f) throw ConfigError("save_sidecar: cannot open " + path);
    f << j.dump(2) << "\n";
}

std::vector<FoldSplit> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold_split: k must be >= 2");
    if (k > n) throw ConfigError("kfold_split: k exceeds sample count");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SeededRng rng(seed);
    shuffle(order, rng);

    std::vector<FoldSplit> folds(k);
    std::size_t base = n / k, rem = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t size = base + (f < rem ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) folds[f].test_indices.push_back(order[pos + i]);
        pos += size;
    }
    for (std::size_t f = 0; f < k; ++f)
        for (std::size_t g = 0; g < k; ++g)
            if (g != f)
                folds[f].train_indices.insert(folds[f].train_indices.end(),
                                              folds[g].test_indices.begin(),
                                              folds[g].test_indices.end());
    return folds;
}

}  // namespace scscl
