#include "scscl/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "scscl/kernels.hpp"

namespace scscl {

namespace {

Matrix linear_forward(const DenseLayer& layer, const Matrix& x) {
    Matrix out;
    kernels::matmul_into(x, layer.w, out, kernels::Exec::Parallel);
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += layer.bias[j];
    return out;
}

MlpParams zero_grads_like(const MlpParams& mlp) {
    MlpParams g;
    g.layers.reserve(mlp.layers.size());
    for (const auto& l : mlp.layers) {
        DenseLayer gl;
        gl.w = Matrix(l.w.rows, l.w.cols);
        gl.bias.assign(l.bias.size(), 0.0);
        g.layers.push_back(std::move(gl));
    }
    return g;
}

void hash_bytes(std::uint64_t& h, const void* p, std::size_t n) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= c[i];
        h *= 0x100000001B3ULL;
    }
}

nlohmann::json mlp_to_json(const MlpParams& mlp) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : mlp.layers) {
        layers.push_back({{"rows", l.w.rows}, {"cols", l.w.cols}, {"w", l.w.data},
                          {"bias", l.bias}});
    }
    return layers;
}

MlpParams mlp_from_json(const nlohmann::json& j) {
    MlpParams mlp;
    for (const auto& lj : j) {
        DenseLayer l;
        l.w.rows = lj.at("rows").get<std::size_t>();
        l.w.cols = lj.at("cols").get<std::size_t>();
        l.w.data = lj.at("w").get<std::vector<double>>();
        l.bias = lj.at("bias").get<std::vector<double>>();
        if (l.w.data.size() != l.w.rows * l.w.cols)
            throw ConfigError("checkpoint: weight size mismatch");
        mlp.layers.push_back(std::move(l));
    }
    return mlp;
}

DenseLayer init_layer(std::size_t fan_in, std::size_t fan_out, SeededRng& rng) {
    DenseLayer l;
    l.w = Matrix(fan_in, fan_out);
    double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : l.w.data) v = scale * rng.gaussian();
    l.bias.assign(fan_out, 0.0);
    return l;
}

}  // namespace

Matrix mlp_forward(const MlpParams& mlp, const Matrix& x, MlpCache& cache) {
    cache.input = x;
    cache.pre.clear();
    cache.post.clear();
    Matrix a = x;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        Matrix pre = linear_forward(mlp.layers[l], a);
        cache.pre.push_back(pre);
        if (l + 1 < mlp.layers.size()) {
            Matrix post = pre;
            for (double& v : post.data) v = v > 0.0 ? v : 0.0;
            cache.post.push_back(post);
            a = cache.post.back();
        } else {
            cache.post.push_back(pre);
            a = pre;
        }
    }
    return a;
}

Matrix mlp_backward(const MlpParams& mlp, const MlpCache& cache, const Matrix& grad_out,
                    MlpParams& grads) {
    if (cache.pre.size() != mlp.layers.size())
        throw ConfigError("mlp_backward: cache does not match this network");
    grads = zero_grads_like(mlp);
    Matrix delta = grad_out;
    for (std::size_t l = mlp.layers.size(); l-- > 0;) {
        const Matrix& a_in = l == 0 ? cache.input : cache.post[l - 1];
        kernels::matmul_at_b_into(a_in, delta, grads.layers[l].w, kernels::Exec::Parallel);
        for (std::size_t j = 0; j < delta.cols; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < delta.rows; ++i) acc += delta(i, j);
            grads.layers[l].bias[j] = acc;
        }
        Matrix prev;
        kernels::matmul_a_bt_into(delta, mlp.layers[l].w, prev, kernels::Exec::Parallel);
        if (l > 0) {
            const Matrix& pre_prev = cache.pre[l - 1];
            for (std::size_t i = 0; i < prev.data.size(); ++i)
                if (pre_prev.data[i] <= 0.0) prev.data[i] = 0.0;
        }
        delta = prev;
    }
    return delta;
}

ForwardResult forward(const ModelState& state, const Matrix& x, ForwardCache& cache) {
    if (x.cols != state.encoder.layers.front().w.rows)
        throw ConfigError("forward: input width " + std::to_string(x.cols) +
                          " does not match encoder input " +
                          std::to_string(state.encoder.layers.front().w.rows));
    Matrix feat = mlp_forward(state.encoder, x, cache.encoder);
    Matrix proj = mlp_forward(state.projection, feat, cache.projection);
    if (proj.cols != state.partition.d_total())
        throw ConfigError("forward: projection width does not match partition");
    cache.proj_raw = proj;

    const std::size_t dc = state.partition.d_common;
    const std::size_t dp = state.partition.d_total();
    normalize_field(proj, 0, dc, cache.norm_common);
    if (dc < dp) normalize_field(proj, dc, dp, cache.norm_style);
    cache.valid = true;

    ForwardResult res;
    res.embedding = std::move(proj);
    for (char d : cache.norm_common.degenerate) res.any_degenerate |= d != 0;
    for (char d : cache.norm_style.degenerate) res.any_degenerate |= d != 0;
    return res;
}

ModelGrads backward(const ModelState& state, const ForwardCache& cache,
                    const Matrix& grad_embedding) {
    if (!cache.valid || cache.proj_raw.rows != grad_embedding.rows ||
        cache.proj_raw.cols != grad_embedding.cols)
        throw ConfigError("backward: cache does not match this forward pass");
    const std::size_t dc = state.partition.d_common;
    const std::size_t dp = state.partition.d_total();

    Matrix grad_proj = grad_embedding;
    backprop_field_norm(cache.proj_raw, 0, dc, cache.norm_common, grad_proj);
    if (dc < dp) backprop_field_norm(cache.proj_raw, dc, dp, cache.norm_style, grad_proj);

    ModelGrads grads;
    Matrix grad_feat = mlp_backward(state.projection, cache.projection, grad_proj,
                                    grads.projection);
    mlp_backward(state.encoder, cache.encoder, grad_feat, grads.encoder);
    return grads;
}

ModelState init_model(const ModelSizes& sizes, std::uint64_t seed, double t0, double b0) {
    if (t0 <= 0.0) throw ConfigError("init_model: t0 must be > 0");
    if (sizes.partition.d_common < 1) throw ConfigError("init_model: d_common must be >= 1");
    SeededRng rng(seed);
    ModelState state;
    state.partition = sizes.partition;

    std::size_t in = sizes.input_dim;
    for (std::size_t h : sizes.encoder_hidden) {
        state.encoder.layers.push_back(init_layer(in, h, rng));
        in = h;
    }
    if (state.encoder.layers.empty())
        throw ConfigError("init_model: encoder needs at least one layer");

    std::size_t dp = sizes.partition.d_total();
    std::size_t hidden = sizes.projection_hidden == 0 ? dp : sizes.projection_hidden;
    state.projection.layers.push_back(init_layer(in, hidden, rng));
    state.projection.layers.push_back(init_layer(hidden, dp, rng));

    state.boundary.t_log = std::log(t0);
    state.boundary.b = b0;
    return state;
}

LinearClassifier init_classifier(std::size_t d_common, std::size_t n_classes,
                                 std::uint64_t seed) {
    SeededRng rng(seed);
    LinearClassifier clf;
    clf.weight = Matrix(d_common, n_classes);
    double scale = 1.0 / std::sqrt(static_cast<double>(d_common));
    for (double& v : clf.weight.data) v = scale * rng.gaussian();
    clf.bias.assign(n_classes, 0.0);
    return clf;
}

Matrix classify(const LinearClassifier& clf, const Matrix& common) {
    if (common.cols != clf.weight.rows)
        throw ConfigError("classify: feature width " + std::to_string(common.cols) +
                          " does not match classifier input " + std::to_string(clf.weight.rows));
    Matrix out;
    kernels::matmul_into(common, clf.weight, out, kernels::Exec::Parallel);
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += clf.bias[j];
    return out;
}

void save_checkpoint(const ModelState& state, std::uint64_t seed, const std::string& path) {
    nlohmann::json j;
    j["version"] = 1;
    j["seed"] = seed;
    j["d_common"] = state.partition.d_common;
    j["d_style"] = state.partition.d_style;
    j["t_log"] = state.boundary.t_log;
    j["b"] = state.boundary.b;
    j["encoder"] = mlp_to_json(state.encoder);
    j["projection"] = mlp_to_json(state.projection);
    std::ofstream out(path);
    if (!out) throw ConfigError("save_checkpoint: cannot open " + path);
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_checkpoint: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("load_checkpoint: " + std::string(e.what()));
    }
    if (j.at("version").get<int>() != 1) throw ConfigError("load_checkpoint: unknown version");
    Checkpoint ck;
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.state.partition.d_common = j.at("d_common").get<std::size_t>();
    ck.state.partition.d_style = j.at("d_style").get<std::size_t>();
    ck.state.boundary.t_log = j.at("t_log").get<double>();
    ck.state.boundary.b = j.at("b").get<double>();
    ck.state.encoder = mlp_from_json(j.at("encoder"));
    ck.state.projection = mlp_from_json(j.at("projection"));
    return ck;
}

std::uint64_t state_hash(const ModelState& state) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto hash_mlp = [&](const MlpParams& mlp) {
        for (const auto& l : mlp.layers) {
            hash_bytes(h, l.w.data.data(), l.w.data.size() * sizeof(double));
            hash_bytes(h, l.bias.data(), l.bias.size() * sizeof(double));
        }
    };
    hash_mlp(state.encoder);
    hash_mlp(state.projection);
    hash_bytes(h, &state.boundary.t_log, sizeof(double));
    hash_bytes(h, &state.boundary.b, sizeof(double));
    return h;
}

}  // namespace scscl
