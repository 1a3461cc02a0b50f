#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "scscl/losses.hpp"
#include "scscl/model.hpp"
#include "scscl/rng.hpp"

using namespace scscl;

namespace {

ModelState small_model(std::uint64_t seed) {
    ModelSizes sizes;
    sizes.input_dim = 5;
    sizes.encoder_hidden = {6};
    sizes.partition = FieldPartition{4, 2};
    return init_model(sizes, seed, 0.1, 0.05);
}

double stack_loss(const ModelState& state, const Matrix& x, const std::vector<int>& labels,
                  const ScalarHypers& hypers) {
    ForwardCache cache;
    ForwardResult fwd = forward(state, x, cache);
    EmbeddingBatch batch{fwd.embedding, labels, state.partition};
    return scs_supcon_loss(batch, state.boundary, hypers).value;
}

}  // namespace

TEST_CASE("mlp forward matches a hand-computed two-layer net") {
    MlpParams mlp;
    DenseLayer l1;
    l1.w = Matrix(2, 2);
    l1.w.data = {1.0, -1.0, 2.0, 0.5};
    l1.bias = {0.0, -1.0};
    DenseLayer l2;
    l2.w = Matrix(2, 1);
    l2.w.data = {1.0, 3.0};
    l2.bias = {0.25};
    mlp.layers = {l1, l2};

    Matrix x(1, 2);
    x.data = {1.0, 1.0};
    MlpCache cache;
    Matrix y = mlp_forward(mlp, x, cache);
    // hidden pre = (3, -1.5), relu -> (3, 0); out = 3*1 + 0*3 + 0.25
    CHECK(y(0, 0) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(cache.pre[0](0, 1) == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(cache.post[0](0, 1) == 0.0);
}

TEST_CASE("forward validates input width and normalizes both fields") {
    ModelState state = small_model(3);
    SeededRng rng(4);
    Matrix x(6, 5);
    for (double& v : x.data) v = rng.gaussian();
    ForwardCache cache;
    ForwardResult fwd = forward(state, x, cache);
    for (std::size_t i = 0; i < 6; ++i) {
        double nc = 0.0, ns = 0.0;
        for (std::size_t j = 0; j < 4; ++j) nc += fwd.embedding(i, j) * fwd.embedding(i, j);
        for (std::size_t j = 4; j < 6; ++j) ns += fwd.embedding(i, j) * fwd.embedding(i, j);
        CHECK(std::sqrt(nc) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::sqrt(ns) == doctest::Approx(1.0).epsilon(1e-12));
    }
    Matrix bad(6, 4);
    ForwardCache c2;
    CHECK_THROWS_AS(forward(state, bad, c2), ConfigError);
}

TEST_CASE("backward rejects a stale cache") {
    ModelState state = small_model(5);
    ForwardCache cache;  // never filled
    Matrix g(3, 6);
    CHECK_THROWS_AS(backward(state, cache, g), ConfigError);
}

TEST_CASE("full-stack gradients match finite differences") {
    SeededRng rng(6);
    ScalarHypers hypers;
    hypers.beta = 1e-2;
    ModelState state = small_model(7);
    Matrix x(8, 5);
    for (double& v : x.data) v = rng.gaussian();
    std::vector<int> labels = {0, 0, 1, 1, 2, 2, 3, 3};

    ForwardCache cache;
    ForwardResult fwd = forward(state, x, cache);
    EmbeddingBatch batch{fwd.embedding, labels, state.partition};
    LossOutput loss = scs_supcon_loss(batch, state.boundary, hypers);
    ModelGrads grads = backward(state, cache, loss.grad_z);

    const double h = 1e-6;
    auto fd_param = [&](double* p, double analytic) {
        double orig = *p;
        *p = orig + h;
        double up = stack_loss(state, x, labels, hypers);
        *p = orig - h;
        double dn = stack_loss(state, x, labels, hypers);
        *p = orig;
        double numeric = (up - dn) / (2 * h);
        double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        CHECK(std::abs(analytic - numeric) / denom <= 1e-5);
    };
    for (std::size_t l = 0; l < state.encoder.layers.size(); ++l) {
        auto& layer = state.encoder.layers[l];
        for (std::size_t i = 0; i < layer.w.data.size(); ++i)
            fd_param(&layer.w.data[i], grads.encoder.layers[l].w.data[i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            fd_param(&layer.bias[i], grads.encoder.layers[l].bias[i]);
    }
    for (std::size_t l = 0; l < state.projection.layers.size(); ++l) {
        auto& layer = state.projection.layers[l];
        for (std::size_t i = 0; i < layer.w.data.size(); ++i)
            fd_param(&layer.w.data[i], grads.projection.layers[l].w.data[i]);
    }
    fd_param(&state.boundary.t_log, loss.grad_t_log);
    fd_param(&state.boundary.b, loss.grad_b);
}

TEST_CASE("checkpoint round trip is bitwise exact") {
    ModelState state = small_model(11);
    state.boundary.t_log = -1.234567890123456;
    state.boundary.b = 0.9876543210987654;
    std::string path = "roundtrip_checkpoint.json";
    save_checkpoint(state, 42, path);
    Checkpoint loaded = load_checkpoint(path);
    std::remove(path.c_str());

    CHECK(loaded.seed == 42);
    CHECK(state_hash(loaded.state) == state_hash(state));
    CHECK(loaded.state.boundary.t_log == state.boundary.t_log);
    CHECK(loaded.state.boundary.b == state.boundary.b);
    REQUIRE(loaded.state.encoder.layers.size() == state.encoder.layers.size());
    for (std::size_t l = 0; l < state.encoder.layers.size(); ++l) {
        const auto& a = state.encoder.layers[l].w.data;
        const auto& b = loaded.state.encoder.layers[l].w.data;
        REQUIRE(a.size() == b.size());
        CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("init_model validates t0 and is seed-deterministic") {
    ModelSizes sizes;
    sizes.input_dim = 5;
    sizes.partition = FieldPartition{4, 2};
    CHECK_THROWS_AS(init_model(sizes, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(init_model(sizes, 1, -0.1), ConfigError);
    CHECK(state_hash(init_model(sizes, 9)) == state_hash(init_model(sizes, 9)));
    CHECK(state_hash(init_model(sizes, 9)) != state_hash(init_model(sizes, 10)));
    CHECK(init_model(sizes, 9, 0.1).boundary.t() == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("classifier logits are a plain affine map of the common field") {
    LinearClassifier clf;
    clf.weight = Matrix(2, 3);
    clf.weight.data = {1, 0, -1, 0, 2, 1};
    clf.bias = {0.5, 0.0, -0.5};
    Matrix common(1, 2);
    common.data = {2.0, 3.0};
    Matrix logits = classify(clf, common);
    CHECK(logits(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(logits(0, 1) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(logits(0, 2) == doctest::Approx(0.5).epsilon(1e-15));
    Matrix wrong(1, 3);
    CHECK_THROWS_AS(classify(clf, wrong), ConfigError);
}
