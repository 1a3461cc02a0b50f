#include <doctest.h>

#include <cmath>
#include <set>

#include "scscl/training.hpp"

using namespace scscl;

namespace {

TrainConfig tiny_config() {
    TrainConfig c;
    c.encoder_hidden = {8};
    c.partition = FieldPartition{6, 2};
    c.stage1.epochs = 2;
    c.stage1.batch_size = 32;
    c.stage2.epochs = 2;
    c.stage2.batch_size = 32;
    return c;
}

Dataset tiny_dataset(std::uint64_t seed = 0) {
    SyntheticSpec spec = preset_spec("easy");
    spec.samples_per_class = 8;
    spec.n_classes = 4;
    spec.seed = seed;
    return generate(spec);
}

}  // namespace

TEST_CASE("loss kind names round-trip") {
    for (auto kind : {LossKind::SupCon, LossKind::CsSupCon, LossKind::ScsSupCon})
        CHECK(loss_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(loss_kind_from_string("banana"), ConfigError);
}

TEST_CASE("cosine schedule hits the expected checkpoints") {
    CHECK(cosine_lr(0.1, 0, 100) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(cosine_lr(0.1, 50, 100) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(cosine_lr(0.1, 99, 100) < 0.001);
    CHECK_THROWS_AS(cosine_lr(0.1, 100, 100), ConfigError);
}

TEST_CASE("momentum sgd matches a hand unroll") {
    std::vector<double> p = {1.0};
    std::vector<double> g = {0.5};
    std::vector<double> v = {0.0};
    // step 1: v = 0.9*0 + (0.5 + 0.1*1.0) = 0.6; p = 1 - 0.2*0.6 = 0.88
    sgd_momentum_step(p, g, v, 0.2, 0.9, 0.1);
    CHECK(p[0] == doctest::Approx(0.88).epsilon(1e-15));
    CHECK(v[0] == doctest::Approx(0.6).epsilon(1e-15));
    // step 2: v = 0.9*0.6 + (0.5 + 0.088) = 1.128; p = 0.88 - 0.2*1.128
    sgd_momentum_step(p, g, v, 0.2, 0.9, 0.1);
    CHECK(v[0] == doctest::Approx(1.128).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.88 - 0.2 * 1.128).epsilon(1e-12));
    std::vector<double> wrong = {1.0, 2.0};
    CHECK_THROWS_AS(sgd_momentum_step(p, wrong, v, 0.1, 0.9, 0.0), ConfigError);
}

TEST_CASE("zero stage-1 epochs returns the freshly initialized model") {
    TrainConfig c = tiny_config();
    c.stage1.epochs = 0;
    Dataset ds = tiny_dataset();
    Stage1Result r = train_stage1(c, ds);
    CHECK(r.trajectory.empty());

    ModelSizes sizes;
    sizes.input_dim = ds.x.cols;
    sizes.encoder_hidden = c.encoder_hidden;
    sizes.partition = c.partition;
    ModelState expect = init_model(sizes, SeededRng::derive_seed(c.seed, 1), c.t0, c.b0);
    CHECK(state_hash(r.state) == state_hash(expect));
}

TEST_CASE("stage 1 is deterministic and records one row per epoch") {
    TrainConfig c = tiny_config();
    Dataset ds = tiny_dataset();
    Stage1Result a = train_stage1(c, ds);
    Stage1Result b = train_stage1(c, ds);
    CHECK(state_hash(a.state) == state_hash(b.state));
    REQUIRE(a.trajectory.size() == 2);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(a.trajectory[e].loss == b.trajectory[e].loss);
        CHECK(a.trajectory[e].t > 0.0);
    }
    c.seed = 99;
    Stage1Result d = train_stage1(c, ds);
    CHECK(state_hash(a.state) != state_hash(d.state));
}

TEST_CASE("stage 1 rejects single-class data and bad optimizer settings") {
    Dataset ds = tiny_dataset();
    for (int& l : ds.labels) l = 0;
    CHECK_THROWS_AS(train_stage1(tiny_config(), ds), ConfigError);
    TrainConfig c = tiny_config();
    c.stage1.lr = 0.0;
    CHECK_THROWS_AS(train_stage1(c, tiny_dataset()), ConfigError);
}

TEST_CASE("full run reports a sane accuracy and fixed seeds reproduce it") {
    TrainConfig c = tiny_config();
    Dataset ds = tiny_dataset();
    std::vector<std::size_t> train_idx, test_idx;
    std::vector<std::size_t> all(ds.x.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    stratified_holdout(ds, all, 0.25, 3, train_idx, test_idx);
    TrainedRun a = train_full(c, ds, train_idx, test_idx);
    TrainedRun b = train_full(c, ds, train_idx, test_idx);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.accuracy >= 0.0);
    CHECK(a.accuracy <= 1.0);
    CHECK(state_hash(a.state) == state_hash(b.state));
}

TEST_CASE("random search is deterministic, in-bounds, and keeps the first best on ties") {
    SearchSpace space;
    auto constant = [](double, double, double) { return 0.5; };
    SearchResult tie = random_search(space, 10, constant, 1);
    CHECK(tie.best.index == 0);

    std::vector<double> seen;
    auto record = [&](double t0, double b0, double beta) {
        CHECK(t0 >= space.t0_lo);
        CHECK(t0 <= space.t0_hi);
        CHECK(b0 >= space.b0_lo);
        CHECK(b0 < space.b0_hi);
        CHECK(beta >= space.beta_lo);
        CHECK(beta <= space.beta_hi);
        seen.push_back(t0);
        return t0;
    };
    SearchResult a = random_search(space, 8, record, 2);
    std::vector<double> first = seen;
    seen.clear();
    SearchResult b = random_search(space, 8, record, 2);
    CHECK(seen == first);
    CHECK(a.best.t0 == b.best.t0);
    double mx = 0.0;
    for (const auto& t : a.trials) mx = std::max(mx, t.objective);
    CHECK(a.best.objective == mx);
    CHECK_THROWS_AS(random_search(space, 0, constant, 1), ConfigError);
}

TEST_CASE("stratified holdout keeps every class in both splits") {
    Dataset ds = tiny_dataset();
    std::vector<std::size_t> all(ds.x.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::size_t> train_idx, val_idx;
    stratified_holdout(ds, all, 0.25, 5, train_idx, val_idx);
    CHECK(train_idx.size() + val_idx.size() == all.size());
    std::set<int> train_classes, val_classes;
    for (std::size_t i : train_idx) train_classes.insert(ds.labels[i]);
    for (std::size_t i : val_idx) val_classes.insert(ds.labels[i]);
    CHECK(train_classes.size() == 4);
    CHECK(val_classes.size() == 4);
    // 8 per class at fraction 0.25: exactly 2 held out per class.
    CHECK(val_idx.size() == 8);
    CHECK_THROWS_AS(stratified_holdout(ds, all, 0.0, 5, train_idx, val_idx), ConfigError);
}

TEST_CASE("intra-class style distance matches a hand value") {
    Matrix emb(3, 4);
    // common = first 2 cols, style = last 2
    emb.data = {0, 0, 0.0, 0.0,
                0, 0, 3.0, 4.0,
                0, 0, 0.0, 0.0};
    FieldPartition part{2, 2};
    // rows 0 and 1 share a class (distance 5); row 2 is alone (no positives).
    double d = mean_intra_class_style_distance(emb, {0, 0, 1}, part);
    CHECK(d == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(mean_intra_class_style_distance(emb, {0, 1, 2}, part) == 0.0);
    FieldPartition no_style{4, 0};
    CHECK(mean_intra_class_style_distance(emb, {0, 0, 1}, no_style) == 0.0);
}
