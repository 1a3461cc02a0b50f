// Command-line front end: dataset generation, two-stage training, beta
// sweeps, hyperparameter search, rank statistics, and gradient verification.
// Every artifact-producing command writes a manifest next to its outputs.
//
// Exit codes: 0 success, 2 config/format error, 3 divergence, 4 verification
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scscl/data.hpp"
#include "scscl/losses.hpp"
#include "scscl/model.hpp"
#include "scscl/stats.hpp"
#include "scscl/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scscl;

namespace {

constexpr const char* kToolVersion = "scscl 1.0.0";

void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw ConfigError("cannot open " + tmp);
        f << content;
    }
    fs::rename(tmp, path);
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[4096];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
        if (!f) break;
    }
    return h;
}

std::string iso_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct ManifestBuilder {
    json j;
    explicit ManifestBuilder(const std::string& command) {
        j["tool_version"] = kToolVersion;
        j["command"] = command;
        j["start_time"] = iso_now();
        j["inputs"] = json::array();
        j["outputs"] = json::object();
    }
    void input(const std::string& path) { j["inputs"].push_back(path); }
    void output(const std::string& path) { j["outputs"][path] = fnv1a_file(path); }
    void write(const std::string& path) {
        j["end_time"] = iso_now();
        write_atomic(path, j.dump(2) + "\n");
    }
};

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

SyntheticSpec spec_from_json(const json& j) {
    reject_unknown_keys(j, {"n_classes", "samples_per_class", "content_dim", "style_dim",
                            "observed_dim", "class_gap", "style_spread", "noise_sigma", "seed",
                            "preset"},
                        "spec");
    SyntheticSpec spec;
    if (j.contains("preset")) spec = preset_spec(j.at("preset").get<std::string>());
    if (j.contains("n_classes")) spec.n_classes = j.at("n_classes").get<std::size_t>();
    if (j.contains("samples_per_class"))
        spec.samples_per_class = j.at("samples_per_class").get<std::size_t>();
    if (j.contains("content_dim")) spec.content_dim = j.at("content_dim").get<std::size_t>();
    if (j.contains("style_dim")) spec.style_dim = j.at("style_dim").get<std::size_t>();
    if (j.contains("observed_dim")) spec.observed_dim = j.at("observed_dim").get<std::size_t>();
    if (j.contains("class_gap")) spec.class_gap = j.at("class_gap").get<double>();
    if (j.contains("style_spread")) spec.style_spread = j.at("style_spread").get<double>();
    if (j.contains("noise_sigma")) spec.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

TrainConfig config_from_json(const json& j) {
    reject_unknown_keys(j, {"version", "loss_kind", "tau", "alpha", "beta", "t0", "b0",
                            "stage1", "stage2", "views_per_sample", "aug_sigma", "seed",
                            "include_diagonal", "encoder_hidden", "projection_hidden",
                            "d_common", "d_style", "holdout_fraction"},
                        "config");
    if (j.contains("version") && j.at("version").get<int>() != 1)
        throw ConfigError("config: unknown version");
    TrainConfig c;
    if (j.contains("loss_kind"))
        c.loss_kind = loss_kind_from_string(j.at("loss_kind").get<std::string>());
    if (j.contains("tau")) c.hypers.tau = j.at("tau").get<double>();
    if (j.contains("alpha")) c.hypers.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) c.hypers.beta = j.at("beta").get<double>();
    if (j.contains("t0")) c.t0 = j.at("t0").get<double>();
    if (j.contains("b0")) c.b0 = j.at("b0").get<double>();
    auto read_stage = [&](const char* key, StageConfig& s, bool full) {
        if (!j.contains(key)) return;
        const json& sj = j.at(key);
        std::set<std::string> allowed = {"lr", "epochs", "batch_size"};
        if (full) {
            allowed.insert("momentum");
            allowed.insert("weight_decay");
        }
        reject_unknown_keys(sj, allowed, std::string("config.") + key);
        if (sj.contains("lr")) s.lr = sj.at("lr").get<double>();
        if (sj.contains("epochs")) s.epochs = sj.at("epochs").get<std::size_t>();
        if (sj.contains("batch_size")) s.batch_size = sj.at("batch_size").get<std::size_t>();
        if (full && sj.contains("momentum")) s.momentum = sj.at("momentum").get<double>();
        if (full && sj.contains("weight_decay"))
            s.weight_decay = sj.at("weight_decay").get<double>();
    };
    read_stage("stage1", c.stage1, true);
    read_stage("stage2", c.stage2, false);
    if (j.contains("views_per_sample"))
        c.views_per_sample = j.at("views_per_sample").get<std::size_t>();
    if (j.contains("aug_sigma")) c.aug_sigma = j.at("aug_sigma").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("include_diagonal")) c.include_diagonal = j.at("include_diagonal").get<bool>();
    if (j.contains("encoder_hidden"))
        c.encoder_hidden = j.at("encoder_hidden").get<std::vector<std::size_t>>();
    if (j.contains("projection_hidden"))
        c.projection_hidden = j.at("projection_hidden").get<std::size_t>();
    if (j.contains("d_common")) c.partition.d_common = j.at("d_common").get<std::size_t>();
    if (j.contains("d_style")) c.partition.d_style = j.at("d_style").get<std::size_t>();
    if (c.t0 <= 0.0) throw ConfigError("config: t0 must be > 0");
    return c;
}

json config_to_json(const TrainConfig& c) {
    return json{{"version", 1},
                {"loss_kind", to_string(c.loss_kind)},
                {"tau", c.hypers.tau},
                {"alpha", c.hypers.alpha},
                {"beta", c.hypers.beta},
                {"t0", c.t0},
                {"b0", c.b0},
                {"stage1",
                 {{"lr", c.stage1.lr},
                  {"epochs", c.stage1.epochs},
                  {"batch_size", c.stage1.batch_size},
                  {"momentum", c.stage1.momentum},
                  {"weight_decay", c.stage1.weight_decay}}},
                {"stage2",
                 {{"lr", c.stage2.lr},
                  {"epochs", c.stage2.epochs},
                  {"batch_size", c.stage2.batch_size}}},
                {"views_per_sample", c.views_per_sample},
                {"aug_sigma", c.aug_sigma},
                {"seed", c.seed},
                {"include_diagonal", c.include_diagonal},
                {"encoder_hidden", c.encoder_hidden},
                {"projection_hidden", c.projection_hidden},
                {"d_common", c.partition.d_common},
                {"d_style", c.partition.d_style}};
}

std::string trajectory_csv_string(const Trajectory& traj) {
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
    return out;
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& spec_arg, const std::string& out_path) {
    SyntheticSpec spec;
    if (fs::exists(spec_arg))
        spec = spec_from_json(load_json_file(spec_arg));
    else
        spec = preset_spec(spec_arg);  // preset name shorthand
    Dataset ds = generate(spec);

    ManifestBuilder manifest("generate");
    if (fs::exists(spec_arg)) manifest.input(spec_arg);

    save_csv(ds, out_path);
    save_sidecar(spec, out_path + ".meta.json");
    manifest.output(out_path);
    manifest.output(out_path + ".meta.json");
    manifest.j["seed"] = spec.seed;
    manifest.write(out_path + ".manifest.json");
    std::cout << "wrote " << out_path << " (" << ds.x.rows << " rows)\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, double holdout_fraction) {
    json cj = load_json_file(config_path);
    if (cj.contains("holdout_fraction"))
        holdout_fraction = cj.at("holdout_fraction").get<double>();
    TrainConfig config = config_from_json(cj);
    Dataset ds = load_csv(data_path);

    std::vector<std::size_t> all(ds.x.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::size_t> train_idx, test_idx;
    stratified_holdout(ds, all, holdout_fraction, SeededRng::derive_seed(config.seed, 7),
                       train_idx, test_idx);

    TrainedRun run = train_full(config, ds, train_idx, test_idx);

    fs::create_directories(out_dir);
    ManifestBuilder manifest("train");
    manifest.input(config_path);
    manifest.input(data_path);

    std::string ckpt = out_dir + "/checkpoint.json";
    save_checkpoint(run.state, config.seed, ckpt);
    std::string traj = out_dir + "/trajectory.csv";
    write_atomic(traj, trajectory_csv_string(run.trajectory));

    json results{{"config", config_to_json(config)},
                 {"seed", config.seed},
                 {"test_accuracy", run.accuracy},
                 {"final_t", run.state.boundary.t()},
                 {"final_b", run.state.boundary.b},
                 {"n_train", train_idx.size()},
                 {"n_test", test_idx.size()}};
    std::string results_path = out_dir + "/results.json";
    write_atomic(results_path, results.dump(2) + "\n");

    manifest.output(ckpt);
    manifest.output(traj);
    manifest.output(results_path);
    manifest.j["seed"] = config.seed;
    manifest.write(out_dir + "/manifest.json");
    std::cout << "test accuracy " << run.accuracy << "\n";
    return 0;
}

int cmd_sweep_beta(const std::string& config_path, const std::string& data_path,
                   const std::string& betas_arg, std::size_t n_seeds,
                   const std::string& out_path) {
    std::vector<double> betas;
    {
        std::stringstream ss(betas_arg);
        std::string cell;
        while (std::getline(ss, cell, ',')) betas.push_back(std::stod(cell));
    }
    if (betas.size() < 2) throw ConfigError("sweep-beta: need at least 2 beta values");

    TrainConfig base = config_from_json(load_json_file(config_path));
    Dataset ds = load_csv(data_path);
    std::vector<std::size_t> all(ds.x.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    std::string out = "beta,mean_accuracy,std_accuracy,n_seeds\n";
    char buf[96];
    for (double beta : betas) {
        std::vector<double> accs;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            TrainConfig c = base;
            c.hypers.beta = beta;
            c.seed = SeededRng::derive_seed(base.seed, 1000 + s);
            std::vector<std::size_t> train_idx, test_idx;
            stratified_holdout(ds, all, 0.2, SeededRng::derive_seed(c.seed, 7), train_idx,
                               test_idx);
            accs.push_back(train_full(c, ds, train_idx, test_idx).accuracy);
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        double sd = accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%zu\n", beta, mean, sd, n_seeds);
        out += buf;
    }
    ManifestBuilder manifest("sweep-beta");
    manifest.input(config_path);
    manifest.input(data_path);
    write_atomic(out_path, out);
    manifest.output(out_path);
    manifest.j["seed"] = base.seed;
    manifest.write(out_path + ".manifest.json");
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_search(std::size_t trials, const std::string& space_path,
               const std::string& config_path, const std::string& data_path,
               const std::string& out_path) {
    SearchSpace space;
    if (!space_path.empty()) {
        json sj = load_json_file(space_path);
        reject_unknown_keys(sj, {"t0_lo", "t0_hi", "b0_lo", "b0_hi", "beta_lo", "beta_hi"},
                            "space");
        if (sj.contains("t0_lo")) space.t0_lo = sj.at("t0_lo").get<double>();
        if (sj.contains("t0_hi")) space.t0_hi = sj.at("t0_hi").get<double>();
        if (sj.contains("b0_lo")) space.b0_lo = sj.at("b0_lo").get<double>();
        if (sj.contains("b0_hi")) space.b0_hi = sj.at("b0_hi").get<double>();
        if (sj.contains("beta_lo")) space.beta_lo = sj.at("beta_lo").get<double>();
        if (sj.contains("beta_hi")) space.beta_hi = sj.at("beta_hi").get<double>();
    }
    TrainConfig base = config_from_json(load_json_file(config_path));
    Dataset ds = load_csv(data_path);

    std::vector<std::size_t> all(ds.x.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    // Test split is carved once and never touched during the search.
    std::vector<std::size_t> dev_idx, test_idx;
    stratified_holdout(ds, all, 0.2, SeededRng::derive_seed(base.seed, 7), dev_idx, test_idx);
    std::vector<std::size_t> train_idx, val_idx;
    stratified_holdout(ds, dev_idx, 0.2, SeededRng::derive_seed(base.seed, 8), train_idx,
                       val_idx);

    auto objective = [&](double t0, double b0, double beta) {
        TrainConfig c = base;
        c.t0 = t0;
        c.b0 = b0;
        c.hypers.beta = beta;
        return train_full(c, ds, train_idx, val_idx).accuracy;
    };
    SearchResult result =
        random_search(space, trials, objective, SeededRng::derive_seed(base.seed, 9));

    // Final retrain on the full dev split with the best configuration.
    TrainConfig best = base;
    best.t0 = result.best.t0;
    best.b0 = result.best.b0;
    best.hypers.beta = result.best.beta;
    TrainedRun final_run = train_full(best, ds, dev_idx, test_idx);

    json trials_json = json::array();
    for (const auto& t : result.trials)
        trials_json.push_back({{"index", t.index},
                               {"t0", t.t0},
                               {"b0", t.b0},
                               {"beta", t.beta},
                               {"validation_accuracy", t.objective}});
    json out{{"best",
              {{"index", result.best.index},
               {"t0", result.best.t0},
               {"b0", result.best.b0},
               {"beta", result.best.beta},
               {"validation_accuracy", result.best.objective}}},
             {"trials", trials_json},
             {"final_test_accuracy", final_run.accuracy},
             {"test_rows_touched_during_search", false},
             {"n_train", train_idx.size()},
             {"n_val", val_idx.size()},
             {"n_test", test_idx.size()},
             {"config", config_to_json(base)}};

    ManifestBuilder manifest("search");
    manifest.input(config_path);
    manifest.input(data_path);
    if (!space_path.empty()) manifest.input(space_path);
    write_atomic(out_path, out.dump(2) + "\n");
    manifest.output(out_path);
    manifest.j["seed"] = base.seed;
    manifest.write(out_path + ".manifest.json");
    std::cout << "best t0=" << result.best.t0 << " b0=" << result.best.b0
              << " beta=" << result.best.beta << " final test accuracy "
              << final_run.accuracy << "\n";
    return 0;
}

int cmd_stats(const std::string& matrix_path, double alpha, const std::string& out_dir) {
    AccuracyMatrix m = load_accuracy_csv(matrix_path);
    for (const auto& name : m.dropped_methods)
        std::cerr << "warning: dropping method '" << name << "' (missing cells)\n";
    if (m.methods.size() < 2) throw ConfigError("stats: need at least 2 complete methods");

    CdReport report = cd_report(m, alpha);
    fs::create_directories(out_dir);
    ManifestBuilder manifest("stats");
    manifest.input(matrix_path);

    std::string report_path = out_dir + "/cd_report.txt";
    write_atomic(report_path, format_cd_report(report));

    // Pairwise paired t-tests of the best-ranked method against the rest.
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.methods.size(); ++i)
        if (report.ranks.average_ranks[i] < report.ranks.average_ranks[best]) best = i;
    std::string tt = "method_a,method_b,t,p,significant_at_0.05,degenerate\n";
    char buf[160];
    std::vector<double> a_vals(m.trials.size());
    for (std::size_t j = 0; j < m.trials.size(); ++j) a_vals[j] = m.values(best, j);
    for (std::size_t i = 0; i < m.methods.size(); ++i) {
        if (i == best) continue;
        std::vector<double> b_vals(m.trials.size());
        for (std::size_t j = 0; j < m.trials.size(); ++j) b_vals[j] = m.values(i, j);
        TTestResult r = paired_t_test(a_vals, b_vals);
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%s,%s\n", m.methods[best].c_str(),
                      m.methods[i].c_str(), r.t, r.p, r.significant_005 ? "yes" : "no",
                      r.degenerate ? "yes" : "no");
        tt += buf;
    }
    std::string tt_path = out_dir + "/t_tests.csv";
    write_atomic(tt_path, tt);

    manifest.output(report_path);
    manifest.output(tt_path);
    manifest.write(out_dir + "/manifest.json");
    std::cout << format_cd_report(report);
    return 0;
}

int cmd_gradcheck(const std::string& loss_arg, std::size_t trials, std::uint64_t seed,
                  bool corrupt) {
    std::vector<LossKind> kinds;
    if (loss_arg == "all")
        kinds = {LossKind::SupCon, LossKind::CsSupCon, LossKind::ScsSupCon};
    else
        kinds = {loss_kind_from_string(loss_arg)};

    SeededRng rng(seed);
    bool ok = true;
    for (LossKind kind : kinds) {
        double worst_z = 0.0, worst_t = 0.0, worst_b = 0.0;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            std::size_t b_opts[] = {4, 8, 16};
            std::size_t d_opts[] = {8, 16};
            std::size_t b = b_opts[rng.next_below(3)];
            std::size_t dp = d_opts[rng.next_below(2)];
            FieldPartition part{3 * dp / 4, dp - 3 * dp / 4};
            EmbeddingBatch batch;
            batch.partition = kind == LossKind::SupCon ? FieldPartition{dp, 0} : part;
            batch.z = Matrix(b, dp);
            for (double& v : batch.z.data) v = rng.gaussian();
            batch.labels.resize(b);
            for (std::size_t i = 0; i < b; ++i)
                batch.labels[i] = static_cast<int>(i % std::max<std::size_t>(2, b / 2));
            BoundaryParams params;
            params.t_log = rng.uniform(-3.0, 0.5);
            params.b = rng.uniform(-0.5, 0.5);
            ScalarHypers hypers;
            hypers.tau = 0.2;
            hypers.alpha = 0.1;
            hypers.beta = 1e-2;

            LossOutput analytic;
            LossClosure closure;
            switch (kind) {
                case LossKind::SupCon:
                    analytic = supcon_loss(batch.z, batch.labels, hypers.tau);
                    closure = [&](const Matrix& z, double, double) {
                        return supcon_loss(z, batch.labels, hypers.tau).value;
                    };
                    break;
                case LossKind::CsSupCon:
                    analytic = cs_supcon_loss(batch, hypers);
                    closure = [&](const Matrix& z, double, double) {
                        EmbeddingBatch eb{z, batch.labels, batch.partition};
                        return cs_supcon_loss(eb, hypers).value;
                    };
                    break;
                case LossKind::ScsSupCon:
                    analytic = scs_supcon_loss(batch, params, hypers);
                    closure = [&](const Matrix& z, double t_log, double bias) {
                        EmbeddingBatch eb{z, batch.labels, batch.partition};
                        BoundaryParams p{t_log, bias};
                        return scs_supcon_loss(eb, p, hypers).value;
                    };
                    break;
            }
            if (corrupt)
                for (double& g : analytic.grad_z.data) g += 0.5;
            FdReport rep = finite_difference_check(closure, analytic, batch.z, params);
            worst_z = std::max(worst_z, rep.max_rel_z);
            worst_t = std::max(worst_t, rep.max_rel_t_log);
            worst_b = std::max(worst_b, rep.max_rel_b);
        }
        std::printf("%-10s  max_rel(z)=%.3e  max_rel(t')=%.3e  max_rel(b)=%.3e\n",
                    to_string(kind).c_str(), worst_z, worst_t, worst_b);
        if (worst_z > 1e-5 || worst_t > 1e-5 || worst_b > 1e-5) ok = false;
    }
    if (!ok) {
        std::cerr << "gradient check failed (tolerance 1e-5)\n";
        return 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SCS-SupCon reference implementation"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string spec_arg, out_path, config_path, data_path, out_dir, betas_arg, space_path,
        matrix_path, loss_arg = "all";
    std::size_t n_seeds = 3, trials = 30;
    std::uint64_t seed = 0;
    double alpha = 0.05, holdout = 0.2;
    bool corrupt = false;

    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset CSV");
    gen->add_option("--spec", spec_arg, "Spec JSON path or preset name (easy, fine-grained)")
        ->required();
    gen->add_option("--out", out_path, "Output CSV path")->required();

    auto* train = app.add_subcommand("train", "Two-stage training on a dataset CSV");
    train->add_option("--config", config_path, "Config JSON")->required();
    train->add_option("--data", data_path, "Dataset CSV")->required();
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_option("--holdout", holdout, "Test holdout fraction (default 0.2)");

    auto* sweep = app.add_subcommand("sweep-beta", "Accuracy vs beta sweep");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--data", data_path)->required();
    sweep->add_option("--betas", betas_arg, "Comma-separated beta values")->required();
    sweep->add_option("--seeds", n_seeds, "Seeds per beta (default 3)");
    sweep->add_option("--out", out_path, "Output CSV")->required();

    auto* search = app.add_subcommand("search", "Random search over (t0, b0, beta)");
    search->add_option("--trials", trials, "Number of trials (default 30)");
    search->add_option("--space", space_path, "Search-space JSON (optional)");
    search->add_option("--config", config_path)->required();
    search->add_option("--data", data_path)->required();
    search->add_option("--out", out_path, "Output JSON")->required();

    auto* stats = app.add_subcommand("stats", "Rank statistics on an accuracy matrix");
    stats->add_option("--matrix", matrix_path, "Accuracy matrix CSV")->required();
    stats->add_option("--alpha", alpha, "Significance level (0.05 or 0.10)");
    stats->add_option("--out", out_dir, "Output directory")->required();

    auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    grad->add_option("--loss", loss_arg, "supcon, cs_supcon, scs_supcon, or all");
    grad->add_option("--trials", trials, "Random instances per loss (default 30)");
    grad->add_option("--seed", seed);
    grad->add_flag("--corrupt", corrupt, "Deliberately corrupt gradients (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(spec_arg, out_path);
        if (train->parsed()) return cmd_train(config_path, data_path, out_dir, holdout);
        if (sweep->parsed())
            return cmd_sweep_beta(config_path, data_path, betas_arg, n_seeds, out_path);
        if (search->parsed())
            return cmd_search(trials, space_path, config_path, data_path, out_path);
        if (stats->parsed()) return cmd_stats(matrix_path, alpha, out_dir);
        if (grad->parsed()) return cmd_gradcheck(loss_arg, trials, seed, corrupt);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const VerificationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
