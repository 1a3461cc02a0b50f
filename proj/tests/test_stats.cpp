#include <doctest.h>

#include <cmath>

#include "scscl/rng.hpp"
#include "scscl/stats.hpp"

using namespace scscl;

namespace {

AccuracyMatrix make_matrix(std::vector<std::string> methods, std::size_t n,
                           std::vector<double> values) {
    AccuracyMatrix m;
    m.methods = std::move(methods);
    for (std::size_t j = 0; j < n; ++j) m.trials.push_back("d" + std::to_string(j));
    m.values = Matrix(m.methods.size(), n);
    m.values.data = std::move(values);
    return m;
}

}  // namespace

TEST_CASE("top-1 accuracy") {
    CHECK(top1_accuracy({0, 1, 2, 1}, {0, 1, 1, 1}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(top1_accuracy({0}, {0, 1}), ConfigError);
}

TEST_CASE("average ranks use mid-ranks for ties") {
    // trial 0: 3 > 2 = 2 -> ranks 1, 2.5, 2.5
    // trial 1: 1 < 2 < 3 -> ranks 3, 2, 1
    AccuracyMatrix m = make_matrix({"a", "b", "c"}, 2, {3, 1, 2, 2, 2, 3});
    RankSummary r = average_ranks(m);
    CHECK(r.ranks(0, 0) == doctest::Approx(1.0));
    CHECK(r.ranks(1, 0) == doctest::Approx(2.5));
    CHECK(r.ranks(2, 0) == doctest::Approx(2.5));
    CHECK(r.average_ranks[0] == doctest::Approx(2.0));
    CHECK(r.average_ranks[1] == doctest::Approx(2.25));
    CHECK(r.average_ranks[2] == doctest::Approx(1.75));
}

TEST_CASE("friedman statistic on a hand case") {
    // K=2, N=2, method a wins both trials: R_a=1, R_b=2.
    // chi^2 = 12*2/(2*3) * (1 + 4 - 2*9/4) = 4 * 0.5 = 2.
    AccuracyMatrix m = make_matrix({"a", "b"}, 2, {0.9, 0.8, 0.5, 0.6});
    RankSummary r = average_ranks(m);
    FriedmanResult f = friedman_statistic(r, 2, 2);
    CHECK(f.chi_sq == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.p > 0.05);
}

TEST_CASE("friedman matches a brute-force evaluation on random data") {
    SeededRng rng(1);
    const std::size_t k = 6, n = 9;
    std::vector<double> vals(k * n);
    for (double& v : vals) v = rng.uniform(0.0, 1.0);
    AccuracyMatrix m = make_matrix({"m0", "m1", "m2", "m3", "m4", "m5"}, n, std::move(vals));
    RankSummary r = average_ranks(m);

    // Independent ranking: count wins/ties per column.
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < k; ++i) {
            double rank = 1.0;
            for (std::size_t o = 0; o < k; ++o) {
                if (o == i) continue;
                if (m.values(o, j) > m.values(i, j)) rank += 1.0;
                else if (m.values(o, j) == m.values(i, j)) rank += 0.5;
            }
            CHECK(r.ranks(i, j) == doctest::Approx(rank).epsilon(1e-12));
        }

    double sum_r2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum_r2 += r.average_ranks[i] * r.average_ranks[i];
    double expect = 12.0 * n / (k * (k + 1.0)) * (sum_r2 - k * (k + 1.0) * (k + 1.0) / 4.0);
    FriedmanResult f = friedman_statistic(r, k, n);
    CHECK(f.chi_sq == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("student t cdf agrees with standard table values") {
    CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_cdf(2.7764451051977987, 4.0) == doctest::Approx(0.975).epsilon(1e-6));
    CHECK(student_t_cdf(12.706204736432095, 1.0) == doctest::Approx(0.975).epsilon(1e-6));
    CHECK(student_t_cdf(-1.8124611228107335, 10.0) == doctest::Approx(0.05).epsilon(1e-5));
}

TEST_CASE("chi-squared cdf agrees with standard table values") {
    CHECK(chi_squared_cdf(3.841458820694124, 1.0) == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(chi_squared_cdf(5.991464547107979, 2.0) == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(chi_squared_cdf(23.684791304840576, 14.0) == doctest::Approx(0.95).epsilon(1e-6));
}

TEST_CASE("paired t-test matches a reference computation") {
    // differences {1,2,3,4}: t = 2.5 / (sd/2), sd = sqrt(5/3); p ~ 0.030466
    std::vector<double> a = {2, 4, 6, 8};
    std::vector<double> b = {1, 2, 3, 4};
    TTestResult r = paired_t_test(a, b);
    CHECK(r.t == doctest::Approx(2.5 / (std::sqrt(5.0 / 3.0) / 2.0)).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.030466291662170977).epsilon(1e-6));
    CHECK(r.significant_005);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("degenerate paired t-tests are flagged") {
    std::vector<double> a = {1, 2, 3};
    TTestResult same = paired_t_test(a, a);
    CHECK(same.degenerate);
    CHECK(same.p == 1.0);
    std::vector<double> b = {2, 3, 4};  // constant nonzero difference
    TTestResult shifted = paired_t_test(b, a);
    CHECK(shifted.degenerate);
    CHECK(shifted.p == 0.0);
    CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("nemenyi critical difference values and scaling") {
    // q_0.05 for K=2 is 1.960: CD(2, 8) = 1.960 sqrt(6/48) = 0.6930
    CHECK(nemenyi_cd(2, 8, 0.05) == doctest::Approx(0.69296).epsilon(1e-3));
    CHECK(nemenyi_cd(15, 6, 0.05) == doctest::Approx(8.7555).epsilon(1e-3));
    // quadrupling N halves the CD
    CHECK(nemenyi_cd(5, 40, 0.05) ==
          doctest::Approx(nemenyi_cd(5, 10, 0.05) / 2.0).epsilon(1e-12));
    CHECK(nemenyi_cd(5, 10, 0.10) < nemenyi_cd(5, 10, 0.05));
    CHECK_THROWS_AS(nemenyi_cd(1, 6, 0.05), ConfigError);
    CHECK_THROWS_AS(nemenyi_cd(21, 6, 0.05), ConfigError);
    CHECK_THROWS_AS(nemenyi_cd(5, 6, 0.01), ConfigError);
}

TEST_CASE("cd report groups methods within one critical difference") {
    // Two clear clusters far apart with N large enough for a small CD.
    const std::size_t n = 30;
    std::vector<double> vals;
    std::vector<std::string> methods = {"good1", "good2", "bad1", "bad2"};
    SeededRng rng(2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < n; ++j)
            vals.push_back((i < 2 ? 0.9 : 0.1) + 0.01 * rng.uniform(0.0, 1.0));
    AccuracyMatrix m = make_matrix(methods, n, std::move(vals));
    CdReport rep = cd_report(m, 0.05);
    CHECK(rep.friedman.reject_005);
    REQUIRE(rep.groups.size() >= 2);
    // The top group contains both good methods and no bad ones.
    bool good_together = false;
    for (const auto& g : rep.groups) {
        bool has_good = false, has_bad = false;
        for (const auto& name : g.methods) {
            if (name.rfind("good", 0) == 0) has_good = true;
            if (name.rfind("bad", 0) == 0) has_bad = true;
        }
        if (has_good && !has_bad && g.methods.size() == 2) good_together = true;
        CHECK_FALSE((has_good && has_bad));
    }
    CHECK(good_together);
    std::string text = format_cd_report(rep);
    CHECK(text.find("good1") != std::string::npos);
    CHECK(text.find("critical_difference") != std::string::npos);
}

TEST_CASE("accuracy csv ingestion drops methods with missing cells") {
    AccuracyMatrix m =
        load_accuracy_csv(std::string(SCSCL_FIXTURES_DIR) + "/accuracy_six_datasets.csv");
    CHECK(m.methods.size() == 15);
    CHECK(m.trials.size() == 6);
    REQUIRE(m.dropped_methods.size() == 1);
    CHECK(m.dropped_methods[0] == "SelfCon");
    for (const auto& name : m.methods) CHECK(name != "SelfCon");
    // spot-check a couple of cells
    bool found = false;
    for (std::size_t i = 0; i < m.methods.size(); ++i)
        if (m.methods[i] == "SCS-SupCon") {
            found = true;
            CHECK(m.values(i, 0) == 95.9);
            CHECK(m.values(i, 5) == 53.8);
        }
    CHECK(found);
}
