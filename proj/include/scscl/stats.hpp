#pragma once

#include <string>
#include <vector>

#include "scscl/matrix.hpp"

namespace scscl {

/// Methods x trials accuracy table feeding the rank tests.
struct AccuracyMatrix {
    std::vector<std::string> methods;
    std::vector<std::string> trials;
    Matrix values;  // K x N
    // Methods dropped on ingestion because of missing cells.
    std::vector<std::string> dropped_methods;
};

double top1_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    bool significant_005 = false;
    bool degenerate = false;  // zero-variance differences
};

/// Two-sided paired t-test; p from the t CDF via the regularized incomplete
/// beta function.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct RankSummary {
    std::vector<std::string> methods;
    Matrix ranks;  // K x N, mid-ranks, 1 = best accuracy
    std::vector<double> average_ranks;  // per method
};

RankSummary average_ranks(const AccuracyMatrix& m);

struct FriedmanResult {
    double chi_sq = 0.0;
    double p = 1.0;
    bool reject_005 = false;
};

/// chi^2_F = 12N/(K(K+1)) [sum R_j^2 - K(K+1)^2/4], K-1 degrees of freedom.
FriedmanResult friedman_statistic(const RankSummary& ranks, std::size_t k, std::size_t n);

/// Nemenyi critical difference q_alpha sqrt(K(K+1)/(6N)); alpha must be 0.05
/// or 0.10, K in 2..20 (range of the embedded Studentized-range table).
double nemenyi_cd(std::size_t k, std::size_t n, double alpha);

struct CdGroup {
    std::vector<std::string> methods;  // within one CD of each other, rank order
};

struct CdReport {
    RankSummary ranks;
    double cd = 0.0;
    FriedmanResult friedman;
    std::vector<CdGroup> groups;
};

CdReport cd_report(const AccuracyMatrix& m, double alpha);

std::string format_cd_report(const CdReport& report);

/// CSV: header row of trial names, first column method names. Cells that are
/// empty or "-" drop the whole method row (recorded in dropped_methods).
AccuracyMatrix load_accuracy_csv(const std::string& path);

// Special-function plumbing, exposed for the test oracles.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
double chi_squared_cdf(double x, double dof);

}  // namespace scscl
