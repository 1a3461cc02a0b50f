#include "scscl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace scscl {

namespace {

double gamma_ln(double x) { return std::lgamma(x); }

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        // series
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gamma_ln(a));
    }
    // continued fraction for Q(a, x)
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - gamma_ln(a)) * h;
    return 1.0 - q;
}

// Two-sided Studentized range q_alpha / sqrt(2), K = 2..20, infinite dof
// (the standard Nemenyi-test critical values).
constexpr double kQ005[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
                            3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517,
                            3.544};
constexpr double kQ010[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920,
                            2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291,
                            3.319};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "-" || cell == "\xE2\x80\x93";  // "-" or en dash
}

}  // namespace

double top1_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw ConfigError("top1_accuracy: need equal nonzero lengths");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw ConfigError("regularized_incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = gamma_ln(a + b) - gamma_ln(a) - gamma_ln(b) + a * std::log(x) +
                      b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    double x = dof / (dof + t * t);
    double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double chi_squared_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return gamma_p(dof / 2.0, x / 2.0);
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw ConfigError("paired_t_test: need equal lengths >= 2");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);

    TTestResult res;
    if (var == 0.0) {
        res.degenerate = true;
        if (mean == 0.0) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            res.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
            res.p = 0.0;
            res.significant_005 = true;
        }
        return res;
    }
    res.t = mean / std::sqrt(var / static_cast<double>(n));
    double dof = static_cast<double>(n - 1);
    res.p = 2.0 * (1.0 - student_t_cdf(std::abs(res.t), dof));
    res.significant_005 = res.p < 0.05;
    return res;
}

RankSummary average_ranks(const AccuracyMatrix& m) {
    const std::size_t k = m.methods.size();
    const std::size_t n = m.trials.size();
    if (k < 2 || n < 1) throw ConfigError("average_ranks: need K >= 2 and N >= 1");
    RankSummary out;
    out.methods = m.methods;
    out.ranks = Matrix(k, n);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return m.values(x, col) > m.values(y, col);
        });
        // mid-ranks for ties
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && m.values(order[j + 1], col) == m.values(order[i], col)) ++j;
            double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t q = i; q <= j; ++q) out.ranks(order[q], col) = mid;
            i = j + 1;
        }
    }
    out.average_ranks.resize(k);
    for (std::size_t row = 0; row < k; ++row) {
        double sum = 0.0;
        for (std::size_t col = 0; col < n; ++col) sum += out.ranks(row, col);
        out.average_ranks[row] = sum / static_cast<double>(n);
    }
    return out;
}

FriedmanResult friedman_statistic(const RankSummary& ranks, std::size_t k, std::size_t n) {
    if (k < 2 || n < 1) throw ConfigError("friedman_statistic: need K >= 2 and N >= 1");
    double sum_sq = 0.0;
    for (double r : ranks.average_ranks) sum_sq += r * r;
    double kd = static_cast<double>(k), nd = static_cast<double>(n);
    FriedmanResult res;
    res.chi_sq = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
    res.p = 1.0 - chi_squared_cdf(res.chi_sq, kd - 1.0);
    res.reject_005 = res.p < 0.05;
    return res;
}

double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
    if (k < 2 || k > 20)
        throw ConfigError("nemenyi_cd: K outside the embedded table range 2..20");
    if (n < 1) throw ConfigError("nemenyi_cd: N must be >= 1");
    const double* table;
    if (alpha == 0.05)
        table = kQ005;
    else if (alpha == 0.10)
        table = kQ010;
    else
        throw ConfigError("nemenyi_cd: alpha must be 0.05 or 0.10");
    double q = table[k - 2];
    double kd = static_cast<double>(k), nd = static_cast<double>(n);
    return q * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
}

CdReport cd_report(const AccuracyMatrix& m, double alpha) {
    CdReport report;
    report.ranks = average_ranks(m);
    const std::size_t k = m.methods.size(), n = m.trials.size();
    report.cd = nemenyi_cd(k, n, alpha);
    report.friedman = friedman_statistic(report.ranks, k, n);

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.ranks.average_ranks[a] < report.ranks.average_ranks[b];
    });
    // Maximal runs of methods whose rank span stays below one CD.
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && report.ranks.average_ranks[order[j + 1]] -
                                    report.ranks.average_ranks[order[i]] <
                                report.cd)
            ++j;
        CdGroup group;
        for (std::size_t q = i; q <= j; ++q) group.methods.push_back(m.methods[order[q]]);
        report.groups.push_back(std::move(group));
        i = (j == i) ? i + 1 : j + 1;
    }
    return report;
}

std::string format_cd_report(const CdReport& report) {
    std::ostringstream out;
    out << "method,average_rank\n";
    std::vector<std::size_t> order(report.ranks.methods.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.ranks.average_ranks[a] < report.ranks.average_ranks[b];
    });
    for (std::size_t idx : order)
        out << report.ranks.methods[idx] << "," << report.ranks.average_ranks[idx] << "\n";
    out << "\nchi_sq_F," << report.friedman.chi_sq << "\n";
    out << "friedman_p," << report.friedman.p << "\n";
    out << "reject_at_0.05," << (report.friedman.reject_005 ? "yes" : "no") << "\n";
    out << "critical_difference," << report.cd << "\n\n";
    for (std::size_t g = 0; g < report.groups.size(); ++g) {
        out << "group_" << g << ",";
        for (std::size_t i = 0; i < report.groups[g].methods.size(); ++i) {
            if (i) out << "|";
            out << report.groups[g].methods[i];
        }
        out << "\n";
    }
    return out.str();
}

AccuracyMatrix load_accuracy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_accuracy_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("load_accuracy_csv: empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2) throw ConfigError("load_accuracy_csv: need at least one trial column");

    AccuracyMatrix out;
    out.trials.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ConfigError("load_accuracy_csv: ragged row at line " + std::to_string(line_no));
        bool missing = false;
        std::vector<double> values;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (is_missing(cells[i])) {
                missing = true;
                break;
            }
            try {
                values.push_back(std::stod(cells[i]));
            } catch (const std::exception&) {
                throw ConfigError("load_accuracy_csv: non-numeric cell at line " +
                                  std::to_string(line_no));
            }
        }
        if (missing) {
            out.dropped_methods.push_back(cells[0]);
            continue;
        }
        out.methods.push_back(cells[0]);
        rows.push_back(std::move(values));
    }
    out.values = Matrix(out.methods.size(), out.trials.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < out.trials.size(); ++j) out.values(i, j) = rows[i][j];
    return out;
}

}  // namespace scscl
