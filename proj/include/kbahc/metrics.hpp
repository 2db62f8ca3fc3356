#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kbahc/matrix_core.hpp"
#include "kbahc/portfolio.hpp"

namespace kbahc {

/// Trading days per year used for every annualized figure.
inline constexpr double kTradingDaysPerYear = 252.0;

/// 1 / sum_j v_j^4 for a unit vector: 1 when fully localized, n when uniform.
/// Throws NumericError if |v| deviates from 1 by more than 1e-6.
double ipr(const Eigen::VectorXd& v);
std::vector<double> ipr(const EigenSystem& system);

/// Each row independently permuted; row marginals are preserved exactly.
Eigen::MatrixXd shuffled_null_panel(const Eigen::MatrixXd& returns, std::uint64_t seed);

/// Population standard deviation of daily returns times sqrt(252).
double realized_volatility(std::span<const double> daily);

/// mean / sd * sqrt(252) with a zero risk-free rate (moment estimator).
/// A zero-sd series gives +-infinity, or 0 if its mean is also zero.
double sharpe_ratio(std::span<const double> daily);

struct Concentration {
    double n_eff = 0.0;
    int n_90 = 0;
};

/// n_eff = 1 / sum w_i^2; n_90 = fewest names whose |w| cover 90% of sum |w|.
Concentration concentration(const Weights& w);

/// sum |w_i|.
double gross_leverage(const Weights& w);

/// Mean L1 distance between consecutive snapshots; assets missing from a
/// snapshot count as zero weight. Snapshots without asset ids are compared
/// by position.
double turnover_gamma(std::span<const Weights> history);

/// Sharpe ratios per year (rows) and method (columns); NaN marks a method
/// without a value that year.
struct YearlyScores {
    std::vector<int> years;
    std::vector<std::string> methods;
    Eigen::MatrixXd sharpe;
};

/// Each year: round to 2 decimals, dense-rank descending (ties share a rank).
/// Returns the mean rank per method over the years it has a value (NaN if never).
std::vector<double> yearly_dense_rank(const YearlyScores& scores);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
double ks_distance(std::vector<double> a, std::vector<double> b);

}  // namespace kbahc
