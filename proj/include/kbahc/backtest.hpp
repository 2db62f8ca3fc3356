#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kbahc/data_io.hpp"
#include "kbahc/estimators.hpp"
#include "kbahc/metrics.hpp"
#include "kbahc/portfolio.hpp"

namespace kbahc {

inline constexpr const char* kEqualWeightLabel = "EQ";

struct BacktestConfig {
    std::size_t dt_in = 252;
    std::size_t dt_out = 21;
    double cost_bps = 2.0;
    bool long_only = false;
    std::vector<EstimatorSpec> estimators;
    std::optional<Date> start;
    std::optional<Date> end;
    unsigned threads = 1;

    void validate() const;
};

/// Aggregated statistics of one estimator at one calibration length.
/// Missing values are NaN.
struct MetricRow {
    std::size_t dt_in = 0;
    std::string estimator;
    double realized_vol = 0.0;  // annualized
    double sharpe = 0.0;        // annualized moment estimator
    double n_eff = 0.0;         // mean over rebalances
    double n_90 = 0.0;          // lower median over rebalances
    double gross_leverage = 0.0;  // mean over rebalances
    double gamma = 0.0;         // mean L1 turnover between rebalances
};

/// One estimator's path through the backtest. Gross and net daily returns
/// are aligned with `days`; one snapshot per rebalance. A failed or empty
/// window holds cash (empty snapshot, zero returns).
struct EstimatorRun {
    std::string label;
    std::vector<Date> days;
    std::vector<double> gross;
    std::vector<double> net;
    std::vector<Date> rebalance_dates;
    std::vector<Weights> snapshots;
    std::vector<double> costs;
    std::vector<char> failed;
    std::vector<std::string> errors;
    int failed_windows = 0;
};

struct BacktestReport {
    std::size_t dt_in = 0;
    std::size_t windows = 0;
    std::size_t gaps = 0;  // windows with an empty universe
    std::vector<EstimatorRun> runs;  // EQ first, then cfg.estimators order
    std::vector<MetricRow> metrics;
    YearlyScores yearly;
};

/// Transaction cost as a fraction of wealth: cost_bps / 1e4 times the L1
/// distance between the drifted previous weights and the new weights,
/// matched by asset id (absent assets weigh zero).
double apply_costs(const Weights& previous_drifted, const Weights& next, double cost_bps);

/// Previous weights carried to the end of the test window by the realized
/// gross returns of each asset (n x days), renormalized to the portfolio value.
Weights drift_weights(const Weights& w, const Eigen::MatrixXd& out_sample);

/// Rolling GMV backtest stepping the rebalance date by dt_out over the
/// panel (or [start, end]). The number of windows is
/// floor((span - dt_in) / dt_out).
BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& cfg);

/// Metrics of one run; NaN when the run has failed windows.
MetricRow summarize(const EstimatorRun& run, std::size_t dt_in);

struct ExperimentConfig {
    std::vector<std::size_t> dt_in_grid{60};
    std::size_t dt_out = 21;
    std::size_t n_assets = 100;
    int reps = 200;
    std::uint64_t seed = 0;
    bool long_only = false;
    std::vector<int> k_grid{1, 2, 3, 4, 7, 11, 18, 30};
    int m = 100;
    int cv_folds = 10;
    bool include_sample = true;
    bool include_cv = true;
    bool include_kbahc = true;
    bool include_eq = true;
    int max_redraws = 20;
    int kstar_bootstrap = 1000;
    unsigned threads = 1;

    void validate() const;
};

struct RiskRow {
    std::size_t dt_in = 0;
    std::string estimator;
    double median_risk = 0.0;  // NaN when most repetitions failed
    int valid_reps = 0;
    int failed_reps = 0;
};

struct KStarRow {
    std::size_t dt_in = 0;
    double mean_k_star = 0.0;
    double sd_k_star = 0.0;       // bootstrap over repetitions
    int k_argmin_median = 0;      // k with the lowest median realized risk
};

struct ExperimentResult {
    std::vector<RiskRow> risk;
    std::vector<KStarRow> k_star;
    int skipped_reps = 0;
};

/// Random assets, random periods: for each calibration length and
/// repetition, draw a rebalance date and an n_assets subset of the eligible
/// universe, then record the annualized out-of-sample risk of every
/// estimator's GMV portfolio. Failed estimators count as infinite risk in
/// the median.
ExperimentResult random_experiment(const ReturnPanel& panel, const ExperimentConfig& cfg);

struct SpectraConfig {
    std::vector<std::size_t> t_ends;  // empty: last date of the panel
    std::size_t dt_in = 252;
    std::vector<int> k_list{1, 2, 4, 11};
    int m = 100;
    bool include_sample = true;
    bool include_cv = false;
    int cv_folds = 10;
    bool include_null = true;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct SpectrumPoint {
    std::string estimator;
    std::size_t window = 0;
    double eigenvalue = 0.0;
    double ipr = 0.0;
};

struct SpectraResult {
    std::vector<std::string> estimators;  // "Sample", "null", "<k>-BAHC", ...
    std::vector<SpectrumPoint> points;

    /// Pooled IPR values of one estimator across windows.
    std::vector<double> ipr_of(const std::string& estimator) const;
};

/// Eigenvalues and IPRs of each cleaned covariance over the calibration
/// window(s), including a null obtained by shuffling every asset's returns.
SpectraResult spectra_experiment(const ReturnPanel& panel, const SpectraConfig& cfg);

}  // namespace kbahc
