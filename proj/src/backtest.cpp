#include "kbahc/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <variant>

#include "kbahc/bahc.hpp"
#include "kbahc/baselines.hpp"
#include "kbahc/errors.hpp"
#include "kbahc/parallel.hpp"

namespace kbahc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Weights equal_weights(std::vector<std::string> assets) {
    const auto n = static_cast<Eigen::Index>(assets.size());
    return Weights{std::move(assets), Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))};
}

Weights optimize(const SymmetricMatrix& cov, bool long_only) {
    return long_only ? gmv_long_only(cov) : gmv_long_short(cov);
}

// Per-window seed so that replicas differ between rebalances.
EstimatorSpec reseed(const EstimatorSpec& spec, std::uint64_t salt) {
    if (const auto* k = std::get_if<KBahcSpec>(&spec)) {
        KBahcSpec copy = *k;
        copy.base_seed = replica_seed(k->base_seed, salt);
        return copy;
    }
    return spec;
}

struct WindowOutcome {
    bool gap = false;
    std::vector<std::string> assets;
    Eigen::MatrixXd out_sample;
    std::vector<std::optional<Weights>> weights;  // per estimator, EQ first
    std::vector<std::string> errors;
};

double lower_median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

double median_with_failures(std::vector<double> v) {
    if (v.empty()) return kNaN;
    for (double& x : v)
        if (!std::isfinite(x)) x = kInf;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    return std::isfinite(med) ? med : kNaN;
}

}  // namespace

void BacktestConfig::validate() const {
    if (dt_in < 2) throw ConfigError("dt_in must be >= 2");
    if (dt_out < 1) throw ConfigError("dt_out must be >= 1");
    if (!(cost_bps >= 0.0)) throw ConfigError("cost_bps must be >= 0");
    for (const auto& e : estimators) kbahc::validate(e);
}

double apply_costs(const Weights& previous_drifted, const Weights& next, double cost_bps) {
    if (!(cost_bps >= 0.0)) throw ConfigError("cost_bps must be >= 0");
    std::map<std::string, double> diff;
    for (std::size_t i = 0; i < previous_drifted.assets.size(); ++i)
        diff[previous_drifted.assets[i]] -= previous_drifted.values(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < next.assets.size(); ++i)
        diff[next.assets[i]] += next.values(static_cast<Eigen::Index>(i));
    double l1 = 0.0;
    for (const auto& [id, d] : diff) l1 += std::abs(d);
    return cost_bps / 1e4 * l1;
}

Weights drift_weights(const Weights& w, const Eigen::MatrixXd& out_sample) {
    if (out_sample.rows() != w.values.size())
        throw ConfigError("return block does not match the weight vector");
    Eigen::VectorXd growth = Eigen::VectorXd::Ones(w.values.size());
    for (Eigen::Index j = 0; j < out_sample.cols(); ++j)
        growth = growth.cwiseProduct((1.0 + out_sample.col(j).array()).matrix());
    Eigen::VectorXd held = w.values.cwiseProduct(growth);
    const double value = held.sum();
    if (value > 0.0) held /= value;
    return Weights{w.assets, held};
}

MetricRow summarize(const EstimatorRun& run, std::size_t dt_in) {
    MetricRow row;
    row.dt_in = dt_in;
    row.estimator = run.label;
    if (run.failed_windows > 0 || run.net.size() < 2) {
        row.realized_vol = row.sharpe = row.n_eff = row.n_90 = row.gross_leverage = row.gamma = kNaN;
        return row;
    }
    row.realized_vol = realized_volatility(run.net);
    row.sharpe = sharpe_ratio(run.net);

    std::vector<double> n_eff, n_90, leverage;
    for (const Weights& w : run.snapshots) {
        if (w.values.size() == 0) continue;
        const Concentration c = concentration(w);
        n_eff.push_back(c.n_eff);
        n_90.push_back(c.n_90);
        leverage.push_back(gross_leverage(w));
    }
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    row.n_eff = mean(n_eff);
    row.n_90 = lower_median(n_90);
    row.gross_leverage = mean(leverage);
    row.gamma = run.snapshots.size() >= 2 ? turnover_gamma(run.snapshots) : kNaN;
    return row;
}

BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& cfg) {
    cfg.validate();
    const auto& dates = panel.dates();
    std::size_t lo = 0;
    std::size_t hi = panel.n_dates();
    if (cfg.start) lo = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), *cfg.start) - dates.begin());
    if (cfg.end) hi = static_cast<std::size_t>(std::upper_bound(dates.begin(), dates.end(), *cfg.end) - dates.begin());
    const std::size_t span = hi > lo ? hi - lo : 0;
    if (span < cfg.dt_in + cfg.dt_out)
        throw ConfigError("panel spans " + std::to_string(span) + " dates, need at least dt_in + dt_out = " +
                          std::to_string(cfg.dt_in + cfg.dt_out));

    const std::size_t windows = (span - cfg.dt_in) / cfg.dt_out;
    const std::size_t n_est = cfg.estimators.size() + 1;

    // Phase 1: estimation and optimization, independent per (window, estimator).
    std::vector<WindowOutcome> outcomes(windows);
    for (std::size_t h = 0; h < windows; ++h) {
        const WindowSpec w{lo + cfg.dt_in + h * cfg.dt_out, cfg.dt_in, cfg.dt_out};
        WindowOutcome& o = outcomes[h];
        o.weights.resize(n_est);
        o.errors.resize(n_est);
        try {
            const auto universe = universe_at(panel, w);
            for (std::size_t a : universe) o.assets.push_back(panel.assets()[a]);
        } catch (const EmptyUniverseError&) {
            o.gap = true;
        }
    }
    parallel_for(windows * n_est, cfg.threads, [&](std::size_t task) {
        const std::size_t h = task / n_est;
        const std::size_t e = task % n_est;
        WindowOutcome& o = outcomes[h];
        if (o.gap) return;
        const WindowSpec w{lo + cfg.dt_in + h * cfg.dt_out, cfg.dt_in, cfg.dt_out};
        std::vector<std::size_t> idx;
        for (const auto& id : o.assets)
            idx.push_back(static_cast<std::size_t>(
                std::find(panel.assets().begin(), panel.assets().end(), id) - panel.assets().begin()));
        const WindowSlices s = slice(panel, w, idx);
        if (e == 0) {
            o.out_sample = s.out_sample;
            o.weights[0] = equal_weights(o.assets);
            return;
        }
        try {
            const EstimatorSpec spec = reseed(cfg.estimators[e - 1], w.t_end);
            SymmetricMatrix cov = estimate_covariance(spec, s.in_sample).with_labels(o.assets);
            o.weights[e] = optimize(cov, cfg.long_only);
        } catch (const NumericError& err) {
            o.errors[e] = err.what();
        }
    });

    // Phase 2: sequential accounting per estimator.
    BacktestReport report;
    report.dt_in = cfg.dt_in;
    report.windows = windows;
    for (const auto& o : outcomes) report.gaps += o.gap ? 1 : 0;
    for (std::size_t e = 0; e < n_est; ++e) {
        EstimatorRun run;
        run.label = e == 0 ? std::string(kEqualWeightLabel) : label(cfg.estimators[e - 1]);
        Weights holding;  // drifted allocation carried into the next rebalance
        for (std::size_t h = 0; h < windows; ++h) {
            const std::size_t t_end = lo + cfg.dt_in + h * cfg.dt_out;
            const WindowOutcome& o = outcomes[h];
            run.rebalance_dates.push_back(dates[t_end]);
            for (std::size_t d = 0; d < cfg.dt_out; ++d) run.days.push_back(dates[t_end + d]);

            const bool invested = !o.gap && o.weights[e].has_value();
            const Weights target = invested ? *o.weights[e] : Weights{};
            const double cost = apply_costs(holding, target, cfg.cost_bps);
            run.costs.push_back(cost);
            run.snapshots.push_back(target);
            run.failed.push_back(!o.gap && !invested);
            run.errors.push_back(o.errors.empty() ? std::string() : o.errors[e]);
            if (!o.gap && !invested) ++run.failed_windows;

            std::vector<double> daily(cfg.dt_out, 0.0);
            if (invested) {
                for (std::size_t d = 0; d < cfg.dt_out; ++d)
                    daily[d] = target.values.dot(o.out_sample.col(static_cast<Eigen::Index>(d)));
                holding = drift_weights(target, o.out_sample);
            } else {
                holding = Weights{};
            }
            for (std::size_t d = 0; d < cfg.dt_out; ++d) {
                run.gross.push_back(daily[d]);
                run.net.push_back(d == 0 ? daily[d] - cost : daily[d]);
            }
        }
        report.metrics.push_back(summarize(run, cfg.dt_in));
        report.runs.push_back(std::move(run));
    }

    // Per-year Sharpe ratios of the net returns.
    std::map<int, std::vector<std::vector<double>>> by_year;
    for (std::size_t e = 0; e < report.runs.size(); ++e) {
        const EstimatorRun& run = report.runs[e];
        for (std::size_t i = 0; i < run.days.size(); ++i) {
            auto& slot = by_year[static_cast<int>(run.days[i].year())];
            slot.resize(report.runs.size());
            slot[e].push_back(run.net[i]);
        }
    }
    report.yearly.sharpe = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(by_year.size()),
                                                     static_cast<Eigen::Index>(report.runs.size()), kNaN);
    for (const auto& run : report.runs) report.yearly.methods.push_back(run.label);
    Eigen::Index row = 0;
    for (const auto& [year, series] : by_year) {
        report.yearly.years.push_back(year);
        for (std::size_t e = 0; e < series.size(); ++e) {
            if (report.runs[e].failed_windows == 0 && series[e].size() >= 2)
                report.yearly.sharpe(row, static_cast<Eigen::Index>(e)) = sharpe_ratio(series[e]);
        }
        ++row;
    }
    return report;
}

void ExperimentConfig::validate() const {
    if (dt_in_grid.empty()) throw ConfigError("dt_in grid is empty");
    for (auto d : dt_in_grid)
        if (d < 2) throw ConfigError("dt_in must be >= 2");
    if (dt_out < 2) throw ConfigError("dt_out must be >= 2 to measure realized risk");
    if (n_assets < 1) throw ConfigError("n_assets must be >= 1");
    if (reps < 1) throw ConfigError("reps must be >= 1");
    if (include_kbahc) {
        if (k_grid.empty()) throw ConfigError("k grid is empty");
        for (int k : k_grid)
            if (k < 1) throw ConfigError("k must be >= 1");
        if (m < 1) throw ConfigError("m must be >= 1");
    }
    if (include_cv && cv_folds < 2) throw ConfigError("CV folds must be >= 2");
}

ExperimentResult random_experiment(const ReturnPanel& panel, const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::string> labels;
    if (cfg.include_eq) labels.emplace_back(kEqualWeightLabel);
    if (cfg.include_sample) labels.push_back(label(SampleSpec{}));
    if (cfg.include_cv) labels.push_back(label(CvSpec{cfg.cv_folds}));
    const std::size_t first_k = labels.size();
    if (cfg.include_kbahc)
        for (int k : cfg.k_grid) labels.push_back(label(KBahcSpec{k, cfg.m, 0}));

    const std::size_t n_grid = cfg.dt_in_grid.size();
    const auto reps = static_cast<std::size_t>(cfg.reps);
    // risk[g][r][e], NaN for failed estimators; empty when the repetition was skipped.
    std::vector<std::vector<std::vector<double>>> risk(n_grid, std::vector<std::vector<double>>(reps));

    parallel_for(n_grid * reps, cfg.threads, [&](std::size_t task) {
        const std::size_t g = task / reps;
        const std::size_t r = task % reps;
        const std::size_t dt_in = cfg.dt_in_grid[g];
        if (panel.n_dates() < dt_in + cfg.dt_out) return;
        std::mt19937_64 engine(replica_seed(replica_seed(cfg.seed, dt_in), r));
        std::uniform_int_distribution<std::size_t> pick_t(dt_in, panel.n_dates() - cfg.dt_out);

        std::vector<std::size_t> universe;
        WindowSpec w{};
        for (int attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
            w = WindowSpec{pick_t(engine), dt_in, cfg.dt_out};
            try {
                universe = universe_at(panel, w);
            } catch (const EmptyUniverseError&) {
                universe.clear();
            }
            if (universe.size() >= cfg.n_assets) break;
            universe.clear();
        }
        if (universe.empty()) return;

        std::vector<std::size_t> chosen;
        std::sample(universe.begin(), universe.end(), std::back_inserter(chosen),
                    static_cast<std::ptrdiff_t>(cfg.n_assets), engine);
        const WindowSlices s = slice(panel, w, chosen);
        const std::uint64_t boot_seed = engine();

        std::vector<double> out(labels.size(), kNaN);
        auto realized = [&](const SymmetricMatrix& cov) {
            const Weights wts = cfg.long_only ? gmv_long_only(cov) : gmv_long_short(cov);
            const Eigen::VectorXd daily = s.out_sample.transpose() * wts.values;
            return realized_volatility(std::span<const double>(daily.data(), static_cast<std::size_t>(daily.size())));
        };
        std::size_t e = 0;
        if (cfg.include_eq) {
            const Eigen::VectorXd daily =
                s.out_sample.colwise().mean().transpose();
            out[e++] = realized_volatility(std::span<const double>(daily.data(), static_cast<std::size_t>(daily.size())));
        }
        if (cfg.include_sample) {
            try {
                out[e] = realized(sample_estimator(s.in_sample));
            } catch (const NumericError&) {
            }
            ++e;
        }
        if (cfg.include_cv) {
            try {
                out[e] = realized(cv_eigenvalue_shrinkage(s.in_sample, cfg.cv_folds));
            } catch (const Error&) {
            }
            ++e;
        }
        if (cfg.include_kbahc) {
            try {
                const auto covs = kbahc_covariance_path(s.in_sample, cfg.k_grid,
                                                        BootstrapPlan{cfg.m, boot_seed, 1});
                for (std::size_t i = 0; i < covs.size(); ++i) {
                    try {
                        out[first_k + i] = realized(covs[i]);
                    } catch (const NumericError&) {
                    }
                }
            } catch (const NumericError&) {
            }
        }
        risk[g][r] = std::move(out);
    });

    ExperimentResult result;
    for (std::size_t g = 0; g < n_grid; ++g) {
        std::vector<std::size_t> done;
        for (std::size_t r = 0; r < reps; ++r) {
            if (risk[g][r].empty())
                ++result.skipped_reps;
            else
                done.push_back(r);
        }
        std::vector<double> medians(labels.size(), kNaN);
        for (std::size_t e = 0; e < labels.size(); ++e) {
            RiskRow row;
            row.dt_in = cfg.dt_in_grid[g];
            row.estimator = labels[e];
            std::vector<double> v;
            for (std::size_t r : done) {
                v.push_back(risk[g][r][e]);
                if (std::isfinite(risk[g][r][e]))
                    ++row.valid_reps;
                else
                    ++row.failed_reps;
            }
            row.median_risk = median_with_failures(v);
            medians[e] = row.median_risk;
            result.risk.push_back(row);
        }

        if (!cfg.include_kbahc) continue;
        KStarRow ks;
        ks.dt_in = cfg.dt_in_grid[g];
        std::vector<double> k_star;
        for (std::size_t r : done) {
            double best = kInf;
            int best_k = 0;
            for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
                const double v = risk[g][r][first_k + i];
                if (std::isfinite(v) && v < best) {
                    best = v;
                    best_k = cfg.k_grid[i];
                }
            }
            if (best_k > 0) k_star.push_back(best_k);
        }
        double best_median = kInf;
        for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
            const double v = medians[first_k + i];
            if (std::isfinite(v) && v < best_median) {
                best_median = v;
                ks.k_argmin_median = cfg.k_grid[i];
            }
        }
        if (k_star.empty()) {
            ks.mean_k_star = ks.sd_k_star = kNaN;
        } else {
            const double n = static_cast<double>(k_star.size());
            ks.mean_k_star = std::accumulate(k_star.begin(), k_star.end(), 0.0) / n;
            std::mt19937_64 engine(replica_seed(cfg.seed ^ 0x6b2a, ks.dt_in));
            std::uniform_int_distribution<std::size_t> pick(0, k_star.size() - 1);
            std::vector<double> means(static_cast<std::size_t>(std::max(cfg.kstar_bootstrap, 2)));
            for (double& mean : means) {
                double sum = 0.0;
                for (std::size_t i = 0; i < k_star.size(); ++i) sum += k_star[pick(engine)];
                mean = sum / n;
            }
            const double mm = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
            double ss = 0.0;
            for (double x : means) ss += (x - mm) * (x - mm);
            ks.sd_k_star = std::sqrt(ss / static_cast<double>(means.size() - 1));
        }
        result.k_star.push_back(ks);
    }
    return result;
}

std::vector<double> SpectraResult::ipr_of(const std::string& estimator) const {
    std::vector<double> out;
    for (const auto& p : points)
        if (p.estimator == estimator) out.push_back(p.ipr);
    return out;
}

SpectraResult spectra_experiment(const ReturnPanel& panel, const SpectraConfig& cfg) {
    if (cfg.dt_in < 2) throw ConfigError("dt_in must be >= 2");
    for (int k : cfg.k_list)
        if (k < 1) throw ConfigError("k must be >= 1");
    std::vector<std::size_t> t_ends = cfg.t_ends;
    if (t_ends.empty()) t_ends.push_back(panel.n_dates());

    SpectraResult result;
    if (cfg.include_sample) result.estimators.push_back(label(SampleSpec{}));
    if (cfg.include_null) result.estimators.emplace_back("null");
    if (cfg.include_cv) result.estimators.push_back(label(CvSpec{cfg.cv_folds}));
    for (int k : cfg.k_list) result.estimators.push_back(label(KBahcSpec{k, cfg.m, 0}));

    for (std::size_t w = 0; w < t_ends.size(); ++w) {
        const std::size_t t_end = t_ends[w];
        const auto universe = calibration_universe(panel, t_end, cfg.dt_in);
        if (universe.size() < 2) throw EmptyUniverseError("spectra window has fewer than 2 assets");
        Eigen::MatrixXd block(static_cast<Eigen::Index>(universe.size()), static_cast<Eigen::Index>(cfg.dt_in));
        for (std::size_t i = 0; i < universe.size(); ++i)
            block.row(static_cast<Eigen::Index>(i)) = panel.values()
                .row(static_cast<Eigen::Index>(universe[i]))
                .segment(static_cast<Eigen::Index>(t_end - cfg.dt_in), static_cast<Eigen::Index>(cfg.dt_in));

        std::vector<SymmetricMatrix> covs;
        if (cfg.include_sample) covs.push_back(sample_estimator(block));
        if (cfg.include_null)
            covs.push_back(sample_estimator(shuffled_null_panel(block, replica_seed(cfg.seed, 2 * w + 1))));
        if (cfg.include_cv) covs.push_back(cv_eigenvalue_shrinkage(block, cfg.cv_folds));
        if (!cfg.k_list.empty()) {
            auto bahc = kbahc_covariance_path(block, cfg.k_list,
                                              BootstrapPlan{cfg.m, replica_seed(cfg.seed, 2 * w), cfg.threads});
            for (auto& c : bahc) covs.push_back(std::move(c));
        }
        for (std::size_t e = 0; e < covs.size(); ++e) {
            const EigenSystem es = eigendecompose(covs[e]);
            const auto iprs = ipr(es);
            for (std::size_t i = 0; i < iprs.size(); ++i)
                result.points.push_back({result.estimators[e], w, es.values(static_cast<Eigen::Index>(i)), iprs[i]});
        }
    }
    return result;
}

}  // namespace kbahc
