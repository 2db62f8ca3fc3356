#include "kbahc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "kbahc/backtest.hpp"
#include "kbahc/data_io.hpp"
#include "kbahc/errors.hpp"
#include "kbahc/estimators.hpp"
#include "kbahc/matrix_core.hpp"
#include "kbahc/metrics.hpp"

namespace kbahc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<int> kDefaultKGrid{1, 2, 3, 4, 7, 11, 18, 30};
const std::set<std::string> kKnownEstimators{"sample", "cv", "kbahc"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

std::string csv_number(double v) { return format_double(v); }

ReturnPanel load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("no input panel given (--input)");
    if (!fs::exists(cfg.input)) throw ConfigError("input file '" + cfg.input + "' not found");
    return load_panel(cfg.input, parse_panel_kind(cfg.input_kind));
}

std::vector<std::string> estimator_tokens(const RunConfig& cfg) {
    std::vector<std::string> tokens;
    for (const auto& e : cfg.estimators) tokens.push_back(lower(e));
    if (tokens.empty()) tokens = {"sample", "cv", "kbahc"};
    for (const auto& t : tokens)
        if (!kKnownEstimators.contains(t))
            throw ConfigError("unknown estimator '" + t + "' (expected sample, cv or kbahc)");
    return tokens;
}

bool has_token(const std::vector<std::string>& tokens, const std::string& t) {
    return std::find(tokens.begin(), tokens.end(), t) != tokens.end();
}

std::vector<int> k_grid(const RunConfig& cfg) { return cfg.k.empty() ? kDefaultKGrid : cfg.k; }

std::size_t end_index(const ReturnPanel& panel, const RunConfig& cfg) {
    if (cfg.t_end.empty()) return panel.n_dates();
    const Date d = parse_date(cfg.t_end);
    const auto& dates = panel.dates();
    return static_cast<std::size_t>(std::upper_bound(dates.begin(), dates.end(), d) - dates.begin());
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + cfg.out + "': " + ec.message());
    return dir;
}

void write_config(const fs::path& dir, const RunConfig& cfg, const std::string& command) {
    ordered_json j;
    j["command"] = command;
    j["config"] = cfg.to_json();
    j["conventions"] = {{"returns", "simple close-to-close"},
                        {"covariance_divisor", "t"},
                        {"trading_days_per_year", kTradingDaysPerYear},
                        {"risk_free_rate", 0.0},
                        {"sharpe", "moment estimator mean/sd*sqrt(252)"},
                        {"costs", "cost_bps/1e4 * L1 turnover vs drifted weights, charged on the first test day"},
                        {"missing", "NaN"}};
    write_text(dir / "config.json", j.dump(2) + "\n");
}

int cmd_clean(const RunConfig& cfg, std::ostream& out) {
    const ReturnPanel panel = load_input(cfg);
    const std::size_t t_end = end_index(panel, cfg);
    const std::size_t dt_in = cfg.dt_in.empty() ? t_end : cfg.dt_in.front();
    if (dt_in < 2 || dt_in > t_end) throw ConfigError("calibration window does not fit the panel");
    const auto universe = calibration_universe(panel, t_end, dt_in);
    if (universe.empty()) throw EmptyUniverseError("no asset is fully observed in the calibration window");

    const auto tokens = cfg.estimators.empty() ? std::vector<std::string>{"kbahc"} : estimator_tokens(cfg);
    if (tokens.size() != 1) throw ConfigError("clean takes exactly one estimator");
    EstimatorSpec spec = SampleSpec{};
    if (tokens[0] == "cv") spec = CvSpec{cfg.cv_folds};
    if (tokens[0] == "kbahc") {
        if (cfg.k.size() > 1) throw ConfigError("clean takes a single k");
        spec = KBahcSpec{cfg.k.empty() ? 1 : cfg.k.front(), cfg.m, cfg.seed};
    }
    validate(spec);

    Eigen::MatrixXd block(static_cast<Eigen::Index>(universe.size()), static_cast<Eigen::Index>(dt_in));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        block.row(static_cast<Eigen::Index>(i)) =
            panel.values()
                .row(static_cast<Eigen::Index>(universe[i]))
                .segment(static_cast<Eigen::Index>(t_end - dt_in), static_cast<Eigen::Index>(dt_in));
        labels.push_back(panel.assets()[universe[i]]);
    }
    const SymmetricMatrix cov = estimate_covariance(spec, block, cfg.threads).with_labels(labels);

    const fs::path dir = prepare_out(cfg);
    write_matrix(cov, dir / "covariance.csv");
    write_matrix(to_correlation(cov), dir / "correlation.csv");
    write_config(dir, cfg, "clean");
    out << label(spec) << " covariance of " << universe.size() << " assets over " << dt_in
        << " dates written to " << dir.string() << "\n";
    return kOk;
}

std::vector<EstimatorSpec> backtest_estimators(const RunConfig& cfg) {
    std::vector<EstimatorSpec> specs;
    for (const auto& t : estimator_tokens(cfg)) {
        if (t == "sample") specs.push_back(SampleSpec{});
        if (t == "cv") specs.push_back(CvSpec{cfg.cv_folds});
        if (t == "kbahc")
            for (int k : k_grid(cfg)) specs.push_back(KBahcSpec{k, cfg.m, cfg.seed});
    }
    return specs;
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out) {
    const ReturnPanel panel = load_input(cfg);
    const std::vector<std::size_t> grid = cfg.dt_in.empty() ? std::vector<std::size_t>{252} : cfg.dt_in;

    BacktestConfig bc;
    bc.dt_out = cfg.dt_out;
    bc.cost_bps = cfg.cost_bps;
    bc.long_only = cfg.long_only;
    bc.estimators = backtest_estimators(cfg);
    bc.threads = cfg.threads;
    if (!cfg.start.empty()) bc.start = parse_date(cfg.start);
    if (!cfg.end.empty()) bc.end = parse_date(cfg.end);

    std::string metrics = "dt_in,estimator,realized_vol,SR (moment),n_eff,n_90,gross_leverage,gamma\n";
    std::string cumulative = "dt_in,estimator,date,wealth,gross_wealth\n";
    std::string weights = "dt_in,estimator,date,asset,weight\n";

    struct Method {
        std::string label;
        std::string dt_in;
        std::map<int, double> sharpe;
    };
    std::vector<Method> methods;

    for (std::size_t dt_in : grid) {
        bc.dt_in = dt_in;
        const BacktestReport report = run_backtest(panel, bc);
        const std::string d = std::to_string(dt_in);
        for (const MetricRow& r : report.metrics) {
            metrics += d + ',' + r.estimator + ',' + csv_number(r.realized_vol) + ',' + csv_number(r.sharpe) +
                       ',' + csv_number(r.n_eff) + ',' + csv_number(r.n_90) + ',' +
                       csv_number(r.gross_leverage) + ',' + csv_number(r.gamma) + '\n';
        }
        for (const EstimatorRun& run : report.runs) {
            double wealth = 1.0, gross = 1.0;
            for (std::size_t i = 0; i < run.days.size(); ++i) {
                wealth *= 1.0 + run.net[i];
                gross *= 1.0 + run.gross[i];
                cumulative += d + ',' + run.label + ',' + format_date(run.days[i]) + ',' +
                              csv_number(wealth) + ',' + csv_number(gross) + '\n';
            }
            for (std::size_t h = 0; h < run.snapshots.size(); ++h) {
                std::istringstream rows(format_weights_rows(run.rebalance_dates[h], run.snapshots[h]));
                std::string line;
                while (std::getline(rows, line)) weights += d + ',' + run.label + ',' + line + '\n';
            }
        }
        for (std::size_t e = 0; e < report.runs.size(); ++e) {
            const bool eq = report.runs[e].label == kEqualWeightLabel;
            if (eq && dt_in != grid.front()) continue;
            Method m{report.runs[e].label, eq ? "-" : d, {}};
            for (std::size_t y = 0; y < report.yearly.years.size(); ++y) {
                const double sr = report.yearly.sharpe(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(e));
                if (std::isfinite(sr)) m.sharpe[report.yearly.years[y]] = sr;
            }
            methods.push_back(std::move(m));
        }
        if (report.gaps > 0)
            out << "dt_in " << dt_in << ": " << report.gaps << " windows with an empty universe held cash\n";
    }

    YearlyScores scores;
    std::set<int> years;
    for (const auto& m : methods)
        for (const auto& [y, sr] : m.sharpe) years.insert(y);
    scores.years.assign(years.begin(), years.end());
    scores.sharpe = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(years.size()),
                                              static_cast<Eigen::Index>(methods.size()),
                                              std::numeric_limits<double>::quiet_NaN());
    for (std::size_t e = 0; e < methods.size(); ++e) {
        scores.methods.push_back(methods[e].label + "@" + methods[e].dt_in);
        for (std::size_t y = 0; y < scores.years.size(); ++y) {
            const auto it = methods[e].sharpe.find(scores.years[y]);
            if (it != methods[e].sharpe.end())
                scores.sharpe(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(e)) = it->second;
        }
    }
    const std::vector<double> ranks = yearly_dense_rank(scores);
    std::vector<std::size_t> order(methods.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const bool fa = std::isfinite(ranks[a]), fb = std::isfinite(ranks[b]);
        if (fa != fb) return fa;
        return fa && ranks[a] < ranks[b];
    });
    std::string rank = "rank,mean_rank,method,dt_in\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Method& m = methods[order[i]];
        rank += std::to_string(i + 1) + ',' + csv_number(ranks[order[i]]) + ',' + m.label + ',' + m.dt_in + '\n';
    }

    const fs::path dir = prepare_out(cfg);
    write_text(dir / "metrics.csv", metrics);
    write_text(dir / "rank.csv", rank);
    write_text(dir / "cumulative.csv", cumulative);
    write_text(dir / "weights.csv", weights);
    write_config(dir, cfg, "backtest");
    out << "backtest over " << grid.size() << " calibration lengths written to " << dir.string() << "\n";
    return kOk;
}

int cmd_experiment(const RunConfig& cfg, std::ostream& out) {
    const ReturnPanel panel = load_input(cfg);
    const auto tokens = estimator_tokens(cfg);
    ExperimentConfig ec;
    ec.dt_in_grid = cfg.dt_in.empty() ? std::vector<std::size_t>{60} : cfg.dt_in;
    ec.dt_out = cfg.dt_out;
    ec.n_assets = cfg.n_assets;
    ec.reps = cfg.reps;
    ec.seed = cfg.seed;
    ec.long_only = cfg.long_only;
    ec.k_grid = k_grid(cfg);
    ec.m = cfg.m;
    ec.cv_folds = cfg.cv_folds;
    ec.include_sample = has_token(tokens, "sample");
    ec.include_cv = has_token(tokens, "cv");
    ec.include_kbahc = has_token(tokens, "kbahc");
    ec.threads = cfg.threads;
    const ExperimentResult result = random_experiment(panel, ec);

    std::string risk = "dt_in,estimator,median_realized_risk,valid_reps,failed_reps\n";
    for (const RiskRow& r : result.risk)
        risk += std::to_string(r.dt_in) + ',' + r.estimator + ',' + csv_number(r.median_risk) + ',' +
                std::to_string(r.valid_reps) + ',' + std::to_string(r.failed_reps) + '\n';
    std::string kstar = "dt_in,mean_k_star,sd_k_star,k_argmin_median\n";
    for (const KStarRow& k : result.k_star)
        kstar += std::to_string(k.dt_in) + ',' + csv_number(k.mean_k_star) + ',' + csv_number(k.sd_k_star) +
                 ',' + std::to_string(k.k_argmin_median) + '\n';

    const fs::path dir = prepare_out(cfg);
    write_text(dir / "risk.csv", risk);
    if (ec.include_kbahc) write_text(dir / "kstar.csv", kstar);
    write_config(dir, cfg, "experiment");
    if (result.skipped_reps > 0)
        out << "warning: " << result.skipped_reps << " repetitions skipped (fewer than " << ec.n_assets
            << " eligible assets)\n";
    out << "experiment written to " << dir.string() << "\n";
    return kOk;
}

int cmd_spectra(const RunConfig& cfg, std::ostream& out) {
    const ReturnPanel panel = load_input(cfg);
    const auto tokens = estimator_tokens(cfg);
    SpectraConfig sc;
    sc.dt_in = cfg.dt_in.empty() ? 252 : cfg.dt_in.front();
    sc.k_list = has_token(tokens, "kbahc") ? k_grid(cfg) : std::vector<int>{};
    sc.m = cfg.m;
    sc.include_sample = has_token(tokens, "sample");
    sc.include_cv = has_token(tokens, "cv");
    sc.cv_folds = cfg.cv_folds;
    sc.seed = cfg.seed;
    sc.threads = cfg.threads;
    if (cfg.windows < 1) throw ConfigError("windows must be >= 1");
    const std::size_t t_end = end_index(panel, cfg);
    const auto n_windows = static_cast<std::size_t>(cfg.windows);
    if (t_end < n_windows * sc.dt_in)
        throw ConfigError("panel too short for " + std::to_string(n_windows) + " windows of " +
                          std::to_string(sc.dt_in) + " dates");
    for (std::size_t w = n_windows; w-- > 0;) sc.t_ends.push_back(t_end - w * sc.dt_in);
    const SpectraResult result = spectra_experiment(panel, sc);

    std::string spectra = "estimator,window,eigenvalue,ipr\n";
    for (const SpectrumPoint& p : result.points)
        spectra += p.estimator + ',' + std::to_string(p.window) + ',' + csv_number(p.eigenvalue) + ',' +
                   csv_number(p.ipr) + '\n';
    std::string cdf = "estimator,ipr,cdf\n";
    std::string quantiles = "quantile";
    for (const auto& e : result.estimators) quantiles += ',' + e;
    quantiles += '\n';
    std::vector<std::vector<double>> pooled;
    for (const auto& e : result.estimators) {
        auto v = result.ipr_of(e);
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < v.size(); ++i)
            cdf += e + ',' + csv_number(v[i]) + ',' +
                   csv_number(static_cast<double>(i + 1) / static_cast<double>(v.size())) + '\n';
        pooled.push_back(std::move(v));
    }
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        quantiles += csv_number(q);
        for (const auto& v : pooled) quantiles += ',' + csv_number(quantile(v, q));
        quantiles += '\n';
    }

    const fs::path dir = prepare_out(cfg);
    write_text(dir / "spectra.csv", spectra);
    write_text(dir / "ipr_cdf.csv", cdf);
    write_text(dir / "ipr_quantiles.csv", quantiles);
    write_config(dir, cfg, "spectra");
    out << "spectra of " << result.estimators.size() << " estimators written to " << dir.string() << "\n";
    return kOk;
}

// Fills command defaults so that the echoed config is the one actually run.
void resolve_defaults(RunConfig& cfg, const std::string& command) {
    if (cfg.k.empty()) cfg.k = command == "clean" ? std::vector<int>{1} : kDefaultKGrid;
    if (cfg.estimators.empty())
        cfg.estimators = command == "clean" ? std::vector<std::string>{"kbahc"}
                                            : std::vector<std::string>{"sample", "cv", "kbahc"};
    if (cfg.dt_in.empty() && command != "clean") cfg.dt_in = {command == "experiment" ? 60u : 252u};
}

template <typename T>
void take(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["input"] = input;
    j["input_kind"] = input_kind;
    j["k"] = k;
    j["m"] = m;
    j["seed"] = seed;
    j["dt_in"] = dt_in;
    j["dt_out"] = dt_out;
    j["cost_bps"] = cost_bps;
    j["long_only"] = long_only;
    j["estimators"] = estimators;
    j["out"] = out;
    j["threads"] = threads;
    j["cv_folds"] = cv_folds;
    j["reps"] = reps;
    j["n_assets"] = n_assets;
    j["start"] = start;
    j["end"] = end;
    j["t_end"] = t_end;
    j["windows"] = windows;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{"input", "input_kind", "k", "m", "seed", "dt_in",
                                             "dt_out", "cost_bps", "long_only", "estimators", "out",
                                             "threads", "cv_folds", "reps", "n_assets", "start",
                                             "end", "t_end", "windows"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    RunConfig c;
    try {
        take(j, "input", c.input);
        take(j, "input_kind", c.input_kind);
        take(j, "k", c.k);
        take(j, "m", c.m);
        take(j, "seed", c.seed);
        take(j, "dt_in", c.dt_in);
        take(j, "dt_out", c.dt_out);
        take(j, "cost_bps", c.cost_bps);
        take(j, "long_only", c.long_only);
        take(j, "estimators", c.estimators);
        take(j, "out", c.out);
        take(j, "threads", c.threads);
        take(j, "cv_folds", c.cv_folds);
        take(j, "reps", c.reps);
        take(j, "n_assets", c.n_assets);
        take(j, "start", c.start);
        take(j, "end", c.end);
        take(j, "t_end", c.t_end);
        take(j, "windows", c.windows);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"k-BAHC covariance cleaning and GMV portfolio backtests", "kbahc"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    RunConfig flags;
    flags.k.clear();
    app.add_option("--config", config_path, "JSON file with run configuration");
    auto* o_input = app.add_option("--input", flags.input, "CSV panel (date column, one column per asset)");
    auto* o_kind = app.add_option("--input-kind", flags.input_kind, "prices | returns")
                       ->check(CLI::IsMember({"prices", "returns"}));
    auto* o_k = app.add_option("--k", flags.k, "filter orders")->delimiter(',');
    auto* o_m = app.add_option("--m", flags.m, "bootstrap replicas");
    auto* o_seed = app.add_option("--seed", flags.seed, "base random seed");
    auto* o_dt_in = app.add_option("--dt-in", flags.dt_in, "calibration lengths in dates")->delimiter(',');
    auto* o_dt_out = app.add_option("--dt-out", flags.dt_out, "test length in dates");
    auto* o_cost = app.add_option("--cost-bps", flags.cost_bps, "transaction cost per unit turnover (bps)");
    auto* o_long = app.add_flag("--long-only", flags.long_only, "forbid short positions");
    auto* o_est = app.add_option("--estimators", flags.estimators, "sample,cv,kbahc")->delimiter(',');
    auto* o_out = app.add_option("--out", flags.out, "output directory");
    auto* o_threads = app.add_option("--threads", flags.threads, "worker threads");
    auto* o_folds = app.add_option("--cv-folds", flags.cv_folds, "CV folds");
    auto* o_reps = app.add_option("--reps", flags.reps, "experiment repetitions");
    auto* o_nassets = app.add_option("--n-assets", flags.n_assets, "experiment assets per repetition");
    auto* o_start = app.add_option("--start", flags.start, "first date (backtest)");
    auto* o_end = app.add_option("--end", flags.end, "last date (backtest)");
    auto* o_tend = app.add_option("--t-end", flags.t_end, "last calibration date (clean, spectra)");
    auto* o_windows = app.add_option("--windows", flags.windows, "consecutive calibration windows (spectra)");

    app.add_subcommand("clean", "write a cleaned covariance matrix");
    app.add_subcommand("backtest", "rolling GMV backtest with transaction costs");
    app.add_subcommand("experiment", "random assets, random periods realized risk");
    app.add_subcommand("spectra", "eigenvalues and IPR of cleaned covariances");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
            }
            cfg = RunConfig::from_json(j);
        }
        if (o_input->count()) cfg.input = flags.input;
        if (o_kind->count()) cfg.input_kind = flags.input_kind;
        if (o_k->count()) cfg.k = flags.k;
        if (o_m->count()) cfg.m = flags.m;
        if (o_seed->count()) cfg.seed = flags.seed;
        if (o_dt_in->count()) cfg.dt_in = flags.dt_in;
        if (o_dt_out->count()) cfg.dt_out = flags.dt_out;
        if (o_cost->count()) cfg.cost_bps = flags.cost_bps;
        if (o_long->count()) cfg.long_only = flags.long_only;
        if (o_est->count()) cfg.estimators = flags.estimators;
        if (o_out->count()) cfg.out = flags.out;
        if (o_threads->count()) cfg.threads = flags.threads;
        if (o_folds->count()) cfg.cv_folds = flags.cv_folds;
        if (o_reps->count()) cfg.reps = flags.reps;
        if (o_nassets->count()) cfg.n_assets = flags.n_assets;
        if (o_start->count()) cfg.start = flags.start;
        if (o_end->count()) cfg.end = flags.end;
        if (o_tend->count()) cfg.t_end = flags.t_end;
        if (o_windows->count()) cfg.windows = flags.windows;
        if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
        const std::string command = app.get_subcommands().front()->get_name();
        resolve_defaults(cfg, command);

        if (command == "clean") return cmd_clean(cfg, out);
        if (command == "backtest") return cmd_backtest(cfg, out);
        if (command == "experiment") return cmd_experiment(cfg, out);
        return cmd_spectra(cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericError;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace kbahc::cli
