#include "kbahc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "kbahc/errors.hpp"

namespace kbahc {

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments population_moments(std::span<const double> x) {
    if (x.size() < 2) throw NumericError("need at least two observations");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) return {*lo, 0.0};  // exact, rounding in the mean would leak into sd
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

}  // namespace

double ipr(const Eigen::VectorXd& v) {
    const double norm = v.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw NumericError("IPR needs a unit vector, got norm " + std::to_string(norm));
    return 1.0 / v.array().square().square().sum();
}

std::vector<double> ipr(const EigenSystem& system) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(system.vectors.cols()));
    for (Eigen::Index i = 0; i < system.vectors.cols(); ++i) out.push_back(ipr(system.vectors.col(i)));
    return out;
}

Eigen::MatrixXd shuffled_null_panel(const Eigen::MatrixXd& returns, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    Eigen::MatrixXd out = returns;
    std::vector<double> row(static_cast<std::size_t>(returns.cols()));
    for (Eigen::Index i = 0; i < returns.rows(); ++i) {
        for (Eigen::Index j = 0; j < returns.cols(); ++j) row[static_cast<std::size_t>(j)] = returns(i, j);
        std::shuffle(row.begin(), row.end(), engine);
        for (Eigen::Index j = 0; j < returns.cols(); ++j) out(i, j) = row[static_cast<std::size_t>(j)];
    }
    return out;
}

double realized_volatility(std::span<const double> daily) {
    return population_moments(daily).sd * std::sqrt(kTradingDaysPerYear);
}

double sharpe_ratio(std::span<const double> daily) {
    const Moments m = population_moments(daily);
    if (m.sd == 0.0) {
        if (m.mean == 0.0) return 0.0;
        return m.mean > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    }
    return m.mean / m.sd * std::sqrt(kTradingDaysPerYear);
}

Concentration concentration(const Weights& w) {
    if (w.values.size() == 0) throw ConfigError("empty weight vector");
    Concentration c;
    c.n_eff = 1.0 / w.values.squaredNorm();
    std::vector<double> mags(w.values.data(), w.values.data() + w.values.size());
    for (double& x : mags) x = std::abs(x);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    const double total = std::accumulate(mags.begin(), mags.end(), 0.0);
    double cumulative = 0.0;
    c.n_90 = static_cast<int>(mags.size());
    for (std::size_t i = 0; i < mags.size(); ++i) {
        cumulative += mags[i];
        // relative slack absorbs rounding in sums like 0.5 + 0.4
        if (cumulative >= 0.9 * total * (1.0 - 1e-12)) {
            c.n_90 = static_cast<int>(i + 1);
            break;
        }
    }
    return c;
}

double gross_leverage(const Weights& w) { return w.values.cwiseAbs().sum(); }

double turnover_gamma(std::span<const Weights> history) {
    if (history.size() < 2) throw ConfigError("turnover needs at least two snapshots");
    // empty snapshots (cash) match anything in named mode
    const bool named = std::any_of(history.begin(), history.end(),
                                   [](const Weights& w) { return !w.assets.empty(); });
    double total = 0.0;
    for (std::size_t h = 0; h + 1 < history.size(); ++h) {
        const Weights& a = history[h];
        const Weights& b = history[h + 1];
        if (!named) {
            if (a.values.size() != b.values.size())
                throw ConfigError("unnamed snapshots must have equal length");
            total += (a.values - b.values).cwiseAbs().sum();
            continue;
        }
        std::map<std::string, double> diff;
        for (std::size_t i = 0; i < a.assets.size(); ++i)
            diff[a.assets[i]] += a.values(static_cast<Eigen::Index>(i));
        for (std::size_t i = 0; i < b.assets.size(); ++i)
            diff[b.assets[i]] -= b.values(static_cast<Eigen::Index>(i));
        for (const auto& [id, d] : diff) total += std::abs(d);
    }
    return total / static_cast<double>(history.size() - 1);
}

std::vector<double> yearly_dense_rank(const YearlyScores& scores) {
    const auto n_methods = static_cast<Eigen::Index>(scores.methods.size());
    if (scores.sharpe.rows() != static_cast<Eigen::Index>(scores.years.size()) ||
        scores.sharpe.cols() != n_methods)
        throw ConfigError("score table shape does not match its labels");
    std::vector<double> rank_sum(scores.methods.size(), 0.0);
    std::vector<int> rank_count(scores.methods.size(), 0);
    for (Eigen::Index y = 0; y < scores.sharpe.rows(); ++y) {
        std::vector<double> rounded(scores.methods.size(), std::numeric_limits<double>::quiet_NaN());
        std::set<double, std::greater<>> distinct;
        for (Eigen::Index m = 0; m < n_methods; ++m) {
            const double sr = scores.sharpe(y, m);
            if (!std::isfinite(sr)) continue;
            const double r = std::round(sr * 100.0) / 100.0;
            rounded[static_cast<std::size_t>(m)] = r;
            distinct.insert(r);
        }
        for (std::size_t m = 0; m < rounded.size(); ++m) {
            if (std::isnan(rounded[m])) continue;
            const auto pos = std::distance(distinct.begin(), distinct.find(rounded[m]));
            rank_sum[m] += static_cast<double>(pos + 1);
            ++rank_count[m];
        }
    }
    std::vector<double> out(scores.methods.size());
    for (std::size_t m = 0; m < out.size(); ++m)
        out[m] = rank_count[m] > 0 ? rank_sum[m] / rank_count[m]
                                   : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile of an empty sample");
    if (q < 0.0 || q > 1.0) throw ConfigError("quantile level must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ConfigError("KS distance of an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

}  // namespace kbahc
