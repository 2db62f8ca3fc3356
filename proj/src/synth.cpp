#include "kbahc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "kbahc/errors.hpp"

namespace kbahc {

namespace {

constexpr double kMinIdiosyncratic = 0.05;

// shared[i][j] = sum of squared loadings on factors common to i and j.
Eigen::MatrixXd shared_variance(const FactorModelSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.n);
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, spec.global_loading * spec.global_loading);
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        const double b2 = spec.level_loadings[l] * spec.level_loadings[l];
        Eigen::Index start = 0;
        for (std::size_t size : spec.levels[l]) {
            const auto len = static_cast<Eigen::Index>(size);
            s.block(start, start, len, len).array() += b2;
            start += len;
        }
    }
    return s;
}

double systematic_variance(const FactorModelSpec& spec) {
    double v = spec.global_loading * spec.global_loading;
    for (double b : spec.level_loadings) v += b * b;
    return v;
}

}  // namespace

void FactorModelSpec::validate() const {
    if (n == 0) throw ConfigError("factor model needs at least one asset");
    if (levels.size() != level_loadings.size())
        throw ConfigError("one loading per nesting level is required");
    std::vector<std::size_t> previous_edges{0, n};
    for (std::size_t l = 0; l < levels.size(); ++l) {
        std::vector<std::size_t> edges{0};
        for (std::size_t size : levels[l]) {
            if (size == 0) throw ConfigError("block sizes must be positive");
            edges.push_back(edges.back() + size);
        }
        if (edges.back() != n)
            throw ConfigError("block sizes at level " + std::to_string(l) + " do not sum to n");
        for (std::size_t e : previous_edges) {
            if (!std::binary_search(edges.begin(), edges.end(), e))
                throw ConfigError("level " + std::to_string(l) + " does not refine its parent");
        }
        previous_edges = std::move(edges);
    }
    if (idiosyncratic_variance() <= 0.0)
        throw ConfigError("loadings leave no idiosyncratic variance");
}

double FactorModelSpec::idiosyncratic_variance() const {
    return 1.0 - systematic_variance(*this);
}

SymmetricMatrix hierarchical_truth(const FactorModelSpec& spec) {
    spec.validate();
    Eigen::MatrixXd c = shared_variance(spec);
    c.diagonal().setOnes();
    return SymmetricMatrix(c, MatrixRole::Correlation);
}

SymmetricMatrix factor_model_truth(const FactorModelSpec& spec, double dispersion,
                                   std::uint64_t seed) {
    spec.validate();
    if (dispersion < 0.0 || dispersion >= 1.0)
        throw ConfigError("loading dispersion must be in [0, 1)");
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto n_factors = static_cast<Eigen::Index>(spec.levels.size() + 1);

    // loadings(i, f): f = 0 global, f = l + 1 the block of level l
    Eigen::MatrixXd loadings(n, n_factors);
    loadings.col(0).setConstant(spec.global_loading);
    for (std::size_t l = 0; l < spec.levels.size(); ++l)
        loadings.col(static_cast<Eigen::Index>(l + 1)).setConstant(spec.level_loadings[l]);
    if (dispersion > 0.0) {
        std::mt19937_64 engine(seed);
        std::uniform_real_distribution<double> u(1.0 - dispersion, 1.0 + dispersion);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index f = 0; f < n_factors; ++f) loadings(i, f) *= u(engine);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double systematic = loadings.row(i).squaredNorm();
        if (systematic > 1.0 - kMinIdiosyncratic)
            loadings.row(i) *= std::sqrt((1.0 - kMinIdiosyncratic) / systematic);
    }

    Eigen::MatrixXd c = loadings.col(0) * loadings.col(0).transpose();
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        const Eigen::VectorXd a = loadings.col(static_cast<Eigen::Index>(l + 1));
        Eigen::Index start = 0;
        for (std::size_t size : spec.levels[l]) {
            const auto len = static_cast<Eigen::Index>(size);
            c.block(start, start, len, len) += a.segment(start, len) * a.segment(start, len).transpose();
            start += len;
        }
    }
    c.diagonal().setOnes();
    return SymmetricMatrix(c, MatrixRole::Correlation);
}

Eigen::MatrixXd sample_returns(const SymmetricMatrix& truth, std::size_t t,
                               const Eigen::VectorXd& vols, std::uint64_t seed) {
    const Eigen::Index n = truth.dim();
    if (vols.size() != n) throw ConfigError("one volatility per asset is required");
    Eigen::LLT<Eigen::MatrixXd> llt(truth.matrix());
    if (llt.info() != Eigen::Success) throw NumericError("truth matrix is not positive definite");

    std::mt19937_64 engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(t));
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < n; ++i) z(i, j) = gauss(engine);
    return vols.asDiagonal() * (llt.matrixL() * z);
}

ReturnPanel synthetic_panel(const Eigen::MatrixXd& returns) {
    using namespace std::chrono;
    std::vector<Date> dates;
    dates.reserve(static_cast<std::size_t>(returns.cols()));
    sys_days day = sys_days{year{2000} / January / 3};
    while (dates.size() < static_cast<std::size_t>(returns.cols())) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) dates.emplace_back(day);
        day += days{1};
    }
    std::vector<std::string> assets;
    for (Eigen::Index i = 0; i < returns.rows(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "A%04ld", static_cast<long>(i));
        assets.emplace_back(buf);
    }
    return ReturnPanel(std::move(dates), std::move(assets), returns);
}

}  // namespace kbahc
