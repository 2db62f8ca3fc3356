#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kbahc/errors.hpp"
#include "kbahc/metrics.hpp"

using namespace kbahc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
Weights w_of(std::initializer_list<double> v) {
    Weights w;
    w.values = VectorXd::Map(std::data(v), static_cast<Eigen::Index>(v.size()));
    return w;
}
}  // namespace

TEST_CASE("ipr") {
    VectorXd e1 = VectorXd::Zero(5);
    e1(0) = 1;
    CHECK(ipr(e1) == 1.0);
    CHECK(ipr(VectorXd::Constant(4, 0.5)) == doctest::Approx(4.0).epsilon(1e-15));
    VectorXd half = VectorXd::Zero(6);
    half(0) = half(1) = 1 / std::sqrt(2.0);
    CHECK(ipr(half) == doctest::Approx(2.0).epsilon(1e-14));

    const auto id = ipr(eigendecompose(SymmetricMatrix(MatrixXd::Identity(3, 3))));
    CHECK(id.size() == 3);
}

TEST_CASE("shuffled null permutes each row") {
    std::mt19937_64 g(1);
    std::normal_distribution<double> z;
    MatrixXd r(3, 50);
    for (int i = 0; i < 150; ++i) r(i / 50, i % 50) = z(g);
    r.row(2).setConstant(0.4);
    const MatrixXd s = shuffled_null_panel(r, 5);
    for (int i = 0; i < 3; ++i) {
        std::vector<double> a(r.row(i).begin(), r.row(i).end()), b(s.row(i).begin(), s.row(i).end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
    CHECK(s.row(2) == r.row(2));
    CHECK(shuffled_null_panel(r, 5) == s);
}

TEST_CASE("shuffled panel decorrelates assets") {
    const int t = 5000;
    std::mt19937_64 g(2);
    std::normal_distribution<double> z;
    MatrixXd r(4, t);
    for (int j = 0; j < t; ++j) {
        const double f = z(g);
        for (int i = 0; i < 4; ++i) r(i, j) = f + 0.5 * z(g);
    }
    const auto c = to_correlation(sample_covariance(shuffled_null_panel(r, 3)));
    const double bound = 4.0 / std::sqrt(static_cast<double>(t));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) CHECK(std::abs(c(i, j)) < bound);
}

TEST_CASE("realized volatility") {
    const std::vector<double> flat(10, 0.003);
    CHECK(realized_volatility(flat) == 0.0);
    std::vector<double> alt;
    for (int i = 0; i < 10; ++i) alt.push_back(i % 2 ? -0.02 : 0.02);
    CHECK(realized_volatility(alt) == doctest::Approx(0.02 * std::sqrt(252.0)).epsilon(1e-14));
    const std::vector<double> one{0.01};
    CHECK_THROWS(realized_volatility(one));
}

TEST_CASE("sharpe ratio") {
    std::vector<double> alt;
    for (int i = 0; i < 10; ++i) alt.push_back(i % 2 ? -0.02 : 0.02);
    CHECK(sharpe_ratio(alt) == 0.0);
    const std::vector<double> flat(5, 0.001);
    CHECK(sharpe_ratio(flat) == std::numeric_limits<double>::infinity());
    std::vector<double> s;
    for (int i = 0; i < 10; ++i) s.push_back(0.001 + (i % 2 ? -0.01 : 0.01));
    CHECK(sharpe_ratio(s) == doctest::Approx(0.1 * std::sqrt(252.0)).epsilon(1e-12));
    CHECK(sharpe_ratio(s) == doctest::Approx(1.587).epsilon(1e-3));
}

TEST_CASE("concentration") {
    auto c = concentration(w_of({0.5, 0.5}));
    CHECK(c.n_eff == 2.0);
    CHECK(c.n_90 == 2);
    c = concentration(w_of({1, 0, 0}));
    CHECK(c.n_eff == 1.0);
    CHECK(c.n_90 == 1);
    CHECK(concentration(w_of({0.5, 0.4, 0.1})).n_90 == 2);
    CHECK(concentration(w_of({0.1, 0.4, 0.5})).n_90 == 2);
}

TEST_CASE("gross leverage") {
    CHECK(gross_leverage(w_of({0.2, 0.3, 0.5})) == 1.0);
    CHECK(gross_leverage(w_of({1.25, -0.25})) == 1.5);
    CHECK(gross_leverage(w_of({2.5 / 2, -0.5 / 2})) == 1.5);
}

TEST_CASE("turnover") {
    const std::vector<Weights> same{w_of({0.5, 0.5}), w_of({0.5, 0.5})};
    CHECK(turnover_gamma(same) == 0.0);
    const std::vector<Weights> flip{w_of({1, 0}), w_of({0, 1})};
    CHECK(turnover_gamma(flip) == 2.0);
    const std::vector<Weights> three{w_of({1, 0}), w_of({0.5, 0.5}), w_of({0, 1})};
    CHECK(turnover_gamma(three) == 1.0);

    Weights a{{"X", "Y"}, Eigen::Vector2d(0.5, 0.5)};
    Weights b{{"Y", "Z"}, Eigen::Vector2d(0.5, 0.5)};
    const std::vector<Weights> named{a, b};
    CHECK(turnover_gamma(named) == 1.0);
    const std::vector<Weights> with_cash{a, Weights{}, b};
    CHECK(turnover_gamma(with_cash) == 1.0);
}

TEST_CASE("yearly dense rank") {
    YearlyScores one{{2020}, {"a", "b", "c"}, MatrixXd(1, 3)};
    one.sharpe << 1.25, 1.25, 1.10;
    CHECK(yearly_dense_rank(one) == std::vector<double>{1, 1, 2});

    YearlyScores same{{2019, 2020}, {"a", "b"}, MatrixXd::Constant(2, 2, 0.7)};
    CHECK(yearly_dense_rank(same) == std::vector<double>{1, 1});

    YearlyScores swap{{2019, 2020}, {"a", "b"}, MatrixXd(2, 2)};
    swap.sharpe << 1.0, 0.5, 0.2, 0.9;
    CHECK(yearly_dense_rank(swap) == std::vector<double>{1.5, 1.5});

    YearlyScores rounding{{2020}, {"a", "b"}, MatrixXd(1, 2)};
    rounding.sharpe << 1.234, 1.231;
    CHECK(yearly_dense_rank(rounding) == std::vector<double>{1, 1});
}

TEST_CASE("quantile and ks distance") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({5}, 0.9) == 5.0);
    CHECK(ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_distance({1, 2}, {3, 4}) == 1.0);
    CHECK(ks_distance({1, 3}, {2, 4}) == 0.5);
}
