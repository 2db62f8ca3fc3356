#include <doctest.h>

#include <cmath>
#include <random>

#include "kbahc/errors.hpp"
#include "kbahc/portfolio.hpp"

using namespace kbahc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
SymmetricMatrix cov2(double a, double b, double d) {
    MatrixXd m(2, 2);
    m << a, b, b, d;
    return SymmetricMatrix(m, MatrixRole::Covariance);
}

// Brute-force long-only GMV for n = 3 on a simplex grid with step h.
VectorXd grid_long_only(const MatrixXd& s, double h) {
    VectorXd best(3);
    double best_v = INFINITY;
    const int steps = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j) {
            VectorXd w(3);
            w << i * h, j * h, (steps - i - j) * h;
            const double v = w.dot(s * w);
            if (v < best_v) best_v = v, best = w;
        }
    return best;
}
}  // namespace

TEST_CASE("long-short examples") {
    const auto eq = gmv_long_short(SymmetricMatrix(MatrixXd::Identity(4, 4), MatrixRole::Covariance));
    CHECK((eq.values.array() - 0.25).abs().maxCoeff() < 1e-15);
    const auto d = gmv_long_short(cov2(1, 0, 4));
    CHECK(d.values(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(d.values(1) == doctest::Approx(0.2).epsilon(1e-14));
    const auto s = gmv_long_short(cov2(1, 0.6, 1));
    CHECK(s.values(0) == doctest::Approx(0.5).epsilon(1e-14));
    const auto ls = gmv_long_short(cov2(1, 1.5, 4));
    CHECK(ls.values(0) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(ls.values(1) == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("long-only examples") {
    const auto eq = gmv_long_only(SymmetricMatrix(MatrixXd::Identity(3, 3), MatrixRole::Covariance));
    CHECK((eq.values.array() - 1.0 / 3).abs().maxCoeff() < 1e-14);
    const auto b = gmv_long_only(cov2(1, 1.5, 4));
    CHECK(b.values(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(b.values(1)) < 1e-14);
}

TEST_CASE("long-only equals long-short when the constraint is slack") {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 20; ++trial) {
        MatrixXd a(5, 5);
        for (int i = 0; i < 25; ++i) a(i / 5, i % 5) = 0.1 * z(g);
        MatrixXd s = a * a.transpose() + MatrixXd::Identity(5, 5);
        const SymmetricMatrix cov(s, MatrixRole::Covariance);
        const auto ls = gmv_long_short(cov);
        if (ls.values.minCoeff() <= 0.0) continue;
        CHECK((gmv_long_only(cov).values - ls.values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("long-only matches a grid search at n = 3") {
    std::mt19937_64 g(9);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 20; ++trial) {
        MatrixXd a(3, 3);
        for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = z(g);
        const MatrixXd s = a * a.transpose() + 0.05 * MatrixXd::Identity(3, 3);
        const auto w = gmv_long_only(SymmetricMatrix(s, MatrixRole::Covariance));
        const VectorXd oracle = grid_long_only(s, 1e-3);
        CHECK(w.values.minCoeff() >= 0.0);
        CHECK(w.values.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w.values.dot(s * w.values) <= oracle.dot(s * oracle) + 1e-12);
    }
}

TEST_CASE("singular covariance is a numeric failure") {
    CHECK_THROWS_AS(gmv_long_short(cov2(1, 1, 1)), NumericError);
    CHECK_THROWS_AS(gmv_long_only(cov2(1, 1, 1)), NumericError);
}

TEST_CASE("weights carry asset labels") {
    MatrixXd m = MatrixXd::Identity(2, 2);
    const auto w = gmv_long_short(SymmetricMatrix(m, MatrixRole::Covariance, {"X", "Y"}));
    CHECK(w.assets == std::vector<std::string>{"X", "Y"});
}
