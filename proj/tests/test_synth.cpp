#include <doctest.h>

#include <cmath>

#include "kbahc/errors.hpp"
#include "kbahc/hclust_filter.hpp"
#include "kbahc/synth.hpp"

using namespace kbahc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("one block is an equicorrelation fixed point") {
    FactorModelSpec spec{5, {}, std::sqrt(0.3), {}};
    const auto c = hierarchical_truth(spec);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(c(i, j) == doctest::Approx(i == j ? 1.0 : 0.3).epsilon(1e-14));
    CHECK((hcal(c).matrix() - c.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero loadings give the identity") {
    FactorModelSpec spec{4, {{2, 2}}, 0.0, {0.0}};
    CHECK(hierarchical_truth(spec).matrix().isIdentity(0.0));
}

TEST_CASE("two blocks are an hcal fixed point") {
    FactorModelSpec spec{6, {{3, 3}}, std::sqrt(0.2), {std::sqrt(0.4)}};
    const auto c = hierarchical_truth(spec);
    CHECK(c(0, 1) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(c(0, 4) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK((hcal(c).matrix() - c.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invalid nesting is rejected") {
    CHECK_THROWS_AS(hierarchical_truth(FactorModelSpec{6, {{3, 3}, {2, 4}}, 0.1, {0.1, 0.1}}), ConfigError);
    CHECK_THROWS_AS(hierarchical_truth(FactorModelSpec{6, {{3, 2}}, 0.1, {0.1}}), ConfigError);
    CHECK_THROWS_AS(hierarchical_truth(FactorModelSpec{2, {}, 1.0, {}}), ConfigError);
}

TEST_CASE("dispersed loadings keep a valid correlation") {
    FactorModelSpec spec{20, {{10, 10}}, 0.5, {0.5}};
    const auto c = factor_model_truth(spec, 0.5, 3);
    CHECK_NOTHROW(c.check_role(1e-15));
    CHECK(eigendecompose(c).values.minCoeff() > 0.0);
}

TEST_CASE("identity truth gives nearly uncorrelated samples") {
    const SymmetricMatrix id(MatrixXd::Identity(5, 5), MatrixRole::Correlation);
    const MatrixXd r = sample_returns(id, 100000, VectorXd::Ones(5), 1);
    const auto c = to_correlation(sample_covariance(r));
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(c(i, j)));
    CHECK(worst < 0.02);
    CHECK(sample_returns(id, 50, VectorXd::Ones(5), 1) == sample_returns(id, 50, VectorXd::Ones(5), 1));
}

TEST_CASE("single asset variance follows the vol profile") {
    const SymmetricMatrix one(MatrixXd::Identity(1, 1), MatrixRole::Correlation);
    const MatrixXd r = sample_returns(one, 10000, VectorXd::Constant(1, 0.02), 8);
    CHECK(std::abs(sample_covariance(r)(0, 0) / 0.0004 - 1.0) < 0.05);
}

TEST_CASE("synthetic panel uses business days") {
    const auto p = synthetic_panel(MatrixXd::Zero(2, 6));
    CHECK(format_date(p.dates()[0]) == "2000-01-03");
    CHECK(format_date(p.dates()[5]) == "2000-01-10");
    CHECK(p.assets()[1] == "A0001");
}
