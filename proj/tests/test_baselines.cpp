#include <doctest.h>

#include <random>

#include "kbahc/baselines.hpp"
#include "kbahc/estimators.hpp"

using namespace kbahc;
using Eigen::MatrixXd;

namespace {
MatrixXd gaussian(int n, int t, std::mt19937_64& g) {
    std::normal_distribution<double> z;
    MatrixXd r(n, t);
    for (int j = 0; j < t; ++j)
        for (int i = 0; i < n; ++i) r(i, j) = z(g);
    return r;
}
}  // namespace

TEST_CASE("sample estimator delegates to the sample covariance") {
    MatrixXd r(2, 3);
    r << 1, 2, 3, 2, 4, 6;
    CHECK(sample_estimator(r).matrix() == sample_covariance(r).matrix());
    MatrixXd one(1, 2);
    one << 0, 1;
    CHECK(sample_estimator(one)(0, 0) == 0.25);
}

TEST_CASE("sample estimator is singular when n > t and invertible otherwise") {
    std::mt19937_64 g(1);
    const auto wide = eigendecompose(sample_estimator(gaussian(30, 20, g))).values;
    CHECK(wide.minCoeff() <= 1e-10 * wide.maxCoeff());
    const auto tall = eigendecompose(sample_estimator(gaussian(10, 60, g))).values;
    CHECK(tall.minCoeff() > 1e-3 * tall.maxCoeff());
}

TEST_CASE("cv shrinkage beats the sample spectrum under identity truth") {
    std::mt19937_64 g(2024);
    int wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const MatrixXd r = gaussian(20, 200, g);
        const auto s = eigendecompose(sample_estimator(r)).values;
        const auto c = eigendecompose(cv_eigenvalue_shrinkage(r, 10)).values;
        if ((c.array() - 1.0).square().mean() < (s.array() - 1.0).square().mean()) ++wins;
    }
    CHECK(wins >= 90);
}

TEST_CASE("cv shrinkage keeps the sample eigenvectors and trace") {
    std::mt19937_64 g(5);
    const MatrixXd r = gaussian(6, 80, g);
    const auto s = sample_estimator(r);
    const auto cv = cv_eigenvalue_shrinkage(r, 10);
    CHECK(cv.matrix().trace() == doctest::Approx(s.matrix().trace()).epsilon(1e-10));
    const auto es = eigendecompose(s);
    // every sample eigenvector remains an eigenvector of the shrunk matrix
    for (Eigen::Index i = 0; i < 6; ++i) {
        const Eigen::VectorXd v = es.vectors.col(i);
        const Eigen::VectorXd mv = cv.matrix() * v;
        const double lambda = v.dot(mv);
        CHECK((mv - lambda * v).norm() < 1e-8);
    }

    MatrixXd col(2, 50);
    col.row(0) = gaussian(1, 50, g);
    col.row(1) = 2.0 * col.row(0);
    CHECK(cv_eigenvalue_shrinkage(col, 10).matrix().trace() ==
          doctest::Approx(sample_estimator(col).matrix().trace()).epsilon(1e-10));
}

TEST_CASE("estimator labels") {
    CHECK(label(SampleSpec{}) == "Sample");
    CHECK(label(CvSpec{}) == "CV");
    CHECK(label(KBahcSpec{3, 10, 0}) == "3-BAHC");
}
