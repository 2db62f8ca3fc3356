#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kbahc/hclust_filter.hpp"
#include "kbahc/matrix_core.hpp"

using namespace kbahc;
using Eigen::MatrixXd;

namespace {

MatrixXd example3() {
    MatrixXd c(3, 3);
    c << 1, .8, .4, .8, 1, .2, .4, .2, 1;
    return c;
}

MatrixXd random_corr(std::mt19937_64& g, int n, int t) {
    std::normal_distribution<double> z;
    MatrixXd r(n, t);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < t; ++j) r(i, j) = z(g);
    return to_correlation(sample_covariance(r)).matrix();
}

// Naive average linkage: rescan every cluster pair, mean over all leaf pairs.
struct NaiveMerge {
    std::set<int> a, b;
    double height;
};

std::vector<NaiveMerge> naive_linkage(const MatrixXd& d) {
    std::vector<std::set<int>> clusters;
    for (int i = 0; i < d.rows(); ++i) clusters.push_back({i});
    std::vector<NaiveMerge> out;
    while (clusters.size() > 1) {
        double best = INFINITY;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double s = 0;
                for (int p : clusters[i])
                    for (int q : clusters[j]) s += d(p, q);
                s /= static_cast<double>(clusters[i].size() * clusters[j].size());
                if (s < best) best = s, bi = i, bj = j;
            }
        out.push_back({clusters[bi], clusters[bj], best});
        clusters[bi].insert(clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<long>(bj));
    }
    return out;
}

MatrixXd naive_hcal(const MatrixXd& c) {
    const MatrixXd d = MatrixXd::Ones(c.rows(), c.cols()) - c;
    MatrixXd out = c;
    for (const auto& m : naive_linkage(d))
        for (int p : m.a)
            for (int q : m.b) out(p, q) = out(q, p) = 1.0 - m.height;
    return out;
}

}  // namespace

TEST_CASE("average linkage on the 3x3 example") {
    const SymmetricMatrix d(MatrixXd::Ones(3, 3) - example3());
    const auto den = average_linkage(d);
    REQUIRE(den.merges().size() == 2);
    CHECK(den.merges()[0].height == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(std::set<int>(den.merges()[0].members.begin(), den.merges()[0].members.end()) == std::set<int>{0, 1});
    CHECK(den.merges()[1].height == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(den.merges()[1].members.size() == 3);
    CHECK(den.merges()[1].id == 4);
}

TEST_CASE("two leaves merge once at their distance") {
    MatrixXd d(2, 2);
    d << 0, 0.37, 0.37, 0;
    const auto den = average_linkage(SymmetricMatrix(d));
    REQUIRE(den.merges().size() == 1);
    CHECK(den.merges()[0].height == 0.37);
}

TEST_CASE("equal distances give equal heights") {
    const MatrixXd d = MatrixXd::Ones(5, 5) - MatrixXd::Identity(5, 5);
    const auto den = average_linkage(SymmetricMatrix(d));
    for (const auto& m : den.merges()) CHECK(m.height == 1.0);
}

TEST_CASE("hcal examples") {
    MatrixXd expected(3, 3);
    expected << 1, .8, .3, .8, 1, .3, .3, .3, 1;
    const auto h = hcal(SymmetricMatrix(example3(), MatrixRole::Correlation));
    CHECK((h.matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);

    MatrixXd two(2, 2);
    two << 1, -0.35, -0.35, 1;
    CHECK((hcal(SymmetricMatrix(two)).matrix() - two).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(hcal(SymmetricMatrix(MatrixXd::Identity(6, 6))).matrix().isIdentity(1e-15));
}

TEST_CASE("fast linkage matches the naive rescan") {
    std::mt19937_64 g(7);
    for (int trial = 0; trial < 40; ++trial) {
        const MatrixXd c = random_corr(g, 9, 20);
        const MatrixXd fast = hcal(SymmetricMatrix(c)).matrix();
        CHECK((fast - naive_hcal(c)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("k_hcal worked example") {
    const SymmetricMatrix c(example3(), MatrixRole::Correlation);
    MatrixXd k1(3, 3), k2(3, 3);
    k1 << 1, .8, .3, .8, 1, .3, .3, .3, 1;
    k2 << 1, .75, .4, .75, 1, .25, .4, .25, 1;
    CHECK((k_hcal(c, 1).matrix.matrix() - k1).cwiseAbs().maxCoeff() < 1e-12);
    const auto f2 = k_hcal(c, 2);
    CHECK_FALSE(f2.clipped);
    CHECK((f2.matrix.matrix() - k2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(eigendecompose(f2.matrix).values.minCoeff() > 0.0);

    const std::vector<int> orders{1, 2};
    const auto path = k_hcal_path(c, orders);
    CHECK(path[0].matrix.matrix() == k_hcal(c, 1).matrix.matrix());
    CHECK(path[1].matrix.matrix() == f2.matrix.matrix());
}

TEST_CASE("identity is fixed for every order") {
    const SymmetricMatrix id(MatrixXd::Identity(5, 5), MatrixRole::Correlation);
    for (int k : {1, 2, 5}) CHECK(k_hcal(id, k).matrix.matrix().isIdentity(1e-15));
}

TEST_CASE("large k converges to the input") {
    std::mt19937_64 g(11);
    const SymmetricMatrix c(random_corr(g, 6, 40), MatrixRole::Correlation);
    const double e1 = (c.matrix() - k_hcal(c, 1).matrix.matrix()).norm();
    const double e40 = (c.matrix() - k_hcal(c, 40).matrix.matrix()).norm();
    CHECK(e40 < e1);
}

TEST_CASE("dendrogram csv") {
    const auto den = average_linkage(SymmetricMatrix(MatrixXd::Ones(3, 3) - example3()));
    const auto text = format_dendrogram(den);
    CHECK(text.rfind("merge_index,left,right,height,size\n", 0) == 0);
}

TEST_CASE("permutation equivariance") {
    std::mt19937_64 g(21);
    const SymmetricMatrix c(random_corr(g, 8, 30), MatrixRole::Correlation);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(8);
    p.indices() << 3, 7, 0, 5, 1, 6, 2, 4;
    const SymmetricMatrix pc(p * c.matrix() * p.transpose(), MatrixRole::Correlation);
    for (int k : {1, 3}) {
        const MatrixXd lhs = k_hcal(pc, k).matrix.matrix();
        const MatrixXd rhs = p * k_hcal(c, k).matrix.matrix() * p.transpose();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("k = 1 is positive semidefinite under a strong global mode") {
    std::mt19937_64 g(22);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
        MatrixXd r(12, 60);
        for (int j = 0; j < 60; ++j) {
            const double f = z(g);
            for (int i = 0; i < 12; ++i) r(i, j) = f + 0.8 * z(g);
        }
        const auto h = hcal(to_correlation(sample_covariance(r)));
        CHECK(eigendecompose(h).values.minCoeff() >= -1e-10);
    }
}

TEST_CASE("median distance to the input decreases with k") {
    std::mt19937_64 g(23);
    std::vector<double> e1, e5, e20;
    const std::vector<int> orders{1, 5, 20};
    for (int trial = 0; trial < 100; ++trial) {
        const SymmetricMatrix c(random_corr(g, 10, 30), MatrixRole::Correlation);
        const auto path = k_hcal_path(c, orders);
        e1.push_back((c.matrix() - path[0].matrix.matrix()).norm());
        e5.push_back((c.matrix() - path[1].matrix.matrix()).norm());
        e20.push_back((c.matrix() - path[2].matrix.matrix()).norm());
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return 0.5 * (v[49] + v[50]);
    };
    CHECK(median(e5) < median(e1));
    CHECK(median(e20) < median(e5));
}
