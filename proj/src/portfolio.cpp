#include "kbahc/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kbahc/errors.hpp"

namespace kbahc {

namespace {

constexpr double kPivotFloor = 1e-12;

// x = S^-1 1 for a positive definite S.
Eigen::VectorXd solve_ones(const Eigen::MatrixXd& s) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    if (ldlt.info() != Eigen::Success) throw NumericError("LDLT factorization failed");
    const Eigen::VectorXd d = ldlt.vectorD();
    const double largest = d.cwiseAbs().maxCoeff();
    if (!(largest > 0.0) || d.minCoeff() <= kPivotFloor * largest)
        throw NumericError(
            "covariance matrix is singular or indefinite; use a cleaned estimator");
    return ldlt.solve(Eigen::VectorXd::Ones(s.rows()));
}

void check_input(const SymmetricMatrix& cov) {
    if (cov.dim() < 1) throw ConfigError("portfolio needs at least one asset");
    if (!cov.matrix().allFinite()) throw NumericError("covariance has non-finite entries");
}

}  // namespace

Weights gmv_long_short(const SymmetricMatrix& cov) {
    check_input(cov);
    const Eigen::VectorXd x = solve_ones(cov.matrix());
    const double total = x.sum();
    if (!(total > 0.0)) throw NumericError("covariance is not positive definite");
    return Weights{cov.labels(), x / total};
}

Weights gmv_long_only(const SymmetricMatrix& cov) {
    check_input(cov);
    const Eigen::Index n = cov.dim();
    const Eigen::MatrixXd& s = cov.matrix();
    const double scale = s.diagonal().cwiseAbs().maxCoeff();
    const double multiplier_tol = 1e-12 * (scale > 0.0 ? scale : 1.0);

    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    std::vector<char> at_zero(static_cast<std::size_t>(n), 0);
    const long max_iter = std::max<long>(static_cast<long>(n) * static_cast<long>(n), 50);

    for (long iter = 0; iter < max_iter; ++iter) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!at_zero[static_cast<std::size_t>(i)]) free.push_back(i);
        const auto nf = static_cast<Eigen::Index>(free.size());

        Eigen::MatrixXd sub(nf, nf);
        for (Eigen::Index a = 0; a < nf; ++a)
            for (Eigen::Index b = 0; b < nf; ++b) sub(a, b) = s(free[a], free[b]);
        const Eigen::VectorXd x = solve_ones(sub);
        const double total = x.sum();
        if (!(total > 0.0)) throw NumericError("covariance is not positive definite on the free set");
        const Eigen::VectorXd target = x / total;

        // Step toward the equality-constrained optimum on the free set,
        // stopping at the first weight that would turn negative.
        double step = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index a = 0; a < nf; ++a) {
            const double current = w(free[a]);
            const double move = target(a) - current;
            if (move < 0.0 && target(a) < 0.0) {
                const double ratio = current / -move;
                if (ratio < step) {
                    step = ratio;
                    blocking = free[a];
                }
            }
        }

        if (blocking >= 0) {
            for (Eigen::Index a = 0; a < nf; ++a) w(free[a]) += step * (target(a) - w(free[a]));
            w(blocking) = 0.0;
            at_zero[static_cast<std::size_t>(blocking)] = 1;
            continue;
        }

        for (Eigen::Index a = 0; a < nf; ++a) w(free[a]) = target(a);
        for (Eigen::Index i = 0; i < n; ++i)
            if (at_zero[static_cast<std::size_t>(i)]) w(i) = 0.0;

        // Multipliers of the bounds: eta_j = (2 S w)_j - mu, mu = 2 / (1' S_FF^-1 1).
        const double mu = 2.0 / total;
        Eigen::Index release = -1;
        double most_negative = -multiplier_tol;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!at_zero[static_cast<std::size_t>(i)]) continue;
            const double eta = 2.0 * s.row(i).dot(w) - mu;
            if (eta < most_negative) {
                most_negative = eta;
                release = i;
            }
        }
        if (release < 0) return Weights{cov.labels(), w};
        at_zero[static_cast<std::size_t>(release)] = 0;
    }
    throw NumericError("long-only GMV active set did not converge in " +
                       std::to_string(max_iter) + " iterations");
}

std::string format_weights_rows(const Date& date, const Weights& w) {
    std::string out;
    const std::string d = format_date(date);
    for (Eigen::Index i = 0; i < w.values.size(); ++i) {
        const std::string name =
            w.assets.empty() ? "a" + std::to_string(i) : w.assets[static_cast<std::size_t>(i)];
        out += d + ',' + name + ',' + format_double(w.values(i)) + '\n';
    }
    return out;
}

}  // namespace kbahc
