#include "kbahc/baselines.hpp"

#include <string>

#include "kbahc/errors.hpp"

namespace kbahc {

SymmetricMatrix sample_estimator(const Eigen::MatrixXd& returns) {
    return sample_covariance(returns);
}

SymmetricMatrix cv_eigenvalue_shrinkage(const Eigen::MatrixXd& returns, int folds) {
    if (folds < 2) throw ConfigError("CV needs at least 2 folds, got " + std::to_string(folds));
    const Eigen::Index n = returns.rows();
    const Eigen::Index t = returns.cols();
    if (t < 2 * folds)
        throw ConfigError("CV with " + std::to_string(folds) + " folds needs t >= " +
                          std::to_string(2 * folds) + ", got " + std::to_string(t));

    const SymmetricMatrix sample = sample_covariance(returns);
    const EigenSystem full = eigendecompose(sample);
    const Eigen::MatrixXd centered = returns.colwise() - returns.rowwise().mean();

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index begin = t * f / folds;
        const Eigen::Index end = t * (f + 1) / folds;
        const Eigen::Index held = end - begin;
        const Eigen::Index kept = t - held;

        Eigen::MatrixXd train(n, kept);
        train << centered.leftCols(begin), centered.rightCols(t - end);
        Eigen::MatrixXd train_cov = Eigen::MatrixXd::Zero(n, n);
        train_cov.selfadjointView<Eigen::Lower>().rankUpdate(train, 1.0 / static_cast<double>(kept));
        train_cov.triangularView<Eigen::StrictlyUpper>() = train_cov.transpose();
        const EigenSystem fold = eigendecompose(SymmetricMatrix(train_cov));

        // v' S_test v = |X_test' v|^2 / held
        const Eigen::MatrixXd projected = fold.vectors.transpose() * centered.middleCols(begin, held);
        scores += projected.rowwise().squaredNorm() / static_cast<double>(held);
    }
    scores /= static_cast<double>(folds);

    const double top = scores.maxCoeff();
    if (!(top > 0.0)) throw NumericError("CV shrinkage: all out-of-sample variances vanish");
    scores = scores.cwiseMax(1e-12 * top);
    scores *= sample.matrix().trace() / scores.sum();

    const Eigen::MatrixXd cleaned = full.vectors * scores.asDiagonal() * full.vectors.transpose();
    return SymmetricMatrix(cleaned, MatrixRole::Covariance, sample.labels());
}

}  // namespace kbahc
