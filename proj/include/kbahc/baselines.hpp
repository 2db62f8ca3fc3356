#pragma once

#include <Eigen/Dense>

#include "kbahc/matrix_core.hpp"

namespace kbahc {

/// Unfiltered empirical covariance (divisor t).
SymmetricMatrix sample_estimator(const Eigen::MatrixXd& returns);

/// Cross-validated eigenvalue shrinkage.
///
/// The t columns are split into `folds` contiguous blocks. For each block,
/// the eigenvectors of the covariance of the remaining columns are scored
/// by their variance on the held-out block; the i-th cleaned eigenvalue is
/// the mean score of the i-th eigenvector across blocks, floored at
/// 1e-12 of the largest. The output keeps the full-sample eigenvectors and
/// is rescaled to the sample trace. All blocks are centred with the
/// full-sample means.
SymmetricMatrix cv_eigenvalue_shrinkage(const Eigen::MatrixXd& returns, int folds = 10);

}  // namespace kbahc
