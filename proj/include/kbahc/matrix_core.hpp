#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kbahc {

enum class MatrixRole { Generic, Covariance, Correlation, Residue };

std::string_view to_string(MatrixRole role);

/// Exactly symmetric n x n matrix with a role tag and optional asset labels.
///
/// Construction symmetrizes the input as (M + M') / 2, which is the identity
/// on already-symmetric input. Role invariants are checked by the factories
/// that produce each role; `check_role` re-checks them on demand.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(const Eigen::MatrixXd& m, MatrixRole role = MatrixRole::Generic,
                             std::vector<std::string> labels = {});

    Eigen::Index dim() const { return m_.rows(); }
    MatrixRole role() const { return role_; }
    const Eigen::MatrixXd& matrix() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    const std::vector<std::string>& labels() const { return labels_; }

    SymmetricMatrix with_role(MatrixRole role) const;
    SymmetricMatrix with_labels(std::vector<std::string> labels) const;

    /// Throws NumericError if the role invariants do not hold within `tol`:
    /// correlation has unit diagonal and |c_ij| <= 1 + tol, covariance has a
    /// non-negative diagonal.
    void check_role(double tol = 1e-12) const;

private:
    Eigen::MatrixXd m_;
    MatrixRole role_ = MatrixRole::Generic;
    std::vector<std::string> labels_;
};

/// Eigenvalues sorted descending with their orthonormal eigenvectors as columns.
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

/// sigma_ij = (1/t) sum_h (r_ih - mean_i)(r_jh - mean_j) for an n x t matrix.
SymmetricMatrix sample_covariance(const Eigen::MatrixXd& returns);

/// c_ij = sigma_ij / sqrt(sigma_ii sigma_jj). Unit diagonal is set exactly.
SymmetricMatrix to_correlation(const SymmetricMatrix& cov);

/// sigma_ij = c_ij sqrt(sigma_ii) sqrt(sigma_jj) off the diagonal and
/// c_ii sigma_ii on it, so a unit-diagonal input reproduces the variances
/// exactly.
SymmetricMatrix to_covariance(const SymmetricMatrix& corr, const Eigen::VectorXd& variances);

/// Symmetric eigendecomposition, eigenvalues descending; ties keep the
/// solver's index order so the output is deterministic.
EigenSystem eigendecompose(const SymmetricMatrix& m);

/// Rebuilds sum_i max(lambda_i, 0) v_i v_i'. Returns the input unchanged
/// when no eigenvalue is negative. The diagonal is not renormalized.
SymmetricMatrix clip_negative_eigenvalues(const SymmetricMatrix& m, bool* clipped = nullptr);

/// max_i |m_ii - 1|, the drift of a correlation-like matrix after clipping.
double diagonal_drift(const SymmetricMatrix& m);

/// Square CSV with a header row of labels and a label column.
void write_matrix(const SymmetricMatrix& m, const std::filesystem::path& path);
std::string format_matrix(const SymmetricMatrix& m);
/// Parses the format above; rejects non-square or asymmetric (> 1e-9) input.
SymmetricMatrix parse_matrix(std::string_view csv, MatrixRole role = MatrixRole::Generic);
SymmetricMatrix load_matrix(const std::filesystem::path& path,
                            MatrixRole role = MatrixRole::Generic);

/// Shortest round-trip decimal representation of a double ("NaN" for NaN).
std::string format_double(double v);

}  // namespace kbahc
