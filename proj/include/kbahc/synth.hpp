#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kbahc/data_io.hpp"
#include "kbahc/matrix_core.hpp"

namespace kbahc {

/// Nested block factor model with unit total variance per asset.
///
/// `levels[l]` lists block sizes at nesting depth l; every level partitions
/// the n assets into consecutive blocks and refines the previous level.
/// Asset i loads `global_loading` on a market factor and `level_loadings[l]`
/// on the factor of its depth-l block; the rest of its unit variance is
/// idiosyncratic.
struct FactorModelSpec {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> levels;
    double global_loading = 0.0;
    std::vector<double> level_loadings;

    /// Throws ConfigError on inconsistent sizes or non-positive idiosyncratic variance.
    void validate() const;
    double idiosyncratic_variance() const;
};

/// Block-nested constant correlation matrix of the model: c_ij is the sum of
/// squared loadings on the factors i and j share. It is a fixed point of hcal.
SymmetricMatrix hierarchical_truth(const FactorModelSpec& spec);

/// Same model with heterogeneous loadings: each asset's loading on each factor
/// (global, then one per level) is multiplied by an independent draw from
/// U[1 - dispersion, 1 + dispersion]. Assets whose systematic variance would
/// exceed 95% are scaled down. With dispersion 0 this equals hierarchical_truth.
SymmetricMatrix factor_model_truth(const FactorModelSpec& spec, double dispersion,
                                   std::uint64_t seed);

/// n x t i.i.d. Gaussian draws with covariance D C D, D = diag(vols).
/// Throws NumericError if the correlation is not positive definite.
Eigen::MatrixXd sample_returns(const SymmetricMatrix& truth, std::size_t t,
                               const Eigen::VectorXd& vols, std::uint64_t seed);

/// Wraps a fully observed return matrix into a panel with business-day
/// dates starting 2000-01-03 and ids "A0000", "A0001", ...
ReturnPanel synthetic_panel(const Eigen::MatrixXd& returns);

}  // namespace kbahc
