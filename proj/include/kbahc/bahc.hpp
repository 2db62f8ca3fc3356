#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kbahc/matrix_core.hpp"

namespace kbahc {

/// m bootstrap replicas; replica b draws from its own stream derived from
/// (base_seed, b), so replicas can be computed in any order.
struct BootstrapPlan {
    int m = 100;
    std::uint64_t base_seed = 0;
    /// Worker threads used for replicas. Results do not depend on it.
    unsigned threads = 1;

    void validate() const;
};

/// Seed of the stream owned by replica b.
std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica);

/// Column draws for one replica. Successive calls continue the same stream,
/// which is how a degenerate draw is replaced.
class ReplicaSampler {
public:
    ReplicaSampler(std::uint64_t base_seed, std::uint64_t replica);
    /// t i.i.d. uniform indices in [0, t).
    std::vector<std::size_t> draw(std::size_t t);

private:
    std::mt19937_64 engine_;
};

/// Columns of R picked by `draws` (output column j is R column draws[j]).
Eigen::MatrixXd bootstrap_columns(const Eigen::MatrixXd& returns,
                                  std::span<const std::size_t> draws);

/// First draw of replica b applied to R.
Eigen::MatrixXd bootstrap_columns(const Eigen::MatrixXd& returns, int replica,
                                  const BootstrapPlan& plan);

/// Mean over replicas of the order-k filtered correlation of each replica,
/// for every requested order, sharing the same replicas across orders.
///
/// A replica in which some row has zero variance is redrawn from the
/// continuing stream, up to 100 attempts; then NumericError.
std::vector<SymmetricMatrix> kbahc_correlation_path(const Eigen::MatrixXd& returns,
                                                    std::span<const int> orders,
                                                    const BootstrapPlan& plan);

SymmetricMatrix kbahc_correlation(const Eigen::MatrixXd& returns, int k,
                                  const BootstrapPlan& plan);

/// Same average over explicitly given column draws (one vector per replica).
/// A degenerate draw is an error here.
std::vector<SymmetricMatrix> kbahc_correlation_from_draws(
    const Eigen::MatrixXd& returns, std::span<const int> orders,
    std::span<const std::vector<std::size_t>> draws, unsigned threads = 1);

/// Filtered correlation rescaled by the variances of the original sample.
std::vector<SymmetricMatrix> kbahc_covariance_path(const Eigen::MatrixXd& returns,
                                                   std::span<const int> orders,
                                                   const BootstrapPlan& plan);

SymmetricMatrix kbahc_covariance(const Eigen::MatrixXd& returns, int k,
                                 const BootstrapPlan& plan);

}  // namespace kbahc
