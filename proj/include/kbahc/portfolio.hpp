#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kbahc/data_io.hpp"
#include "kbahc/matrix_core.hpp"

namespace kbahc {

/// Fractions of capital per asset. `assets` may be empty for anonymous use.
struct Weights {
    std::vector<std::string> assets;
    Eigen::VectorXd values;
};

/// Minimum variance weights under the full-investment constraint only:
/// w = S^-1 1 / (1' S^-1 1), via an LDLT solve with a relative pivot floor
/// of 1e-12. Throws NumericError for singular or indefinite input.
Weights gmv_long_short(const SymmetricMatrix& cov);

/// Minimum variance weights with w >= 0, by a primal active-set method.
/// Weights on the active set are exactly zero.
Weights gmv_long_only(const SymmetricMatrix& cov);

/// CSV rows "date,asset,weight" appended for one rebalance.
std::string format_weights_rows(const Date& date, const Weights& w);

}  // namespace kbahc
