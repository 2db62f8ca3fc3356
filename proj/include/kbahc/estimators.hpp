#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "kbahc/matrix_core.hpp"

namespace kbahc {

struct SampleSpec {};

struct CvSpec {
    int folds = 10;
};

struct KBahcSpec {
    int k = 1;
    int m = 100;
    std::uint64_t base_seed = 0;
};

/// Declarative choice of covariance cleaning scheme.
using EstimatorSpec = std::variant<SampleSpec, CvSpec, KBahcSpec>;

/// "Sample", "CV" or "<k>-BAHC".
std::string label(const EstimatorSpec& spec);

void validate(const EstimatorSpec& spec);

/// Covariance of the n x t return block under the chosen scheme.
SymmetricMatrix estimate_covariance(const EstimatorSpec& spec, const Eigen::MatrixXd& returns,
                                    unsigned threads = 1);

}  // namespace kbahc
