#include "kbahc/estimators.hpp"

#include "kbahc/bahc.hpp"
#include "kbahc/baselines.hpp"
#include "kbahc/errors.hpp"

namespace kbahc {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string label(const EstimatorSpec& spec) {
    return std::visit(overloaded{
                          [](const SampleSpec&) { return std::string("Sample"); },
                          [](const CvSpec&) { return std::string("CV"); },
                          [](const KBahcSpec& s) { return std::to_string(s.k) + "-BAHC"; },
                      },
                      spec);
}

void validate(const EstimatorSpec& spec) {
    std::visit(overloaded{
                   [](const SampleSpec&) {},
                   [](const CvSpec& s) {
                       if (s.folds < 2) throw ConfigError("CV folds must be >= 2");
                   },
                   [](const KBahcSpec& s) {
                       if (s.k < 1) throw ConfigError("k must be >= 1");
                       if (s.m < 1) throw ConfigError("m must be >= 1");
                   },
               },
               spec);
}

SymmetricMatrix estimate_covariance(const EstimatorSpec& spec, const Eigen::MatrixXd& returns,
                                    unsigned threads) {
    return std::visit(overloaded{
                          [&](const SampleSpec&) { return sample_estimator(returns); },
                          [&](const CvSpec& s) { return cv_eigenvalue_shrinkage(returns, s.folds); },
                          [&](const KBahcSpec& s) {
                              return kbahc_covariance(returns, s.k,
                                                      BootstrapPlan{s.m, s.base_seed, threads});
                          },
                      },
                      spec);
}

}  // namespace kbahc
