#include "kbahc/bahc.hpp"

#include <algorithm>

#include "kbahc/errors.hpp"
#include "kbahc/hclust_filter.hpp"
#include "kbahc/parallel.hpp"

namespace kbahc {

namespace {

constexpr int kMaxDrawAttempts = 100;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool has_degenerate_row(const Eigen::MatrixXd& returns, std::span<const std::size_t> draws) {
    for (Eigen::Index i = 0; i < returns.rows(); ++i) {
        const double first = returns(i, static_cast<Eigen::Index>(draws[0]));
        bool constant = true;
        for (std::size_t j = 1; j < draws.size() && constant; ++j)
            constant = returns(i, static_cast<Eigen::Index>(draws[j])) == first;
        if (constant) return true;
    }
    return false;
}

// Accumulates replicas in chunks of `threads`, summing each chunk in replica
// order so the total does not depend on the thread count.
template <typename ReplicaFn>
std::vector<SymmetricMatrix> average_replicas(Eigen::Index n, std::span<const int> orders,
                                              std::size_t m, unsigned threads,
                                              ReplicaFn&& replica) {
    std::vector<Eigen::MatrixXd> sum(orders.size(), Eigen::MatrixXd::Zero(n, n));
    const std::size_t chunk = std::max(1u, threads);
    std::vector<std::vector<FilteredCorrelation>> results(chunk);
    for (std::size_t begin = 0; begin < m; begin += chunk) {
        const std::size_t count = std::min(chunk, m - begin);
        parallel_for(count, threads, [&](std::size_t i) { results[i] = replica(begin + i); });
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t o = 0; o < orders.size(); ++o) sum[o] += results[i][o].matrix.matrix();
        }
    }
    std::vector<SymmetricMatrix> out;
    out.reserve(orders.size());
    for (auto& s : sum) out.emplace_back(s / static_cast<double>(m), MatrixRole::Correlation);
    return out;
}

std::vector<FilteredCorrelation> filter_replica(const Eigen::MatrixXd& returns,
                                                std::span<const std::size_t> draws,
                                                std::span<const int> orders) {
    const SymmetricMatrix corr = to_correlation(sample_covariance(bootstrap_columns(returns, draws)));
    return k_hcal_path(corr, orders);
}

void validate_orders(std::span<const int> orders) {
    if (orders.empty()) throw ConfigError("at least one filter order is required");
    for (int k : orders)
        if (k < 1) throw ConfigError("filter order k must be >= 1, got " + std::to_string(k));
}

}  // namespace

void BootstrapPlan::validate() const {
    if (m < 1) throw ConfigError("bootstrap replica count m must be >= 1");
}

std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(replica + 0x632be59bd9b4e019ULL));
}

ReplicaSampler::ReplicaSampler(std::uint64_t base_seed, std::uint64_t replica)
    : engine_(replica_seed(base_seed, replica)) {}

std::vector<std::size_t> ReplicaSampler::draw(std::size_t t) {
    if (t == 0) throw ConfigError("cannot resample an empty window");
    std::uniform_int_distribution<std::size_t> pick(0, t - 1);
    std::vector<std::size_t> out(t);
    for (auto& s : out) s = pick(engine_);
    return out;
}

Eigen::MatrixXd bootstrap_columns(const Eigen::MatrixXd& returns,
                                  std::span<const std::size_t> draws) {
    Eigen::MatrixXd out(returns.rows(), static_cast<Eigen::Index>(draws.size()));
    for (std::size_t j = 0; j < draws.size(); ++j) {
        if (draws[j] >= static_cast<std::size_t>(returns.cols()))
            throw ConfigError("bootstrap draw out of range");
        out.col(static_cast<Eigen::Index>(j)) = returns.col(static_cast<Eigen::Index>(draws[j]));
    }
    return out;
}

Eigen::MatrixXd bootstrap_columns(const Eigen::MatrixXd& returns, int replica,
                                  const BootstrapPlan& plan) {
    if (returns.cols() < 2) throw ConfigError("bootstrap needs t >= 2");
    ReplicaSampler sampler(plan.base_seed, static_cast<std::uint64_t>(replica));
    const auto draws = sampler.draw(static_cast<std::size_t>(returns.cols()));
    return bootstrap_columns(returns, draws);
}

std::vector<SymmetricMatrix> kbahc_correlation_path(const Eigen::MatrixXd& returns,
                                                    std::span<const int> orders,
                                                    const BootstrapPlan& plan) {
    plan.validate();
    validate_orders(orders);
    if (returns.cols() < 2) throw ConfigError("k-BAHC needs t >= 2");
    const auto t = static_cast<std::size_t>(returns.cols());
    return average_replicas(
        returns.rows(), orders, static_cast<std::size_t>(plan.m), plan.threads,
        [&](std::size_t b) {
            ReplicaSampler sampler(plan.base_seed, b);
            for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
                const auto draws = sampler.draw(t);
                if (!has_degenerate_row(returns, draws)) return filter_replica(returns, draws, orders);
            }
            throw NumericError("bootstrap replica " + std::to_string(b) +
                               " kept producing a zero-variance asset after " +
                               std::to_string(kMaxDrawAttempts) + " draws");
        });
}

SymmetricMatrix kbahc_correlation(const Eigen::MatrixXd& returns, int k,
                                  const BootstrapPlan& plan) {
    const int orders[] = {k};
    return std::move(kbahc_correlation_path(returns, orders, plan).front());
}

std::vector<SymmetricMatrix> kbahc_correlation_from_draws(
    const Eigen::MatrixXd& returns, std::span<const int> orders,
    std::span<const std::vector<std::size_t>> draws, unsigned threads) {
    validate_orders(orders);
    if (draws.empty()) throw ConfigError("at least one replica is required");
    return average_replicas(returns.rows(), orders, draws.size(), threads, [&](std::size_t b) {
        if (draws[b].size() < 2) throw ConfigError("a replica needs at least 2 draws");
        if (has_degenerate_row(returns, draws[b]))
            throw NumericError("replica " + std::to_string(b) + " has a zero-variance asset");
        return filter_replica(returns, draws[b], orders);
    });
}

std::vector<SymmetricMatrix> kbahc_covariance_path(const Eigen::MatrixXd& returns,
                                                   std::span<const int> orders,
                                                   const BootstrapPlan& plan) {
    const Eigen::VectorXd variances = sample_covariance(returns).matrix().diagonal();
    for (Eigen::Index i = 0; i < variances.size(); ++i) {
        if (!(variances(i) > 0.0))
            throw NumericError("degenerate asset #" + std::to_string(i) + ": zero sample variance");
    }
    auto corr = kbahc_correlation_path(returns, orders, plan);
    std::vector<SymmetricMatrix> out;
    out.reserve(corr.size());
    for (const auto& c : corr) out.push_back(to_covariance(c, variances));
    return out;
}

SymmetricMatrix kbahc_covariance(const Eigen::MatrixXd& returns, int k,
                                 const BootstrapPlan& plan) {
    const int orders[] = {k};
    return std::move(kbahc_covariance_path(returns, orders, plan).front());
}

}  // namespace kbahc
