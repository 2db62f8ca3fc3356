#include "kbahc/hclust_filter.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <tuple>

#include "kbahc/errors.hpp"

namespace kbahc {

Dendrogram::Dendrogram(std::size_t n_leaves, std::vector<Merge> merges)
    : n_leaves_(n_leaves), merges_(std::move(merges)), leaf_ids_(n_leaves) {
    std::iota(leaf_ids_.begin(), leaf_ids_.end(), 0);
}

std::span<const int> Dendrogram::members(int id) const {
    if (id < 0) throw ConfigError("negative cluster id");
    const auto uid = static_cast<std::size_t>(id);
    if (uid < n_leaves_) return std::span<const int>(&leaf_ids_[uid], 1);
    const std::size_t k = uid - n_leaves_;
    if (k >= merges_.size()) throw ConfigError("unknown cluster id " + std::to_string(id));
    return merges_[k].members;
}

namespace {

struct PairKey {
    double rho = std::numeric_limits<double>::infinity();
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::max();
    Eigen::Index slot = -1;

    bool operator<(const PairKey& o) const {
        return std::tie(rho, lo, hi) < std::tie(o.rho, o.lo, o.hi);
    }
};

}  // namespace

Dendrogram average_linkage(const SymmetricMatrix& distances) {
    const Eigen::Index n = distances.dim();
    if (n < 2) throw NumericError("average linkage needs at least 2 objects");
    if (!distances.matrix().allFinite()) throw NumericError("non-finite dissimilarity");

    // Working copy indexed by slot; a merged cluster reuses the slot of its
    // first constituent.
    Eigen::MatrixXd d = distances.matrix();
    std::vector<int> cluster_id(static_cast<std::size_t>(n));
    std::iota(cluster_id.begin(), cluster_id.end(), 0);
    std::vector<double> size(static_cast<std::size_t>(n), 1.0);
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(i)] = {static_cast<int>(i)};

    auto key_of = [&](Eigen::Index p, Eigen::Index q) {
        const int a = cluster_id[static_cast<std::size_t>(p)];
        const int b = cluster_id[static_cast<std::size_t>(q)];
        return PairKey{d(p, q), std::min(a, b), std::max(a, b), q};
    };
    std::vector<PairKey> nearest(static_cast<std::size_t>(n));
    auto refresh = [&](Eigen::Index p) {
        PairKey best;
        for (Eigen::Index q = 0; q < n; ++q) {
            if (q == p || !active[static_cast<std::size_t>(q)]) continue;
            const PairKey k = key_of(p, q);
            if (k < best) best = k;
        }
        nearest[static_cast<std::size_t>(p)] = best;
    };
    for (Eigen::Index p = 0; p < n; ++p) refresh(p);

    std::vector<Merge> merges;
    merges.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index step = 0; step < n - 1; ++step) {
        Eigen::Index p = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!active[static_cast<std::size_t>(i)]) continue;
            if (p < 0 || nearest[static_cast<std::size_t>(i)] < nearest[static_cast<std::size_t>(p)])
                p = i;
        }
        const Eigen::Index q = nearest[static_cast<std::size_t>(p)].slot;
        const auto up = static_cast<std::size_t>(p);
        const auto uq = static_cast<std::size_t>(q);

        Merge m;
        m.height = d(p, q);
        m.id = static_cast<int>(n + step);
        const bool p_first = cluster_id[up] < cluster_id[uq];
        const std::size_t first = p_first ? up : uq;
        const std::size_t second = p_first ? uq : up;
        m.left = cluster_id[first];
        m.right = cluster_id[second];
        m.members.reserve(members[first].size() + members[second].size());
        m.members.insert(m.members.end(), members[first].begin(), members[first].end());
        m.members.insert(m.members.end(), members[second].begin(), members[second].end());

        // Lance-Williams update for average linkage, new cluster in slot p.
        const double sp = size[up];
        const double sq = size[uq];
        const double total = sp + sq;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k == p || k == q || !active[static_cast<std::size_t>(k)]) continue;
            const double v = (sp * d(p, k) + sq * d(q, k)) / total;
            d(p, k) = v;
            d(k, p) = v;
        }
        active[uq] = 0;
        size[up] = total;
        cluster_id[up] = m.id;
        members[up] = m.members;
        members[uq].clear();
        merges.push_back(std::move(m));

        for (Eigen::Index k = 0; k < n; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            if (k == p || !active[uk]) continue;
            const Eigen::Index cached = nearest[uk].slot;
            if (cached == p || cached == q) {
                refresh(k);
            } else {
                const PairKey candidate = key_of(k, p);
                if (candidate < nearest[uk]) nearest[uk] = candidate;
            }
        }
        refresh(p);
    }
    return Dendrogram(static_cast<std::size_t>(n), std::move(merges));
}

SymmetricMatrix hcal(const SymmetricMatrix& m, Dendrogram* dendrogram) {
    const Eigen::Index n = m.dim();
    if (n < 2) {
        if (dendrogram) *dendrogram = Dendrogram(static_cast<std::size_t>(n), {});
        return m;
    }
    Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(n, n) - m.matrix();
    Dendrogram tree = average_linkage(SymmetricMatrix(dist));

    Eigen::MatrixXd out(n, n);
    out.diagonal() = m.matrix().diagonal();
    for (const Merge& merge : tree.merges()) {
        const double value = 1.0 - merge.height;
        for (int i : tree.members(merge.left)) {
            for (int j : tree.members(merge.right)) {
                out(i, j) = value;
                out(j, i) = value;
            }
        }
    }
    if (dendrogram) *dendrogram = std::move(tree);
    return SymmetricMatrix(out, m.role(), m.labels());
}

SymmetricMatrix hcal(const SymmetricMatrix& m) { return hcal(m, nullptr); }

std::vector<FilteredCorrelation> k_hcal_path(const SymmetricMatrix& corr,
                                             std::span<const int> orders) {
    int max_order = 0;
    for (int k : orders) {
        if (k < 1) throw ConfigError("filter order k must be >= 1, got " + std::to_string(k));
        max_order = std::max(max_order, k);
    }
    std::vector<FilteredCorrelation> out(orders.size());
    if (orders.empty()) return out;

    const Eigen::Index n = corr.dim();
    Eigen::MatrixXd filtered = Eigen::MatrixXd::Zero(n, n);
    for (int step = 1; step <= max_order; ++step) {
        const SymmetricMatrix residue(corr.matrix() - filtered, MatrixRole::Residue);
        filtered += hcal(residue).matrix();
        for (std::size_t idx = 0; idx < orders.size(); ++idx) {
            if (orders[idx] != step) continue;
            SymmetricMatrix snapshot(filtered, MatrixRole::Correlation, corr.labels());
            bool clipped = false;
            if (step > 1) snapshot = clip_negative_eigenvalues(snapshot, &clipped);
            out[idx] = FilteredCorrelation{std::move(snapshot), step, clipped};
        }
    }
    return out;
}

FilteredCorrelation k_hcal(const SymmetricMatrix& corr, int k) {
    const int orders[] = {k};
    return std::move(k_hcal_path(corr, orders).front());
}

std::string format_dendrogram(const Dendrogram& d) {
    std::string out = "merge_index,left,right,height,size\n";
    for (std::size_t k = 0; k < d.merges().size(); ++k) {
        const Merge& m = d.merges()[k];
        out += std::to_string(k) + ',' + std::to_string(m.left) + ',' + std::to_string(m.right) +
               ',' + format_double(m.height) + ',' + std::to_string(m.members.size()) + '\n';
    }
    return out;
}

void write_dendrogram(const Dendrogram& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << format_dendrogram(d);
}

}  // namespace kbahc
