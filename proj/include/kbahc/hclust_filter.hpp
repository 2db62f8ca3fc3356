#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kbahc/matrix_core.hpp"

namespace kbahc {

/// One agglomeration step. Leaves have ids 0..n-1; the cluster created by
/// merge k gets id n + k. `left` is the smaller of the two merged ids.
struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int id = 0;
    std::vector<int> members;  // leaves of the new cluster: left's then right's
};

/// Ordered merge list of an average-linkage agglomeration.
class Dendrogram {
public:
    Dendrogram() = default;
    Dendrogram(std::size_t n_leaves, std::vector<Merge> merges);

    std::size_t n_leaves() const { return n_leaves_; }
    const std::vector<Merge>& merges() const { return merges_; }
    /// Leaves of cluster `id` (a leaf or a merge product).
    std::span<const int> members(int id) const;

private:
    std::size_t n_leaves_ = 0;
    std::vector<Merge> merges_;
    std::vector<int> leaf_ids_;
};

/// Greedy average-linkage agglomeration of a dissimilarity matrix.
///
/// At every step the pair of clusters with the smallest average
/// dissimilarity rho_pq = sum_{i in p, j in q} d_ij / (n_p n_q) is merged;
/// exact ties go to the lexicographically smallest (min id, max id). Only
/// off-diagonal entries are read, and they may be negative or exceed 1.
Dendrogram average_linkage(const SymmetricMatrix& distances);

/// Average-linkage filter of a similarity matrix: with D = 1 - M, every
/// pair (i, j) joined at merge (p, q) is replaced by 1 - rho_pq. The
/// diagonal is copied from the input.
SymmetricMatrix hcal(const SymmetricMatrix& m);

/// hcal that also returns the dendrogram it was built from.
SymmetricMatrix hcal(const SymmetricMatrix& m, Dendrogram* dendrogram);

struct FilteredCorrelation {
    SymmetricMatrix matrix;
    int order = 1;
    bool clipped = false;  // negative eigenvalues were set to zero
};

/// Order-k recursive filter. Starting from a zero filtered matrix, the
/// residue E = C - F is filtered with hcal and accumulated into F, k times.
/// For k > 1 the result has its negative eigenvalues set to zero; k = 1 is
/// exactly hcal(C).
FilteredCorrelation k_hcal(const SymmetricMatrix& corr, int k);

/// Same recursion evaluated once for several orders. `orders` must be
/// positive; the output follows the input order.
std::vector<FilteredCorrelation> k_hcal_path(const SymmetricMatrix& corr,
                                             std::span<const int> orders);

/// CSV: merge_index,left,right,height,size.
std::string format_dendrogram(const Dendrogram& d);
void write_dendrogram(const Dendrogram& d, const std::filesystem::path& path);

}  // namespace kbahc
