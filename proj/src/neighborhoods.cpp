#include "erpm/neighborhoods.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace erpm::neighborhoods {

namespace {

void require_finite(const Eigen::Ref<const Matrix>& X, const char* who) {
    if (!X.allFinite()) throw InputError(std::string(who) + ": data has non-finite entries");
}

// Ordering of all other points by (distance, index).
std::vector<Index> sorted_others(const Vector& d2, Index self, Index keep) {
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(d2.size() - 1));
    for (Index j = 0; j < d2.size(); ++j)
        if (j != self) order.push_back(j);
    auto less = [&](Index a, Index b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); };
    const auto mid = order.begin() + keep;
    if (mid == order.end())
        std::sort(order.begin(), order.end(), less);
    else
        std::partial_sort(order.begin(), mid, order.end(), less);
    order.resize(static_cast<std::size_t>(keep));
    return order;
}

}  // namespace

NeighborhoodIndex::NeighborhoodIndex(Index n, Index k, std::vector<Index> flat)
    : n_(n), k_(k), flat_(std::move(flat)) {
    if (static_cast<Index>(flat_.size()) != n_ * k_)
        throw InputError("NeighborhoodIndex: table size does not match n*k");
}

NeighborhoodIndex NeighborhoodIndex::truncated(Index k) const {
    if (k < 1 || k > k_) throw ParameterError("NeighborhoodIndex::truncated: k out of range");
    std::vector<Index> flat;
    flat.reserve(static_cast<std::size_t>(n_ * k));
    for (Index i = 0; i < n_; ++i) {
        auto r = row(i);
        flat.insert(flat.end(), r.begin(), r.begin() + k);
    }
    return NeighborhoodIndex(n_, k, std::move(flat));
}

NeighborhoodIndex RankTable::neighbors(Index k) const {
    const Index n = this->n();
    if (k < 1 || k > n - 1) throw ParameterError("RankTable::neighbors: k must be in [1, n-1]");
    std::vector<Index> flat(static_cast<std::size_t>(n * k));
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const auto r = ranks_(i, j);
            if (j != i && r <= k) flat[static_cast<std::size_t>(i * k + r - 1)] = j;
        }
    }
    return NeighborhoodIndex(n, k, std::move(flat));
}

Vector squared_distances_from(const Eigen::Ref<const Matrix>& X, Index i) {
    return (X.rowwise() - X.row(i)).rowwise().squaredNorm();
}

NeighborhoodIndex knn_index(const Eigen::Ref<const Matrix>& X, Index k) {
    const Index n = X.rows();
    if (k < 1 || k > n - 1)
        throw ParameterError("knn_index: k must satisfy 1 <= k <= n-1 (k=" + std::to_string(k) +
                             ", n=" + std::to_string(n) + ")");
    require_finite(X, "knn_index");
    std::vector<Index> flat(static_cast<std::size_t>(n * k));
    for (Index i = 0; i < n; ++i) {
        const auto order = sorted_others(squared_distances_from(X, i), i, k);
        std::copy(order.begin(), order.end(), flat.begin() + i * k);
    }
    return NeighborhoodIndex(n, k, std::move(flat));
}

Matrix neighborhood_matrix(const Eigen::Ref<const Matrix>& X, const NeighborhoodIndex& idx,
                           Index i) {
    if (i < 0 || i >= idx.n() || idx.n() != X.rows())
        throw ParameterError("neighborhood_matrix: point index out of range");
    const auto nb = idx.row(i);
    Matrix M(X.cols(), idx.k());
    for (Index c = 0; c < idx.k(); ++c) M.col(c) = X.row(nb[static_cast<std::size_t>(c)]).transpose();
    return M;
}

Matrix center_columns(const Eigen::Ref<const Matrix>& M) {
    if (M.cols() < 1) throw ParameterError("center_columns: need at least one column");
    const Vector mean = M.rowwise().mean();
    return M.colwise() - mean;
}

RankTable rank_table(const Eigen::Ref<const Matrix>& X) {
    const Index n = X.rows();
    if (n < 2) throw ParameterError("rank_table: need at least 2 points");
    require_finite(X, "rank_table");
    RankTable::Table ranks = RankTable::Table::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto order = sorted_others(squared_distances_from(X, i), i, n - 1);
        for (std::size_t p = 0; p < order.size(); ++p)
            ranks(i, order[p]) = static_cast<std::int32_t>(p + 1);
    }
    return RankTable(std::move(ranks));
}

}  // namespace erpm::neighborhoods
