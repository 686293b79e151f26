#pragma once

#include "erpm/common.hpp"

#include <span>
#include <vector>

namespace erpm::neighborhoods {

/// Per-point k nearest neighbors in ascending distance order, self excluded.
/// Ties are broken by the smaller point index.
class NeighborhoodIndex {
public:
    NeighborhoodIndex() = default;
    NeighborhoodIndex(Index n, Index k, std::vector<Index> flat);

    Index n() const { return n_; }
    Index k() const { return k_; }

    std::span<const Index> row(Index i) const {
        return {flat_.data() + i * k_, static_cast<std::size_t>(k_)};
    }

    /// First k' <= k neighbors of every point.
    NeighborhoodIndex truncated(Index k) const;

private:
    Index n_ = 0;
    Index k_ = 0;
    std::vector<Index> flat_;
};

/// rank(i, j) = 1-based position of j in the distance ordering from i.
/// The diagonal holds 0 (unset).
class RankTable {
public:
    using Table = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    RankTable() = default;
    explicit RankTable(Table ranks) : ranks_(std::move(ranks)) {}

    Index n() const { return ranks_.rows(); }
    std::int32_t operator()(Index i, Index j) const { return ranks_(i, j); }
    const Table& table() const { return ranks_; }

    /// Neighbor lists recovered from the ranks: row i lists the points of
    /// rank 1..k from i. Identical to knn_index on the same data.
    NeighborhoodIndex neighbors(Index k) const;

private:
    Table ranks_;
};

NeighborhoodIndex knn_index(const Eigen::Ref<const Matrix>& X, Index k);

/// d x k matrix whose columns are the neighbors of point i (neighbor order).
Matrix neighborhood_matrix(const Eigen::Ref<const Matrix>& X, const NeighborhoodIndex& idx,
                           Index i);

/// M - (1/k) M 1 1^T : subtracts each row's mean across the k columns.
Matrix center_columns(const Eigen::Ref<const Matrix>& M);

RankTable rank_table(const Eigen::Ref<const Matrix>& X);

/// Squared Euclidean distances from point i to every point (i itself gets 0).
Vector squared_distances_from(const Eigen::Ref<const Matrix>& X, Index i);

}  // namespace erpm::neighborhoods
