#pragma once

#include "erpm/common.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace erpm::reducers {

/// `identity` returns the input unchanged; it is a baseline for harness runs.
enum class Method { identity, pca, kpca2, lle, hlle, isomap, info_lle };

std::string_view to_string(Method m);
/// Accepts the CLI names: identity, pca, kpca2, lle, hlle, isomap, info-lle.
Method parse_method(std::string_view name);
bool uses_neighbors(Method m);

inline constexpr double kDefaultLleRegularization = 1e-3;

struct ReducerSpec {
    Method method = Method::pca;
    Index target_dim = 2;
    Index k = 20;
    double regularization = kDefaultLleRegularization;

    /// Checks the neighbor-count bounds against the target dimension.
    void validate(Index n, Index ambient_dim) const;
};

/// Embedding plus non-fatal diagnostics (dropped eigenpairs, rank deficits).
struct Reduction {
    Matrix embedding;
    std::vector<std::string> warnings;
};

Reduction pca(const Eigen::Ref<const Matrix>& X, Index d);

/// Kernel PCA with the quadratic kernel (x^T y + 1)^2.
Reduction kpca(const Eigen::Ref<const Matrix>& X, Index d);

Reduction lle(const Eigen::Ref<const Matrix>& X, Index d, Index k,
              double regularization = kDefaultLleRegularization);

Reduction hlle(const Eigen::Ref<const Matrix>& X, Index d, Index k);

Reduction isomap(const Eigen::Ref<const Matrix>& X, Index d, Index k);

Reduction info_lle(const Eigen::Ref<const Matrix>& X, Index d, Index k);

Reduction reduce(const Eigen::Ref<const Matrix>& X, const ReducerSpec& spec);

// Building blocks, exposed for testing and reuse.

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
void fix_column_signs(Matrix& V);

/// Dense n x n LLE weight matrix; row i is supported on the k neighbors of i
/// and sums to 1.
Matrix lle_weights(const Eigen::Ref<const Matrix>& X, Index k, double regularization);

/// Bottom eigenvectors 1..d of (I - W)^T (I - W) scaled to unit covariance,
/// skipping the constant one. Optionally returns the ascending eigenvalues.
Matrix null_space_embedding(const Eigen::Ref<const Matrix>& M, Index d,
                            Vector* eigenvalues = nullptr);

/// Sum over neighborhoods of the local Hessian-estimator Gram blocks.
Matrix hessian_alignment_matrix(const Eigen::Ref<const Matrix>& X, Index d, Index k);

/// All-pairs shortest paths over the symmetrized k-NN graph with Euclidean
/// edge weights. Throws NumericalError listing component sizes when the graph
/// is disconnected.
Matrix geodesic_distances(const Eigen::Ref<const Matrix>& X, Index k);

/// Dijkstra over a dense weighted adjacency (0 or +inf = no edge off-diagonal).
Matrix all_pairs_shortest_paths(const Eigen::Ref<const Matrix>& weights);

/// Classical multidimensional scaling of a distance matrix.
Reduction classical_mds(const Eigen::Ref<const Matrix>& D, Index d);

/// Per-row discrete distributions from a Gaussian kernel density estimate
/// over the row's coordinates (Silverman bandwidth, floor 1e-12).
Matrix kde_distributions(const Eigen::Ref<const Matrix>& X);

/// Symmetrized Kullback-Leibler divergence between two distributions.
double symmetric_kl(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q);

}  // namespace erpm::reducers
