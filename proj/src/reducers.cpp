#include "erpm/reducers.hpp"

#include "erpm/neighborhoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace erpm::reducers {

namespace nb = erpm::neighborhoods;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigenvalues at or below this fraction of the largest are treated as zero.
constexpr double kEigenTolerance = 1e-10;

void require_finite(const Eigen::Ref<const Matrix>& X, std::string_view who) {
    if (X.rows() < 2) throw InputError(std::string(who) + ": need at least 2 points");
    if (!X.allFinite()) throw InputError(std::string(who) + ": data has non-finite entries");
}

void require_dim(Index d, Index upper, std::string_view who, std::string_view what) {
    if (d < 1 || d > upper)
        throw ParameterError(std::string(who) + ": target dimension must be in [1, " +
                             std::to_string(upper) + "] (" + std::string(what) + ")");
}

void require_neighbors(Index k, Index lower, Index n, std::string_view who) {
    if (k < lower || k > n - 1)
        throw ParameterError(std::string(who) + ": k must be in [" + std::to_string(lower) + ", " +
                             std::to_string(n - 1) + "], got " + std::to_string(k));
}

Matrix double_center(const Eigen::Ref<const Matrix>& K) {
    const Vector row_mean = K.rowwise().mean();
    const Vector col_mean = K.colwise().mean().transpose();
    const double total = K.mean();
    Matrix C = K;
    C.colwise() -= row_mean;
    C.rowwise() -= col_mean.transpose();
    C.array() += total;
    return C;
}

// Top-d eigenpairs of a symmetric matrix as columns u_j * sqrt(lambda_j);
// nonpositive eigenvalues give zero columns and a warning.
Reduction top_scaled_eigenvectors(const Matrix& S, Index d, std::string_view who) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    if (eig.info() != Eigen::Success) throw NumericalError(std::string(who) + ": eigensolver failed");
    const Index n = S.rows();
    const Vector& lambda = eig.eigenvalues();
    const double top = std::max(0.0, lambda[n - 1]);

    Matrix U(n, d);
    for (Index j = 0; j < d; ++j) U.col(j) = eig.eigenvectors().col(n - 1 - j);
    fix_column_signs(U);

    Reduction out;
    out.embedding = Matrix::Zero(n, d);
    for (Index j = 0; j < d; ++j) {
        const double l = lambda[n - 1 - j];
        if (l > kEigenTolerance * top && l > 0.0) {
            out.embedding.col(j) = U.col(j) * std::sqrt(l);
        } else {
            std::ostringstream msg;
            msg << who << ": eigenvalue " << (j + 1) << " is not positive (" << l
                << "); coordinate set to zero";
            out.warnings.push_back(msg.str());
        }
    }
    return out;
}

// Inverse square root of a symmetric positive definite matrix.
Matrix inverse_sqrt(const Matrix& R) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(R);
    Vector inv = eig.eigenvalues();
    for (Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > 0.0 ? 1.0 / std::sqrt(inv[i]) : 0.0;
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::identity: return "identity";
        case Method::pca: return "pca";
        case Method::kpca2: return "kpca2";
        case Method::lle: return "lle";
        case Method::hlle: return "hlle";
        case Method::isomap: return "isomap";
        case Method::info_lle: return "info-lle";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (auto m : {Method::identity, Method::pca, Method::kpca2, Method::lle, Method::hlle,
                   Method::isomap, Method::info_lle}) {
        if (name == to_string(m)) return m;
    }
    if (name == "kpca") return Method::kpca2;
    if (name == "info_lle") return Method::info_lle;
    throw InputError("unknown reduction method '" + std::string(name) + "'");
}

bool uses_neighbors(Method m) {
    return m == Method::lle || m == Method::hlle || m == Method::isomap || m == Method::info_lle;
}

void ReducerSpec::validate(Index n, Index ambient_dim) const {
    const auto who = to_string(method);
    if (method == Method::identity) return;
    if (target_dim < 1) throw ParameterError(std::string(who) + ": target_dim must be positive");
    if (method == Method::kpca2) {
        require_dim(target_dim, n, who, "at most n");
    } else {
        require_dim(target_dim, ambient_dim, who, "at most the ambient dimension");
    }
    if (regularization < 0.0 || !std::isfinite(regularization))
        throw ParameterError(std::string(who) + ": regularization must be finite and >= 0");
    switch (method) {
        case Method::lle:
        case Method::isomap:
        case Method::info_lle:
            require_neighbors(k, method == Method::isomap ? 1 : target_dim + 1, n, who);
            break;
        case Method::hlle:
            require_neighbors(k, target_dim + target_dim * (target_dim + 1) / 2 + 1, n, who);
            break;
        default:
            break;
    }
}

void fix_column_signs(Matrix& V) {
    for (Index j = 0; j < V.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < V.rows(); ++i) {
            const double a = std::abs(V(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (V.rows() > 0 && V(arg, j) < 0.0) V.col(j) = -V.col(j);
    }
}

// ---------------------------------------------------------------------------
// PCA / KPCA

Reduction pca(const Eigen::Ref<const Matrix>& X, Index d) {
    require_finite(X, "pca");
    require_dim(d, X.cols(), "pca", "at most the ambient dimension");
    const Matrix Xc = X.rowwise() - X.colwise().mean();
    Eigen::BDCSVD<Matrix> svd(Xc, Eigen::ComputeThinV);
    const Matrix V = svd.matrixV().leftCols(std::min<Index>(d, svd.matrixV().cols()));

    Reduction out;
    out.embedding = Matrix::Zero(X.rows(), d);
    const Vector& sigma = svd.singularValues();
    const double top = sigma.size() > 0 ? sigma[0] : 0.0;
    for (Index j = 0; j < d; ++j) {
        if (j < sigma.size() && sigma[j] > kEigenTolerance * top && sigma[j] > 0.0) {
            out.embedding.col(j) = Xc * V.col(j);
        } else {
            out.warnings.push_back("pca: component " + std::to_string(j + 1) +
                                   " has zero variance; coordinate set to zero");
        }
    }
    fix_column_signs(out.embedding);
    return out;
}

Reduction kpca(const Eigen::Ref<const Matrix>& X, Index d) {
    require_finite(X, "kpca2");
    require_dim(d, X.rows(), "kpca2", "at most n");
    Matrix K = X * X.transpose();
    K.array() += 1.0;
    K = K.array().square().matrix();
    return top_scaled_eigenvectors(double_center(K), d, "kpca2");
}

// ---------------------------------------------------------------------------
// LLE

Matrix lle_weights(const Eigen::Ref<const Matrix>& X, Index k, double regularization) {
    const Index n = X.rows();
    const Index D = X.cols();
    const auto idx = nb::knn_index(X, k);
    Matrix W = Matrix::Zero(n, n);
    const Vector ones = Vector::Ones(k);
    for (Index i = 0; i < n; ++i) {
        const auto nbrs = idx.row(i);
        Matrix Z(k, D);
        for (Index a = 0; a < k; ++a) Z.row(a) = X.row(nbrs[static_cast<std::size_t>(a)]) - X.row(i);
        Matrix G = Z * Z.transpose();

        Vector w;
        if (k > D && regularization > 0.0) {
            const double tr = G.trace();
            G.diagonal().array() += tr > 0.0 ? regularization * tr / static_cast<double>(k)
                                             : regularization;
            w = G.ldlt().solve(ones);
        } else {
            // Minimum-norm solution of the KKT system for min w'Gw s.t. sum(w) = 1;
            // well posed even when G is singular.
            Matrix kkt = Matrix::Zero(k + 1, k + 1);
            kkt.topLeftCorner(k, k) = G;
            kkt.topRightCorner(k, 1).setOnes();
            kkt.bottomLeftCorner(1, k).setOnes();
            Vector rhs = Vector::Zero(k + 1);
            rhs[k] = 1.0;
            w = kkt.completeOrthogonalDecomposition().solve(rhs).head(k);
        }
        const double total = w.sum();
        if (!w.allFinite() || std::abs(total) < std::numeric_limits<double>::min())
            throw NumericalError("lle: reconstruction weights for point " + std::to_string(i) +
                                 " are undefined");
        w /= total;
        for (Index a = 0; a < k; ++a) W(i, nbrs[static_cast<std::size_t>(a)]) = w[a];
    }
    return W;
}

Matrix null_space_embedding(const Eigen::Ref<const Matrix>& M, Index d, Vector* eigenvalues) {
    const Index n = M.rows();
    if (d + 1 > n) throw ParameterError("null_space_embedding: need n > d");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver failed on alignment matrix");
    if (eigenvalues) *eigenvalues = eig.eigenvalues();
    Matrix Y = eig.eigenvectors().middleCols(1, d);
    fix_column_signs(Y);
    return Y * std::sqrt(static_cast<double>(n));
}

Reduction lle(const Eigen::Ref<const Matrix>& X, Index d, Index k, double regularization) {
    require_finite(X, "lle");
    require_dim(d, X.cols(), "lle", "at most the ambient dimension");
    require_neighbors(k, d + 1, X.rows(), "lle");
    const Matrix W = lle_weights(X, k, regularization);
    const Matrix IW = Matrix::Identity(X.rows(), X.rows()) - W;
    Reduction out;
    out.embedding = null_space_embedding(IW.transpose() * IW, d);
    return out;
}

// ---------------------------------------------------------------------------
// Hessian eigenmaps

Matrix hessian_alignment_matrix(const Eigen::Ref<const Matrix>& X, Index d, Index k) {
    const Index n = X.rows();
    const Index dp = d * (d + 1) / 2;
    require_neighbors(k, d + dp + 1, n, "hlle");
    require_dim(d, X.cols(), "hlle", "at most the ambient dimension");
    const auto idx = nb::knn_index(X, k);

    Matrix M = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto nbrs = idx.row(i);
        Matrix G(k, X.cols());
        for (Index a = 0; a < k; ++a) G.row(a) = X.row(nbrs[static_cast<std::size_t>(a)]);
        G.rowwise() -= G.colwise().mean();

        // Local tangent coordinates: top-d left singular vectors.
        Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU);
        const Matrix U = svd.matrixU().leftCols(d);

        // [1, tangent coords, quadratic monomials], orthogonalized.
        Matrix Yi(k, 1 + d + dp);
        Yi.col(0).setOnes();
        Yi.middleCols(1, d) = U;
        Index c = 1 + d;
        for (Index a = 0; a < d; ++a)
            for (Index b = a; b < d; ++b) Yi.col(c++) = U.col(a).cwiseProduct(U.col(b));
        Eigen::HouseholderQR<Matrix> qr(Yi);
        const Matrix Q = qr.householderQ() * Matrix::Identity(k, 1 + d + dp);

        // Hessian estimator rows, each rescaled to unit sum when that is stable.
        Matrix H = Q.rightCols(dp).transpose();
        for (Index r = 0; r < dp; ++r) {
            const double s = H.row(r).sum();
            if (std::abs(s) > 1e-4) H.row(r) /= s;
        }
        const Matrix block = H.transpose() * H;
        for (Index a = 0; a < k; ++a)
            for (Index b = 0; b < k; ++b)
                M(nbrs[static_cast<std::size_t>(a)], nbrs[static_cast<std::size_t>(b)]) += block(a, b);
    }
    return M;
}

Reduction hlle(const Eigen::Ref<const Matrix>& X, Index d, Index k) {
    require_finite(X, "hlle");
    const Matrix M = hessian_alignment_matrix(X, d, k);
    Vector lambda;
    Matrix Y = null_space_embedding(M, d, &lambda) / std::sqrt(static_cast<double>(X.rows()));

    Reduction out;
    if (lambda.size() > d + 1 && lambda[d] > 1e-8 * lambda[lambda.size() - 1] &&
        lambda[d] > 0.5 * lambda[d + 1]) {
        out.warnings.push_back("hlle: null space of the Hessian alignment matrix is not separated");
    }
    // Orthonormalize the coordinates: Y <- Y (Y^T Y)^{-1/2}.
    Y = Y * inverse_sqrt(Y.transpose() * Y);
    fix_column_signs(Y);
    out.embedding = std::move(Y);
    return out;
}

// ---------------------------------------------------------------------------
// Isomap

Matrix all_pairs_shortest_paths(const Eigen::Ref<const Matrix>& weights) {
    const Index n = weights.rows();
    if (weights.cols() != n) throw InputError("all_pairs_shortest_paths: adjacency must be square");

    std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j && weights(i, j) > 0.0 && std::isfinite(weights(i, j)))
                adj[static_cast<std::size_t>(i)].emplace_back(j, weights(i, j));

    Matrix dist = Matrix::Constant(n, n, kInf);
    using Item = std::pair<double, Index>;
    for (Index s = 0; s < n; ++s) {
        auto row = dist.row(s);
        row[s] = 0.0;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.emplace(0.0, s);
        while (!heap.empty()) {
            const auto [du, u] = heap.top();
            heap.pop();
            if (du > row[u]) continue;
            for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
                const double alt = du + w;
                if (alt < row[v]) {
                    row[v] = alt;
                    heap.emplace(alt, v);
                }
            }
        }
    }
    return dist;
}

Matrix geodesic_distances(const Eigen::Ref<const Matrix>& X, Index k) {
    const Index n = X.rows();
    const auto idx = nb::knn_index(X, k);
    Matrix W = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (const Index j : idx.row(i)) {
            const double d = (X.row(i) - X.row(j)).norm();
            W(i, j) = d;
            W(j, i) = d;
        }
    }
    Matrix G = all_pairs_shortest_paths(W);
    // Per-source path sums can differ in the last bit; keep the matrix symmetric.
    G = G.cwiseMin(G.transpose()).eval();

    // Component sizes via the reachability of each unvisited source.
    std::vector<Index> component_sizes;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index s = 0; s < n; ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        Index size = 0;
        for (Index j = 0; j < n; ++j) {
            if (std::isfinite(G(s, j))) {
                seen[static_cast<std::size_t>(j)] = true;
                ++size;
            }
        }
        component_sizes.push_back(size);
    }
    if (component_sizes.size() > 1) {
        std::ostringstream msg;
        msg << "isomap: neighborhood graph (k=" << k << ") is disconnected; component sizes:";
        for (auto s : component_sizes) msg << ' ' << s;
        throw NumericalError(msg.str());
    }
    return G;
}

Reduction classical_mds(const Eigen::Ref<const Matrix>& D, Index d) {
    if (D.rows() != D.cols()) throw InputError("classical_mds: distance matrix must be square");
    require_dim(d, D.rows(), "classical_mds", "at most n");
    if (!D.allFinite()) throw InputError("classical_mds: distances must be finite");
    const Matrix B = -0.5 * double_center(D.array().square().matrix());
    return top_scaled_eigenvectors(B, d, "classical_mds");
}

Reduction isomap(const Eigen::Ref<const Matrix>& X, Index d, Index k) {
    require_finite(X, "isomap");
    require_dim(d, X.cols(), "isomap", "at most the ambient dimension");
    require_neighbors(k, 1, X.rows(), "isomap");
    return classical_mds(geodesic_distances(X, k), d);
}

// ---------------------------------------------------------------------------
// Information-based LLE

Matrix kde_distributions(const Eigen::Ref<const Matrix>& X) {
    const Index n = X.rows();
    const Index m = X.cols();
    Matrix P(n, m);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (Index i = 0; i < n; ++i) {
        const auto c = X.row(i);
        const double mean = c.mean();
        const double var = m > 1 ? (c.array() - mean).square().sum() / static_cast<double>(m - 1) : 0.0;
        const double h = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(m), -0.2);
        if (!(h > 0.0)) {
            P.row(i).setConstant(1.0 / static_cast<double>(m));
            continue;
        }
        for (Index t = 0; t < m; ++t) {
            double f = 0.0;
            for (Index s = 0; s < m; ++s) {
                const double z = (c[t] - c[s]) / h;
                f += norm * std::exp(-0.5 * z * z);
            }
            P(i, t) = std::max(f / (static_cast<double>(m) * h), 1e-12);
        }
        const double total = P.row(i).sum();
        if (!(total > 0.0) || !std::isfinite(total))
            throw InputError("info-lle: row " + std::to_string(i) + " has no probability mass");
        P.row(i) /= total;
    }
    return P;
}

double symmetric_kl(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
    if (p.size() != q.size()) throw InputError("symmetric_kl: distributions differ in length");
    double h = 0.0;
    for (Index t = 0; t < p.size(); ++t) {
        if (!(p[t] > 0.0) || !(q[t] > 0.0))
            throw InputError("symmetric_kl: probabilities must be positive");
        h += p[t] * std::log(p[t] / q[t]) + q[t] * std::log(q[t] / p[t]);
    }
    return h;
}

Reduction info_lle(const Eigen::Ref<const Matrix>& X, Index d, Index k) {
    require_finite(X, "info-lle");
    const Index n = X.rows();
    require_neighbors(k, d + 1, n, "info-lle");
    require_dim(d, n - 1, "info-lle", "below n");

    const Matrix P = kde_distributions(X);
    Matrix Hdiv = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const double h = symmetric_kl(P.row(i).transpose(), P.row(j).transpose());
            Hdiv(i, j) = h;
            Hdiv(j, i) = h;
        }

    Matrix H = Matrix::Zero(n, n);
    std::vector<Index> order;
    for (Index i = 0; i < n; ++i) {
        order.clear();
        for (Index j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
            return Hdiv(i, a) < Hdiv(i, b) || (Hdiv(i, a) == Hdiv(i, b) && a < b);
        });
        double total = 0.0;
        for (Index a = 0; a < k; ++a) total += Hdiv(i, order[static_cast<std::size_t>(a)]);
        for (Index a = 0; a < k; ++a) {
            const Index j = order[static_cast<std::size_t>(a)];
            H(i, j) = total > 0.0 ? Hdiv(i, j) / total : 1.0 / static_cast<double>(k);
        }
    }
    const Matrix IH = Matrix::Identity(n, n) - H;
    Reduction out;
    out.embedding = null_space_embedding(IH.transpose() * IH, d);
    return out;
}

Reduction reduce(const Eigen::Ref<const Matrix>& X, const ReducerSpec& spec) {
    spec.validate(X.rows(), X.cols());
    switch (spec.method) {
        case Method::identity: return Reduction{Matrix(X), {}};
        case Method::pca: return pca(X, spec.target_dim);
        case Method::kpca2: return kpca(X, spec.target_dim);
        case Method::lle: return lle(X, spec.target_dim, spec.k, spec.regularization);
        case Method::hlle: return hlle(X, spec.target_dim, spec.k);
        case Method::isomap: return isomap(X, spec.target_dim, spec.k);
        case Method::info_lle: return info_lle(X, spec.target_dim, spec.k);
    }
    throw ParameterError("reduce: unsupported method");
}

}  // namespace erpm::reducers
