#include "erpm/metrics.hpp"

#include "erpm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace erpm::metrics {

namespace nb = erpm::neighborhoods;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<double> entropy_or_none(const Eigen::Ref<const Matrix>& M) {
    const auto s = spectral::singular_values(M);
    if (s.degenerate()) return std::nullopt;
    return spectral::spectral_entropy(s).entropy;
}

// Zero-pads M to `rows` rows.
Matrix padded(const Eigen::Ref<const Matrix>& M, Index rows) {
    Matrix P = Matrix::Zero(rows, M.cols());
    P.topRows(M.rows()) = M;
    return P;
}

}  // namespace

std::optional<double> erpm_local(const Eigen::Ref<const Matrix>& Xc,
                                 const Eigen::Ref<const Matrix>& Yc) {
    if (Xc.cols() != Yc.cols())
        throw ParameterError("erpm_local: neighborhood matrices have different k");
    const auto hx = entropy_or_none(Xc);
    if (!hx) return std::nullopt;
    const auto hy = entropy_or_none(Yc);
    if (!hy) return std::nullopt;
    return *hy - *hx;
}

MeanWithExclusions erpm_global(std::span<const std::optional<double>> locals) {
    MeanWithExclusions out;
    double sum = 0.0;
    Index used = 0;
    for (const auto& v : locals) {
        if (v) {
            sum += *v;
            ++used;
        } else {
            ++out.excluded;
        }
    }
    if (used == 0) throw DegenerateSpectrumError("erpm_global: every neighborhood is degenerate");
    out.mean = sum / static_cast<double>(used);
    return out;
}

std::optional<double> procrustes_local(const Eigen::Ref<const Matrix>& Xc,
                                       const Eigen::Ref<const Matrix>& Yc) {
    if (Xc.cols() != Yc.cols())
        throw ParameterError("procrustes_local: neighborhood matrices have different k");
    if (Xc.cols() < 2) throw ParameterError("procrustes_local: need k >= 2");

    const double x_norm2 = Xc.squaredNorm();
    if (!(x_norm2 > 0.0)) return std::nullopt;
    const double y_norm2 = Yc.squaredNorm();
    if (!(y_norm2 > 0.0)) return 1.0;

    // Points as rows (k x D), both padded to the same ambient width D.
    const Index D = std::max(Xc.rows(), Yc.rows());
    const Matrix Xr = padded(Xc, D).transpose();
    const Matrix Yr = padded(Yc, D).transpose();

    // SVD of Xr^T Yr = U S V^T ; A = U V^T ; c = tr(S) / tr(Yr^T Yr)
    Eigen::JacobiSVD<Matrix> svd(Xr.transpose() * Yr, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix A = svd.matrixU() * svd.matrixV().transpose();
    const double c = svd.singularValues().sum() / y_norm2;

    const double g = (Xr - Yr * (c * A.transpose())).squaredNorm();
    return g / x_norm2;
}

CorankingMatrix coranking(const nb::RankTable& rank_high, const nb::RankTable& rank_low) {
    const Index n = rank_high.n();
    if (rank_low.n() != n)
        throw InputError("coranking: rank tables have different sizes (" + std::to_string(n) +
                         " vs " + std::to_string(rank_low.n()) + ")");
    if (n < 2) throw InputError("coranking: need at least 2 points");
    CorankingMatrix out;
    out.n = n;
    out.q = CorankingMatrix::Counts::Zero(n - 1, n - 1);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto k = rank_high(i, j);
            const auto l = rank_low(i, j);
            if (k < 1 || k > n - 1 || l < 1 || l > n - 1)
                throw InputError("coranking: rank table entry out of range");
            ++out.q(k - 1, l - 1);
        }
    }
    return out;
}

double mrre_normalization(Index n, Index K) {
    double h = 0.0;
    for (Index k = 1; k <= K; ++k)
        h += std::abs(static_cast<double>(n - 2 * k + 1)) / static_cast<double>(k);
    return static_cast<double>(n) * h;
}

MrreResult mrre(const CorankingMatrix& q, Index K) {
    const Index n = q.n;
    if (K < 1 || K > n - 1)
        throw ParameterError("mrre: K must satisfy 1 <= K <= n-1 (K=" + std::to_string(K) + ")");

    double intrusions = 0.0;  // low-dimensional rank l <= K
    double extrusions = 0.0;  // high-dimensional rank k <= K
    for (Index k = 1; k <= n - 1; ++k) {
        for (Index l = 1; l <= n - 1; ++l) {
            const auto count = q.q(k - 1, l - 1);
            if (count == 0 || k == l) continue;
            const double diff = std::abs(static_cast<double>(k - l));
            if (l <= K) intrusions += diff / static_cast<double>(l) * static_cast<double>(count);
            if (k <= K) extrusions += diff / static_cast<double>(k) * static_cast<double>(count);
        }
    }
    const double hk = mrre_normalization(n, K);
    return {intrusions / hk, extrusions / hk};
}

EvaluationContext::EvaluationContext(Matrix X, Matrix Y) : X_(std::move(X)), Y_(std::move(Y)) {
    if (X_.rows() != Y_.rows())
        throw InputError("evaluate: X has " + std::to_string(X_.rows()) + " points but Y has " +
                         std::to_string(Y_.rows()));
    if (X_.rows() < 2) throw InputError("evaluate: need at least 2 points");
    rank_high_ = nb::rank_table(X_);
    rank_low_ = nb::rank_table(Y_);
    q_ = coranking(rank_high_, rank_low_);
}

std::vector<LocalMetricRecord> EvaluationContext::local_records(Index k) const {
    const Index n = this->n();
    if (k < 1 || k > n - 1)
        throw ParameterError("evaluate: k must satisfy 1 <= k <= n-1 (k=" + std::to_string(k) + ")");
    const auto idx = rank_high_.neighbors(k);

    std::vector<LocalMetricRecord> locals(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Matrix Xc = nb::center_columns(nb::neighborhood_matrix(X_, idx, i));
        const Matrix Yc = nb::center_columns(nb::neighborhood_matrix(Y_, idx, i));
        auto& rec = locals[static_cast<std::size_t>(i)];
        rec.point_index = i;
        rec.delta_h = erpm_local(Xc, Yc);
        rec.degenerate = !rec.delta_h.has_value();
        if (k >= 2) rec.procrustes_local = procrustes_local(Xc, Yc);
    }
    return locals;
}

MetricReport EvaluationContext::evaluate(Index k) const {
    MetricReport report;
    report.n = n();
    report.k = k;
    report.locals = local_records(k);

    std::vector<std::optional<double>> dh;
    dh.reserve(report.locals.size());
    double p_sum = 0.0;
    Index p_used = 0;
    for (const auto& rec : report.locals) {
        dh.push_back(rec.delta_h);
        if (rec.procrustes_local) {
            p_sum += *rec.procrustes_local;
            ++p_used;
        }
    }
    report.degenerate_count = static_cast<Index>(
        std::count_if(report.locals.begin(), report.locals.end(),
                      [](const LocalMetricRecord& r) { return r.degenerate; }));
    try {
        report.r_delta_h = erpm_global(dh).mean;
    } catch (const DegenerateSpectrumError&) {
        report.r_delta_h = kNaN;
    }
    report.r_procrustes = p_used > 0 ? p_sum / static_cast<double>(p_used) : kNaN;

    const auto w = mrre(q_, k);
    report.w_n = w.w_n;
    report.w_v = w.w_v;
    return report;
}

MetricReport evaluate(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& Y,
                      Index k) {
    if (X.rows() != Y.rows())
        throw InputError("evaluate: X and Y have different point counts");
    if (k < 1 || k > X.rows() - 1)
        throw ParameterError("evaluate: k must satisfy 1 <= k <= n-1 (k=" + std::to_string(k) + ")");
    return EvaluationContext(X, Y).evaluate(k);
}

}  // namespace erpm::metrics
