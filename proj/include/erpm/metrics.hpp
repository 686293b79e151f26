#pragma once

#include "erpm/common.hpp"
#include "erpm/neighborhoods.hpp"

#include <optional>
#include <span>
#include <vector>

namespace erpm::metrics {

/// Per-neighborhood values. An empty optional marks a degenerate neighborhood
/// (all-zero centered spectrum); `degenerate` is set whenever delta_h is empty.
struct LocalMetricRecord {
    Index point_index = 0;
    std::optional<double> delta_h;
    std::optional<double> procrustes_local;
    bool degenerate = false;
};

struct MetricReport {
    std::vector<LocalMetricRecord> locals;
    double r_delta_h = 0.0;      ///< NaN when every neighborhood is degenerate
    double r_procrustes = 0.0;   ///< NaN when no neighborhood has a defined value
    double w_n = 0.0;
    double w_v = 0.0;
    Index k = 0;
    Index n = 0;
    Index degenerate_count = 0;
};

/// q(k-1, l-1) counts pairs (i, j) with high-dimensional rank k and
/// low-dimensional rank l.
struct CorankingMatrix {
    using Counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
    Index n = 0;
    Counts q;
};

struct MeanWithExclusions {
    double mean = 0.0;
    Index excluded = 0;
};

struct MrreResult {
    double w_n = 0.0;
    double w_v = 0.0;
};

/// H(Yc) - H(Xc) for centered neighborhood matrices (columns are points).
/// Returns nullopt when either spectrum is identically zero.
std::optional<double> erpm_local(const Eigen::Ref<const Matrix>& Xc,
                                 const Eigen::Ref<const Matrix>& Yc);

/// Mean over the non-degenerate values, in index order. Throws
/// DegenerateSpectrumError when every value is degenerate.
MeanWithExclusions erpm_global(std::span<const std::optional<double>> locals);

/// Normalized conformal Procrustes residual G / ||Xc||_F^2 after the optimal
/// rotation and positive scale of Yc onto Xc. The matrix with fewer rows is
/// zero-padded. Returns nullopt when ||Xc||_F = 0 and 1 when ||Yc||_F = 0.
std::optional<double> procrustes_local(const Eigen::Ref<const Matrix>& Xc,
                                       const Eigen::Ref<const Matrix>& Yc);

CorankingMatrix coranking(const neighborhoods::RankTable& rank_high,
                          const neighborhoods::RankTable& rank_low);

/// Mean relative rank errors: w_n over intrusions (low-dimensional rank <= K),
/// w_v over extrusions (high-dimensional rank <= K), normalized by H_K.
MrreResult mrre(const CorankingMatrix& q, Index K);

/// H_K = n * sum_{k=1..K} |n - 2k + 1| / k
double mrre_normalization(Index n, Index K);

/// Caches the rank tables of a fixed (X, Y) pair so several neighborhood
/// sizes can be evaluated without recomputing them.
class EvaluationContext {
public:
    EvaluationContext(Matrix X, Matrix Y);

    Index n() const { return X_.rows(); }
    const Matrix& high() const { return X_; }
    const Matrix& low() const { return Y_; }
    const neighborhoods::RankTable& rank_high() const { return rank_high_; }
    const neighborhoods::RankTable& rank_low() const { return rank_low_; }

    /// Local records only (no co-ranking), for joint exports.
    std::vector<LocalMetricRecord> local_records(Index k) const;

    MetricReport evaluate(Index k) const;

private:
    Matrix X_;
    Matrix Y_;
    neighborhoods::RankTable rank_high_;
    neighborhoods::RankTable rank_low_;
    CorankingMatrix q_;
};

/// Neighborhoods are taken from X and carried to Y by index; MRRE uses K = k.
MetricReport evaluate(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& Y,
                      Index k);

}  // namespace erpm::metrics
