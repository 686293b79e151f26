#include "erpm/takens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erpm::takens {

namespace {

Index bin_of(double x, double lo, double width, Index bins) {
    const auto b = static_cast<Index>(std::floor((x - lo) / width));
    return std::clamp<Index>(b, 0, bins - 1);
}

}  // namespace

void TimeSeries::validate() const {
    if (values.size() < 2) throw InputError("time series needs at least 2 samples");
    for (std::size_t t = 0; t < values.size(); ++t)
        if (!std::isfinite(values[t]))
            throw InputError("time series sample " + std::to_string(t) + " is not finite");
}

Index default_bins(std::size_t length) {
    const auto b = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(length) / 5.0)));
    return std::max<Index>(2, b);
}

double histogram_mutual_information(std::span<const double> a, std::span<const double> b,
                                    double lo, double hi, Index bins) {
    if (a.size() != b.size() || a.empty())
        throw InputError("histogram_mutual_information: sample lists must be non-empty and paired");
    if (bins < 2) throw ParameterError("histogram_mutual_information: bins must be >= 2");
    if (!(hi > lo)) return 0.0;

    const double width = (hi - lo) / static_cast<double>(bins);
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(bins, bins);
    for (std::size_t t = 0; t < a.size(); ++t)
        joint(bin_of(a[t], lo, width, bins), bin_of(b[t], lo, width, bins)) += 1.0;

    const Vector row = joint.rowwise().sum();
    const Vector col = joint.colwise().sum().transpose();
    const double total = static_cast<double>(a.size());
    double mi = 0.0;
    for (Index i = 0; i < bins; ++i) {
        for (Index j = 0; j < bins; ++j) {
            const double c = joint(i, j);
            if (c > 0.0) mi += c / total * std::log(c * total / (row[i] * col[j]));
        }
    }
    return std::max(0.0, mi);
}

AmiCurve auto_mutual_information(const TimeSeries& s, Index max_lag, Index bins) {
    s.validate();
    const auto length = static_cast<Index>(s.values.size());
    if (max_lag < 1 || max_lag >= length - 1)
        throw ParameterError("auto_mutual_information: need 1 <= max_lag < length - 1");
    if (bins < 2) throw ParameterError("auto_mutual_information: bins must be >= 2");

    const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    AmiCurve out;
    out.mi.assign(static_cast<std::size_t>(max_lag), 0.0);
    if (!(hi > lo)) {
        out.constant_series = true;
        return out;
    }
    const std::span<const double> x(s.values);
    for (Index lag = 1; lag <= max_lag; ++lag) {
        const auto overlap = static_cast<std::size_t>(length - lag);
        out.mi[static_cast<std::size_t>(lag - 1)] = histogram_mutual_information(
            x.subspan(0, overlap), x.subspan(static_cast<std::size_t>(lag), overlap), lo, hi, bins);
    }
    return out;
}

FirstMinimum first_minimum(std::span<const double> values) {
    if (values.size() < 3) throw ParameterError("first_minimum: need at least 3 values");
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (values[i] < values[i - 1] && values[i] <= values[i + 1])
            return {static_cast<Index>(i + 1), true};
    }
    const auto it = std::min_element(values.begin(), values.end());
    return {static_cast<Index>(it - values.begin()) + 1, false};
}

CaoResult cao_dimension(const TimeSeries& s, Index tau, Index m_max, double threshold) {
    s.validate();
    const auto length = static_cast<Index>(s.values.size());
    if (tau < 1) throw ParameterError("cao_dimension: tau must be >= 1");
    if (m_max < 2) throw ParameterError("cao_dimension: m_max must be >= 2");
    if (m_max * tau + 2 > length)
        throw ParameterError("cao_dimension: series too short for m_max * tau (need length >= " +
                             std::to_string(m_max * tau + 2) + ")");
    const auto& x = s.values;

    // E(m): mean over t of ||v_t^{m+1} - v_n^{m+1}||_inf / ||v_t^m - v_n^m||_inf,
    // where n is the max-norm nearest neighbor of v_t^m with nonzero distance.
    auto mean_expansion = [&](Index m) {
        const Index first = m * tau;  // every v_t^{m+1} is in range from here
        const Index count = length - first;
        Eigen::MatrixXd V(count, m);
        for (Index r = 0; r < count; ++r)
            for (Index c = 0; c < m; ++c)
                V(r, c) = x[static_cast<std::size_t>(first + r - c * tau)];

        double sum = 0.0;
        Index used = 0;
        for (Index i = 0; i < count; ++i) {
            double best = std::numeric_limits<double>::infinity();
            Index nn = -1;
            for (Index j = 0; j < count; ++j) {
                if (j == i) continue;
                const double d = (V.row(i) - V.row(j)).cwiseAbs().maxCoeff();
                if (d > 0.0 && d < best) {
                    best = d;
                    nn = j;
                }
            }
            if (nn < 0) continue;
            const double extra = std::abs(x[static_cast<std::size_t>(first + i - m * tau)] -
                                          x[static_cast<std::size_t>(first + nn - m * tau)]);
            sum += std::max(best, extra) / best;
            ++used;
        }
        if (used == 0) throw NumericalError("cao_dimension: every delay vector coincides");
        return sum / static_cast<double>(used);
    };

    std::vector<double> E;
    E.reserve(static_cast<std::size_t>(m_max));
    for (Index m = 1; m <= m_max; ++m) E.push_back(mean_expansion(m));

    CaoResult out;
    for (std::size_t m = 0; m + 1 < E.size(); ++m) out.e1.push_back(E[m + 1] / E[m]);

    auto flat = [&](std::size_t i) { return std::abs(out.e1[i] - 1.0) < threshold; };
    for (std::size_t i = 0; i + 1 < out.e1.size(); ++i) {
        if (flat(i) && flat(i + 1)) {
            out.dimension = static_cast<Index>(i + 1);
            out.saturated = true;
            return out;
        }
    }
    out.dimension = m_max;
    out.saturated = false;
    return out;
}

Matrix delay_embed(const TimeSeries& s, const EmbeddingParameters& p) {
    s.validate();
    const auto length = static_cast<Index>(s.values.size());
    if (p.tau < 1 || p.m < 1) throw ParameterError("delay_embed: tau and m must be positive");
    if ((p.m - 1) * p.tau >= length)
        throw ParameterError("delay_embed: (m-1)*tau must be smaller than the series length");
    const Index first = (p.m - 1) * p.tau;
    const Index rows = length - first;
    Matrix out(rows, p.m);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < p.m; ++c)
            out(r, c) = s.values[static_cast<std::size_t>(first + r - c * p.tau)];
    return out;
}

Selection select_parameters(const TimeSeries& s, const SelectionOptions& options) {
    s.validate();
    const auto length = static_cast<Index>(s.values.size());
    Selection out;
    const Index max_lag = options.max_lag > 0 ? options.max_lag
                                              : std::min<Index>(200, std::max<Index>(3, length / 4));
    const Index bins = options.bins > 0 ? options.bins : default_bins(s.values.size());
    out.ami = auto_mutual_information(s, max_lag, bins);
    out.delay = first_minimum(out.ami.mi);
    out.params.tau = out.delay.lag;

    Index m_max = options.m_max;
    while (m_max > 2 && m_max * out.params.tau + 2 > length) --m_max;
    out.cao = cao_dimension(s, out.params.tau, m_max, options.cao_threshold);
    out.params.m = out.cao.dimension;
    return out;
}

}  // namespace erpm::takens
