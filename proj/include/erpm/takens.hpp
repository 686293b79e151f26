#pragma once

#include "erpm/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace erpm::takens {

struct TimeSeries {
    std::vector<double> values;
    std::string label;

    /// Throws InputError unless length >= 2 and every sample is finite.
    void validate() const;
};

struct EmbeddingParameters {
    Index tau = 1;
    Index m = 1;
};

struct AmiCurve {
    std::vector<double> mi;        ///< mi[lag - 1], nats
    bool constant_series = false;  ///< warning: zero-range series, all values 0
};

struct FirstMinimum {
    Index lag = 1;                 ///< 1-based position in the input list
    bool local_minimum = true;     ///< false: global minimum returned instead
};

struct CaoResult {
    Index dimension = 1;
    bool saturated = true;         ///< false: E1 never saturated, dimension = m_max
    std::vector<double> e1;        ///< e1[m - 1] = E(m+1) / E(m), m = 1..m_max-1
};

inline constexpr double kDefaultCaoThreshold = 0.05;

/// Default histogram bin count: ceil(sqrt(n / 5)), at least 2.
Index default_bins(std::size_t length);

/// Mutual information between x_t and x_{t+lag} for lag = 1..max_lag, from an
/// equal-width 2-D histogram. Bins span the full range of the series so every
/// lag shares the same partition.
AmiCurve auto_mutual_information(const TimeSeries& s, Index max_lag, Index bins);

/// Mutual information of the paired samples (a_t, b_t) on the given bin range.
double histogram_mutual_information(std::span<const double> a, std::span<const double> b,
                                    double lo, double hi, Index bins);

FirstMinimum first_minimum(std::span<const double> values);

/// Cao's E1 statistic with max-norm nearest neighbors. Returns the smallest m
/// for which |E1(m) - 1| < threshold holds at m and m+1.
CaoResult cao_dimension(const TimeSeries& s, Index tau, Index m_max,
                        double threshold = kDefaultCaoThreshold);

/// Row r holds (x_t, x_{t-tau}, ..., x_{t-(m-1)tau}) with t = r + (m-1)tau.
Matrix delay_embed(const TimeSeries& s, const EmbeddingParameters& p);

struct SelectionOptions {
    Index max_lag = 0;      ///< 0: min(200, length / 4)
    Index bins = 0;         ///< 0: default_bins(length)
    Index m_max = 10;
    double cao_threshold = kDefaultCaoThreshold;
};

struct Selection {
    EmbeddingParameters params;
    AmiCurve ami;
    FirstMinimum delay;
    CaoResult cao;
};

/// Delay from the first AMI minimum, then dimension from Cao's method.
Selection select_parameters(const TimeSeries& s, const SelectionOptions& options = {});

}  // namespace erpm::takens
