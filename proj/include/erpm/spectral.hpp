#pragma once

#include "erpm/common.hpp"

namespace erpm::spectral {

/// Singular values at or below kRankTolerance * sigma_1 count as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Descending, nonnegative singular values of a matrix.
struct SingularSpectrum {
    Vector values;
    Index algebraic_rank = 0;

    /// Builds a spectrum from arbitrary nonnegative values (sorted here).
    static SingularSpectrum from_values(Vector values);

    bool degenerate() const { return algebraic_rank == 0; }
};

/// Entropy of the normalized squared spectrum, split as
/// entropy = log(stable_rank) - epsilon_term. All logs are natural.
struct EntropyDecomposition {
    double stable_rank = 1.0;
    double epsilon_term = 0.0;
    double entropy = 0.0;
};

SingularSpectrum singular_values(const Eigen::Ref<const Matrix>& M);

/// Sum of squared singular values over the largest one squared.
/// Throws DegenerateSpectrumError when no value exceeds the tolerance.
double stable_rank(const SingularSpectrum& s);

EntropyDecomposition spectral_entropy(const SingularSpectrum& s);

/// Shortcut: spectral_entropy(singular_values(M)).
EntropyDecomposition matrix_entropy(const Eigen::Ref<const Matrix>& M);

}  // namespace erpm::spectral
