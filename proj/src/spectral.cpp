#include "erpm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace erpm::spectral {

namespace {

Index count_above_tolerance(const Vector& values) {
    if (values.size() == 0 || !(values[0] > 0.0)) return 0;
    const double cutoff = kRankTolerance * values[0];
    Index r = 0;
    while (r < values.size() && values[r] > cutoff) ++r;
    return r;
}

void require_nondegenerate(const SingularSpectrum& s) {
    if (s.degenerate())
        throw DegenerateSpectrumError("singular spectrum is identically zero");
}

}  // namespace

SingularSpectrum SingularSpectrum::from_values(Vector values) {
    for (Index j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j]) || values[j] < 0.0)
            throw InputError("singular values must be finite and nonnegative");
    }
    std::sort(values.data(), values.data() + values.size(), std::greater<>());
    SingularSpectrum s;
    s.algebraic_rank = count_above_tolerance(values);
    s.values = std::move(values);
    return s;
}

SingularSpectrum singular_values(const Eigen::Ref<const Matrix>& M) {
    if (M.rows() < 1 || M.cols() < 1)
        throw InputError("singular_values: empty matrix");
    if (!M.allFinite())
        throw InputError("singular_values: matrix has non-finite entries");
    // JacobiSVD is accurate to high relative precision on the small
    // neighborhood matrices used here; values come back sorted descending.
    Eigen::JacobiSVD<Matrix> svd(M);
    SingularSpectrum s;
    s.values = svd.singularValues();
    s.algebraic_rank = count_above_tolerance(s.values);
    return s;
}

double stable_rank(const SingularSpectrum& s) {
    require_nondegenerate(s);
    const double top = s.values[0] * s.values[0];
    double sum = 0.0;
    for (Index j = 0; j < s.algebraic_rank; ++j) sum += s.values[j] * s.values[j] / top;
    return sum;
}

EntropyDecomposition spectral_entropy(const SingularSpectrum& s) {
    require_nondegenerate(s);
    const Index r = s.algebraic_rank;
    const double top = s.values[0] * s.values[0];

    // alpha_j = sigma_j^2 / sigma_1^2 ; p_j = alpha_j / stable_rank
    Vector alpha(r);
    for (Index j = 0; j < r; ++j) alpha[j] = s.values[j] * s.values[j] / top;
    const double srank = alpha.sum();

    double alpha_log_alpha = 0.0;
    double shannon = 0.0;
    for (Index j = 0; j < r; ++j) {
        const double a = alpha[j];
        const double p = a / srank;
        if (a > 0.0) alpha_log_alpha += a * std::log(a);
        if (p > 0.0) shannon -= p * std::log(p);
    }

    EntropyDecomposition out;
    out.stable_rank = srank;
    out.epsilon_term = alpha_log_alpha / srank;
    out.entropy = std::max(0.0, shannon);
    return out;
}

EntropyDecomposition matrix_entropy(const Eigen::Ref<const Matrix>& M) {
    return spectral_entropy(singular_values(M));
}

}  // namespace erpm::spectral
