#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace erpm {

inline constexpr const char* kVersion = "0.1.0";

/// Dense real matrix. Data matrices store one point per row.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index  = Eigen::Index;

// Error taxonomy. The CLI maps InputError/ParameterError to exit code 1 and
// NumericalError (including degenerate spectra) to exit code 2.

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a singular spectrum has no value above the truncation tolerance.
class DegenerateSpectrumError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

inline bool all_finite(const Eigen::Ref<const Matrix>& M) {
    return M.allFinite();
}

}  // namespace erpm
