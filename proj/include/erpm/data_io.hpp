#pragma once

#include "erpm/common.hpp"
#include "erpm/takens.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace erpm::data_io {

enum class DatasetKind { s_curve, swiss_roll, csv_series, csv_matrix };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetSpec {
    DatasetKind kind = DatasetKind::s_curve;
    Index n = 2000;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string path;       ///< CSV kinds
    std::string column;     ///< csv-series: header name or 0-based index
    bool log_transform = false;
    Index tau = 0;          ///< csv-series: 0 selects the delay by AMI
    Index m = 0;            ///< csv-series: 0 selects the dimension by Cao
};

struct SyntheticDataset {
    Matrix points;          ///< n x 3
    Matrix ground_truth;    ///< n x 2 intrinsic parameters (t, height)
};

/// t ~ U[-3pi/2, 3pi/2], u ~ U[0, 2]; point (sin t, u, sign(t)(cos t - 1))
/// plus isotropic Gaussian noise with standard deviation `noise`.
SyntheticDataset s_curve(Index n, double noise, std::uint64_t seed);

/// t ~ U[3pi/2, 9pi/2], u ~ U[0, 21]; point (t cos t, u, t sin t) plus noise.
SyntheticDataset swiss_roll(Index n, double noise, std::uint64_t seed);

enum class HeaderPolicy { detect, present, absent };

takens::TimeSeries load_series_csv(const std::filesystem::path& path, std::string_view column,
                                   HeaderPolicy header = HeaderPolicy::detect);

/// Rectangular numeric CSV, one point per row; a non-numeric first row is
/// taken as a header.
Matrix load_matrix_csv(const std::filesystem::path& path);

/// Shortest round-trip formatting (17 significant digits).
std::string format_double(double v);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& M,
                      const std::vector<std::string>& header = {});

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace erpm::data_io
