#pragma once

#include "erpm/common.hpp"
#include "erpm/data_io.hpp"
#include "erpm/metrics.hpp"
#include "erpm/reducers.hpp"
#include "erpm/takens.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace erpm::harness {

struct NamedDataset {
    std::string name;
    data_io::DatasetSpec spec;
    takens::SelectionOptions takens;  ///< csv-series only
    bool inherit_seed = true;         ///< use the config seed instead of spec.seed
};

/// Reducer entry of a sweep; k = 0 means "use the sweep's k_max".
struct ReducerEntry {
    reducers::Method method = reducers::Method::pca;
    Index k = 0;
    double regularization = reducers::kDefaultLleRegularization;
};

struct SweepConfig {
    std::vector<NamedDataset> datasets;
    std::vector<ReducerEntry> reducers;
    Index k_min = 1;
    Index k_max = 20;
    Index target_dim = 2;
    Index joint_k = 15;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Default protocol configuration: S-curve (n = 2000), reducers
/// pca, kpca2, lle, hlle, isomap; k in [1, 20]; target dimension 2; joint k 15.
SweepConfig default_config();

/// Parses a JSON configuration document; absent keys keep their defaults.
SweepConfig parse_config(std::string_view json_text);
SweepConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const SweepConfig& config);

struct PreparedDataset {
    std::string name;
    Matrix points;
    std::optional<takens::EmbeddingParameters> takens;  ///< set for csv-series
};

PreparedDataset prepare_dataset(const NamedDataset& dataset);

struct SweepCell {
    std::string method;
    Index k = 0;
    double w_n = 0.0;
    double w_v = 0.0;
    double r_procrustes = 0.0;
    double r_delta_h = 0.0;
    Index degenerate_count = 0;
    std::string error;  ///< non-empty when the cell failed; metrics are NaN
};

struct SweepResult {
    std::string dataset;
    Index n = 0;
    Index k_min = 0;
    Index k_max = 0;
    std::uint64_t seed = 0;
    std::vector<SweepCell> cells;  ///< method-major, ascending k
    /// Per-method local records at the joint-export k (empty on failure).
    std::vector<std::pair<std::string, std::vector<metrics::LocalMetricRecord>>> joint;
    std::vector<std::string> warnings;
};

/// Fits each reducer once (k = k_max unless overridden) and evaluates every
/// k in range. Cells are computed on `threads` workers; the result does not
/// depend on the thread count.
SweepResult run_sweep(const Matrix& X, const SweepConfig& config, const std::string& dataset_name);

inline constexpr std::array<const char*, 4> kMetricLabels = {"w_n", "w_v", "r_procrustes",
                                                             "r_delta_h"};

struct CorrelationMatrix {
    std::array<std::string, 4> labels{"w_n", "w_v", "r_procrustes", "r_delta_h"};
    Eigen::Matrix4d entries = Eigen::Matrix4d::Zero();
    std::array<std::array<bool, 4>, 4> defined{};
    Index samples = 0;
};

/// Pearson correlations over the cells whose four metrics are all finite.
/// Pairs involving a zero-variance column are flagged undefined.
/// Throws InputError with fewer than 3 usable cells.
CorrelationMatrix correlation_report(std::span<const SweepCell> cells);

/// Per-point ERPM and Procrustes values with neighborhoods from X.
std::vector<metrics::LocalMetricRecord> joint_export(const Eigen::Ref<const Matrix>& X,
                                                     const Eigen::Ref<const Matrix>& Y, Index k);

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells);
std::vector<SweepCell> read_sweep_csv(const std::filesystem::path& path);
void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& c);
void write_joint_csv(const std::filesystem::path& path,
                     std::span<const metrics::LocalMetricRecord> records);
void write_report_json(const std::filesystem::path& path, const metrics::MetricReport& report);

struct ExperimentSummary {
    std::vector<SweepResult> results;
    std::optional<CorrelationMatrix> pooled;
    std::vector<std::string> written;   ///< output files, in write order
    std::vector<std::string> failures;  ///< "dataset/method/k: message"
};

/// Full protocol: prepare datasets, sweep, correlations, joint exports and
/// run_meta.json under config.output_dir.
ExperimentSummary run_experiment(const SweepConfig& config);

}  // namespace erpm::harness
