#include "erpm/data_io.hpp"

#include "erpm/random.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

namespace erpm::data_io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

bool blank(std::string_view line) { return trim(line).empty(); }

void add_noise(Matrix& X, double noise, Rng& rng) {
    if (noise == 0.0) return;
    for (Index i = 0; i < X.rows(); ++i)
        for (Index j = 0; j < X.cols(); ++j) X(i, j) += noise * rng.normal();
}

void check_generator_args(Index n, double noise) {
    if (n < 1) throw ParameterError("dataset size n must be >= 1");
    if (!std::isfinite(noise) || noise < 0.0) throw ParameterError("noise must be finite and >= 0");
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::s_curve: return "s-curve";
        case DatasetKind::swiss_roll: return "swiss-roll";
        case DatasetKind::csv_series: return "csv-series";
        case DatasetKind::csv_matrix: return "csv-matrix";
    }
    return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
    for (auto k : {DatasetKind::s_curve, DatasetKind::swiss_roll, DatasetKind::csv_series,
                   DatasetKind::csv_matrix})
        if (name == to_string(k)) return k;
    throw InputError("unknown dataset kind '" + std::string(name) + "'");
}

SyntheticDataset s_curve(Index n, double noise, std::uint64_t seed) {
    check_generator_args(n, noise);
    Rng rng(seed);
    SyntheticDataset out{Matrix(n, 3), Matrix(n, 2)};
    for (Index i = 0; i < n; ++i) {
        const double t = 3.0 * std::numbers::pi * (rng.uniform() - 0.5);
        const double u = 2.0 * rng.uniform();
        const double sign = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
        out.points.row(i) << std::sin(t), u, sign * (std::cos(t) - 1.0);
        out.ground_truth.row(i) << t, u;
    }
    add_noise(out.points, noise, rng);
    return out;
}

SyntheticDataset swiss_roll(Index n, double noise, std::uint64_t seed) {
    check_generator_args(n, noise);
    Rng rng(seed);
    SyntheticDataset out{Matrix(n, 3), Matrix(n, 2)};
    for (Index i = 0; i < n; ++i) {
        const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
        const double u = 21.0 * rng.uniform();
        out.points.row(i) << t * std::cos(t), u, t * std::sin(t);
        out.ground_truth.row(i) << t, u;
    }
    add_noise(out.points, noise, rng);
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                                   : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

takens::TimeSeries load_series_csv(const std::filesystem::path& path, std::string_view column,
                                   HeaderPolicy header) {
    const auto lines = read_lines(path);
    std::size_t first = 0;
    while (first < lines.size() && blank(lines[first])) ++first;
    if (first == lines.size()) throw InputError("'" + path.string() + "' is empty");

    const auto head = split_csv_line(lines[first]);
    std::optional<std::size_t> col;
    for (std::size_t c = 0; c < head.size(); ++c)
        if (head[c] == column) col = c;

    bool has_header = false;
    switch (header) {
        case HeaderPolicy::present: has_header = true; break;
        case HeaderPolicy::absent: has_header = false; break;
        case HeaderPolicy::detect: {
            has_header = col.has_value();
            if (!has_header) {
                for (const auto& cell : head)
                    if (!parse_number(cell)) has_header = true;
            }
            break;
        }
    }
    if (!has_header || !col) {
        std::size_t parsed = 0;
        const auto [ptr, ec] = std::from_chars(column.data(), column.data() + column.size(), parsed);
        if (column.empty() || ec != std::errc() || ptr != column.data() + column.size())
            throw InputError("column '" + std::string(column) + "' not found in '" + path.string() + "'");
        col = parsed;
    }

    takens::TimeSeries series;
    series.label = std::string(column);
    for (std::size_t r = first + (has_header ? 1 : 0); r < lines.size(); ++r) {
        if (blank(lines[r])) continue;
        const auto cells = split_csv_line(lines[r]);
        const auto row_no = std::to_string(r + 1);
        if (*col >= cells.size())
            throw InputError("row " + row_no + " of '" + path.string() + "' has no column " +
                             std::string(column));
        const auto v = parse_number(cells[*col]);
        if (!v) {
            const std::string what = trim(cells[*col]).empty() ? "blank" : "non-numeric";
            throw InputError("row " + row_no + " of '" + path.string() + "': " + what + " value in column " +
                             std::string(column));
        }
        series.values.push_back(*v);
    }
    if (series.values.empty()) throw InputError("'" + path.string() + "' contains no samples");
    return series;
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    bool first_content = true;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (blank(lines[r])) continue;
        const auto cells = split_csv_line(lines[r]);
        std::vector<double> values;
        values.reserve(cells.size());
        bool numeric = true;
        for (const auto& cell : cells) {
            const auto v = parse_number(cell);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            if (first_content) {
                first_content = false;
                width = cells.size();
                continue;  // header row
            }
            throw InputError("row " + std::to_string(r + 1) + " of '" + path.string() +
                             "' has a non-numeric cell");
        }
        if (width == 0) width = values.size();
        if (values.size() != width)
            throw InputError("row " + std::to_string(r + 1) + " of '" + path.string() + "' has " +
                             std::to_string(values.size()) + " columns, expected " + std::to_string(width));
        first_content = false;
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw InputError("'" + path.string() + "' contains no data rows");
    Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) M(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return M;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& M,
                      const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    if (!header.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
        out << '\n';
    }
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
        out << '\n';
    }
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace erpm::data_io
