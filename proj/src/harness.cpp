#include "erpm/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace erpm::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        });
    }
    for (auto& th : pool) th.join();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
            throw InputError("config: unknown key '" + it.key() + "' in " + where);
    }
}

NamedDataset parse_dataset(const json& j, std::size_t position) {
    if (!j.is_object()) throw InputError("config: dataset entries must be objects");
    reject_unknown(j,
                   {"name", "kind", "n", "noise", "seed", "path", "column", "log_transform", "tau",
                    "m", "max_lag", "bins", "m_max", "cao_threshold"},
                   "dataset");
    NamedDataset d;
    d.spec.kind = data_io::parse_dataset_kind(get_or<std::string>(j, "kind", "s-curve"));
    d.spec.n = get_or<Index>(j, "n", d.spec.n);
    d.spec.noise = get_or<double>(j, "noise", d.spec.noise);
    d.spec.path = get_or<std::string>(j, "path", "");
    d.spec.column = get_or<std::string>(j, "column", "");
    d.spec.log_transform = get_or<bool>(j, "log_transform", false);
    d.spec.tau = get_or<Index>(j, "tau", 0);
    d.spec.m = get_or<Index>(j, "m", 0);
    if (j.contains("seed")) {
        d.spec.seed = get_or<std::uint64_t>(j, "seed", 0);
        d.inherit_seed = false;
    }
    d.takens.max_lag = get_or<Index>(j, "max_lag", 0);
    d.takens.bins = get_or<Index>(j, "bins", 0);
    d.takens.m_max = get_or<Index>(j, "m_max", d.takens.m_max);
    d.takens.cao_threshold = get_or<double>(j, "cao_threshold", d.takens.cao_threshold);
    std::string fallback(data_io::to_string(d.spec.kind));
    if (!d.spec.path.empty()) fallback = fs::path(d.spec.path).stem().string();
    if (position > 0) fallback += "-" + std::to_string(position);
    d.name = get_or<std::string>(j, "name", fallback);
    return d;
}

ReducerEntry parse_reducer(const json& j) {
    ReducerEntry r;
    if (j.is_string()) {
        r.method = reducers::parse_method(j.get<std::string>());
        return r;
    }
    if (!j.is_object()) throw InputError("config: reducer entries must be names or objects");
    reject_unknown(j, {"method", "k", "regularization"}, "reducer");
    if (!j.contains("method")) throw InputError("config: reducer entry without 'method'");
    r.method = reducers::parse_method(get_or<std::string>(j, "method", ""));
    r.k = get_or<Index>(j, "k", 0);
    r.regularization = get_or<double>(j, "regularization", r.regularization);
    return r;
}

std::string cell_field(double v) { return data_io::format_double(v); }

double parse_field(const std::string& s, std::size_t line) {
    if (s == "nan" || s == "-nan") return kNaN;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw InputError("sweep CSV line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

json metric_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

SweepConfig default_config() {
    SweepConfig c;
    NamedDataset d;
    d.name = "s-curve";
    d.spec.kind = data_io::DatasetKind::s_curve;
    d.spec.n = 2000;
    c.datasets.push_back(d);
    for (auto m : {reducers::Method::pca, reducers::Method::kpca2, reducers::Method::lle,
                   reducers::Method::hlle, reducers::Method::isomap})
        c.reducers.push_back(ReducerEntry{m, 0, reducers::kDefaultLleRegularization});
    return c;
}

SweepConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("config must be a JSON object");
    reject_unknown(j,
                   {"dataset", "datasets", "reducers", "sweep", "target_dim", "joint_k", "output_dir",
                    "seed", "threads"},
                   "config");

    SweepConfig c = default_config();
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    if (j.contains("dataset") && j.contains("datasets"))
        throw InputError("config: give either 'dataset' or 'datasets', not both");
    if (j.contains("dataset")) {
        c.datasets = {parse_dataset(j["dataset"], 0)};
    } else if (j.contains("datasets")) {
        c.datasets.clear();
        std::size_t pos = 0;
        for (const auto& d : j["datasets"]) c.datasets.push_back(parse_dataset(d, pos++));
        if (c.datasets.empty()) throw InputError("config: 'datasets' is empty");
        std::set<std::string> names;
        for (const auto& d : c.datasets)
            if (!names.insert(d.name).second) throw InputError("config: duplicate dataset name '" + d.name + "'");
    }
    if (j.contains("reducers")) {
        c.reducers.clear();
        for (const auto& r : j["reducers"]) c.reducers.push_back(parse_reducer(r));
        if (c.reducers.empty()) throw InputError("config: 'reducers' is empty");
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        if (!s.is_object()) throw InputError("config: 'sweep' must be an object");
        reject_unknown(s, {"k_min", "k_max"}, "sweep");
        c.k_min = get_or<Index>(s, "k_min", c.k_min);
        c.k_max = get_or<Index>(s, "k_max", c.k_max);
    }
    c.target_dim = get_or<Index>(j, "target_dim", c.target_dim);
    c.joint_k = get_or<Index>(j, "joint_k", c.joint_k);
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
    c.threads = get_or<unsigned>(j, "threads", c.threads);
    return c;
}

SweepConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const SweepConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["target_dim"] = c.target_dim;
    j["joint_k"] = c.joint_k;
    j["output_dir"] = c.output_dir.string();
    j["threads"] = c.threads;
    j["sweep"] = {{"k_min", c.k_min}, {"k_max", c.k_max}};
    j["datasets"] = json::array();
    for (const auto& d : c.datasets) {
        json dj = {{"name", d.name},
                   {"kind", std::string(data_io::to_string(d.spec.kind))},
                   {"n", d.spec.n},
                   {"noise", d.spec.noise},
                   {"seed", d.inherit_seed ? c.seed : d.spec.seed}};
        if (d.spec.kind == data_io::DatasetKind::csv_series || d.spec.kind == data_io::DatasetKind::csv_matrix)
            dj["path"] = d.spec.path;
        if (d.spec.kind == data_io::DatasetKind::csv_series) {
            dj["column"] = d.spec.column;
            dj["log_transform"] = d.spec.log_transform;
            dj["tau"] = d.spec.tau;
            dj["m"] = d.spec.m;
            dj["max_lag"] = d.takens.max_lag;
            dj["bins"] = d.takens.bins;
            dj["m_max"] = d.takens.m_max;
            dj["cao_threshold"] = d.takens.cao_threshold;
        }
        j["datasets"].push_back(dj);
    }
    j["reducers"] = json::array();
    for (const auto& r : c.reducers)
        j["reducers"].push_back({{"method", std::string(reducers::to_string(r.method))},
                                 {"k", r.k == 0 ? c.k_max : r.k},
                                 {"regularization", r.regularization}});
    return j.dump(2);
}

PreparedDataset prepare_dataset(const NamedDataset& dataset) {
    const auto& spec = dataset.spec;
    PreparedDataset out;
    out.name = dataset.name;
    switch (spec.kind) {
        case data_io::DatasetKind::s_curve:
            out.points = data_io::s_curve(spec.n, spec.noise, spec.seed).points;
            break;
        case data_io::DatasetKind::swiss_roll:
            out.points = data_io::swiss_roll(spec.n, spec.noise, spec.seed).points;
            break;
        case data_io::DatasetKind::csv_matrix:
            out.points = data_io::load_matrix_csv(spec.path);
            break;
        case data_io::DatasetKind::csv_series: {
            auto series = data_io::load_series_csv(spec.path, spec.column);
            if (spec.log_transform) {
                for (std::size_t t = 0; t < series.values.size(); ++t) {
                    if (!(series.values[t] > 0.0))
                        throw InputError("log transform needs positive samples (sample " +
                                         std::to_string(t) + ")");
                    series.values[t] = std::log(series.values[t]);
                }
            }
            takens::EmbeddingParameters p{spec.tau, spec.m};
            if (p.tau == 0 || p.m == 0) {
                auto options = dataset.takens;
                const auto sel = takens::select_parameters(series, options);
                if (p.tau == 0) p.tau = sel.params.tau;
                if (p.m == 0) {
                    p.m = p.tau == sel.params.tau
                              ? sel.params.m
                              : takens::cao_dimension(series, p.tau, options.m_max, options.cao_threshold)
                                    .dimension;
                }
            }
            out.points = takens::delay_embed(series, p);
            out.takens = p;
            break;
        }
    }
    return out;
}

SweepResult run_sweep(const Matrix& X, const SweepConfig& config, const std::string& dataset_name) {
    const Index n = X.rows();
    if (config.k_min < 1 || config.k_max < config.k_min || config.k_max > n - 1)
        throw ParameterError("sweep: k range [" + std::to_string(config.k_min) + ", " +
                             std::to_string(config.k_max) + "] must lie within [1, n-1] with n=" +
                             std::to_string(n));
    if (config.reducers.empty()) throw ParameterError("sweep: no reducers configured");

    SweepResult result;
    result.dataset = dataset_name;
    result.n = n;
    result.k_min = config.k_min;
    result.k_max = config.k_max;
    result.seed = config.seed;

    const std::size_t methods = config.reducers.size();
    std::vector<std::optional<metrics::EvaluationContext>> contexts(methods);
    std::vector<std::string> reducer_errors(methods);
    std::vector<std::vector<std::string>> reducer_warnings(methods);

    parallel_for(methods, config.threads, [&](std::size_t r) {
        const auto& entry = config.reducers[r];
        reducers::ReducerSpec spec{entry.method, config.target_dim,
                                   entry.k > 0 ? entry.k : config.k_max, entry.regularization};
        try {
            auto reduction = reducers::reduce(X, spec);
            reducer_warnings[r] = std::move(reduction.warnings);
            contexts[r].emplace(X, std::move(reduction.embedding));
        } catch (const std::exception& e) {
            reducer_errors[r] = e.what();
        }
    });

    const Index span = config.k_max - config.k_min + 1;
    result.cells.resize(methods * static_cast<std::size_t>(span));
    parallel_for(result.cells.size(), config.threads, [&](std::size_t c) {
        const std::size_t r = c / static_cast<std::size_t>(span);
        auto& cell = result.cells[c];
        cell.method = std::string(reducers::to_string(config.reducers[r].method));
        cell.k = config.k_min + static_cast<Index>(c % static_cast<std::size_t>(span));
        auto fail = [&](const std::string& why) {
            cell.error = why;
            cell.w_n = cell.w_v = cell.r_procrustes = cell.r_delta_h = kNaN;
        };
        if (!contexts[r]) {
            fail("reducer failed: " + reducer_errors[r]);
            return;
        }
        try {
            const auto report = contexts[r]->evaluate(cell.k);
            cell.w_n = report.w_n;
            cell.w_v = report.w_v;
            cell.r_procrustes = report.r_procrustes;
            cell.r_delta_h = report.r_delta_h;
            cell.degenerate_count = report.degenerate_count;
            if (!std::isfinite(report.r_delta_h))
                cell.error = "every neighborhood is degenerate at k=" + std::to_string(cell.k);
        } catch (const std::exception& e) {
            fail(e.what());
        }
    });

    if (config.joint_k >= 1 && config.joint_k <= n - 1) {
        result.joint.resize(methods);
        parallel_for(methods, config.threads, [&](std::size_t r) {
            result.joint[r].first = std::string(reducers::to_string(config.reducers[r].method));
            if (contexts[r]) result.joint[r].second = contexts[r]->local_records(config.joint_k);
        });
    } else {
        result.warnings.push_back("joint export skipped: k=" + std::to_string(config.joint_k) +
                                  " is outside [1, n-1]");
    }
    for (std::size_t r = 0; r < methods; ++r)
        for (auto& w : reducer_warnings[r]) result.warnings.push_back(std::move(w));
    return result;
}

CorrelationMatrix correlation_report(std::span<const SweepCell> cells) {
    std::vector<std::array<double, 4>> rows;
    for (const auto& c : cells) {
        const std::array<double, 4> v{c.w_n, c.w_v, c.r_procrustes, c.r_delta_h};
        if (std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) rows.push_back(v);
    }
    if (rows.size() < 3)
        throw InputError("correlation_report: need at least 3 complete sweep cells, got " +
                         std::to_string(rows.size()));

    CorrelationMatrix out;
    out.samples = static_cast<Index>(rows.size());
    const double m = static_cast<double>(rows.size());
    std::array<double, 4> mean{};
    std::array<bool, 4> varies{};
    for (int a = 0; a < 4; ++a) {
        double s = 0.0;
        for (const auto& r : rows) s += r[a];
        mean[a] = s / m;
        varies[a] = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r[a] != rows[0][a]; });
    }
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            out.defined[a][b] = varies[a] && varies[b];
            if (!out.defined[a][b]) {
                out.entries(a, b) = kNaN;
                continue;
            }
            if (a == b) {
                out.entries(a, b) = 1.0;
                continue;
            }
            double sab = 0.0, saa = 0.0, sbb = 0.0;
            for (const auto& r : rows) {
                const double da = r[a] - mean[a];
                const double db = r[b] - mean[b];
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            out.entries(a, b) = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
        }
    }
    return out;
}

std::vector<metrics::LocalMetricRecord> joint_export(const Eigen::Ref<const Matrix>& X,
                                                     const Eigen::Ref<const Matrix>& Y, Index k) {
    if (X.rows() != Y.rows()) throw InputError("joint_export: X and Y have different point counts");
    if (k < 1 || k > X.rows() - 1) throw ParameterError("joint_export: k must be in [1, n-1]");
    return metrics::EvaluationContext(X, Y).local_records(k);
}

void write_sweep_csv(const fs::path& path, std::span<const SweepCell> cells) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << "method,k,w_n,w_v,r_procrustes,r_delta_h,degenerate_count\n";
    for (const auto& c : cells) {
        out << c.method << ',' << c.k << ',' << cell_field(c.w_n) << ',' << cell_field(c.w_v) << ','
            << cell_field(c.r_procrustes) << ',' << cell_field(c.r_delta_h) << ',' << c.degenerate_count
            << '\n';
    }
}

std::vector<SweepCell> read_sweep_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::vector<SweepCell> cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = data_io::split_csv_line(line);
        if (header.empty()) {
            header = fields;
            for (const char* need : {"method", "k", "w_n", "w_v", "r_procrustes", "r_delta_h"})
                if (std::find(header.begin(), header.end(), need) == header.end())
                    throw InputError("sweep CSV '" + path.string() + "' lacks column " + need);
            continue;
        }
        if (fields.size() != header.size())
            throw InputError("sweep CSV line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        SweepCell c;
        for (std::size_t f = 0; f < header.size(); ++f) {
            const auto& h = header[f];
            if (h == "method") c.method = fields[f];
            else if (h == "k") c.k = static_cast<Index>(parse_field(fields[f], line_no));
            else if (h == "w_n") c.w_n = parse_field(fields[f], line_no);
            else if (h == "w_v") c.w_v = parse_field(fields[f], line_no);
            else if (h == "r_procrustes") c.r_procrustes = parse_field(fields[f], line_no);
            else if (h == "r_delta_h") c.r_delta_h = parse_field(fields[f], line_no);
            else if (h == "degenerate_count") c.degenerate_count = static_cast<Index>(parse_field(fields[f], line_no));
        }
        cells.push_back(std::move(c));
    }
    if (header.empty()) throw InputError("sweep CSV '" + path.string() + "' is empty");
    return cells;
}

void write_correlation_csv(const fs::path& path, const CorrelationMatrix& c) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    for (const auto& l : c.labels) out << ',' << l;
    out << '\n';
    for (int a = 0; a < 4; ++a) {
        out << c.labels[static_cast<std::size_t>(a)];
        for (int b = 0; b < 4; ++b)
            out << ',' << (c.defined[a][b] ? data_io::format_double(c.entries(a, b)) : "undefined");
        out << '\n';
    }
}

void write_joint_csv(const fs::path& path, std::span<const metrics::LocalMetricRecord> records) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << "point_index,delta_h,procrustes_local,degenerate\n";
    for (const auto& r : records) {
        out << r.point_index << ',' << data_io::format_double(r.delta_h.value_or(kNaN)) << ','
            << data_io::format_double(r.procrustes_local.value_or(kNaN)) << ','
            << (r.degenerate ? "true" : "false") << '\n';
    }
}

void write_report_json(const fs::path& path, const metrics::MetricReport& report) {
    json j;
    j["n"] = report.n;
    j["k"] = report.k;
    j["r_delta_h"] = metric_json(report.r_delta_h);
    j["r_procrustes"] = metric_json(report.r_procrustes);
    j["w_n"] = metric_json(report.w_n);
    j["w_v"] = metric_json(report.w_v);
    j["degenerate_count"] = report.degenerate_count;
    j["locals"] = json::array();
    for (const auto& r : report.locals) {
        j["locals"].push_back({{"point_index", r.point_index},
                               {"delta_h", metric_json(r.delta_h.value_or(kNaN))},
                               {"procrustes_local", metric_json(r.procrustes_local.value_or(kNaN))},
                               {"degenerate", r.degenerate}});
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

ExperimentSummary run_experiment(const SweepConfig& config) {
    using clock = std::chrono::steady_clock;
    if (config.datasets.empty()) throw ParameterError("experiment: no datasets configured");
    ensure_directory(config.output_dir);

    ExperimentSummary summary;
    json meta;
    meta["version"] = kVersion;
    meta["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION);
    meta["compiler"] = __VERSION__;
    meta["config"] = json::parse(config_to_json(config));
    meta["seed"] = config.seed;
    meta["datasets"] = json::array();

    const bool nested = config.datasets.size() > 1;
    std::vector<SweepCell> pooled;
    for (const auto& named : config.datasets) {
        NamedDataset ds = named;
        if (ds.inherit_seed) ds.spec.seed = config.seed;
        const fs::path dir = nested ? config.output_dir / ds.name : config.output_dir;
        ensure_directory(dir);

        const auto t0 = clock::now();
        const auto prepared = prepare_dataset(ds);
        const auto t1 = clock::now();
        auto result = run_sweep(prepared.points, config, ds.name);
        const auto t2 = clock::now();

        const auto sweep_path = dir / "sweep.csv";
        write_sweep_csv(sweep_path, result.cells);
        summary.written.push_back(sweep_path.string());
        for (const auto& c : result.cells)
            if (!c.error.empty())
                summary.failures.push_back(ds.name + "/" + c.method + "/k=" + std::to_string(c.k) + ": " + c.error);

        json dmeta = {{"name", ds.name},
                      {"n", prepared.points.rows()},
                      {"ambient_dim", prepared.points.cols()},
                      {"seed", ds.spec.seed},
                      {"timings_s",
                       {{"prepare", std::chrono::duration<double>(t1 - t0).count()},
                        {"sweep", std::chrono::duration<double>(t2 - t1).count()}}},
                      {"warnings", result.warnings}};
        if (prepared.takens) dmeta["takens"] = {{"tau", prepared.takens->tau}, {"m", prepared.takens->m}};

        if (nested) {
            try {
                const auto corr = correlation_report(result.cells);
                write_correlation_csv(dir / "correlation.csv", corr);
                summary.written.push_back((dir / "correlation.csv").string());
            } catch (const InputError& e) {
                summary.failures.push_back(ds.name + "/correlation: " + e.what());
            }
        }
        for (const auto& [method, records] : result.joint) {
            if (records.empty()) continue;
            const auto jp = dir / ("joint_" + method + "_k" + std::to_string(config.joint_k) + ".csv");
            write_joint_csv(jp, records);
            summary.written.push_back(jp.string());
        }
        pooled.insert(pooled.end(), result.cells.begin(), result.cells.end());
        meta["datasets"].push_back(dmeta);
        summary.results.push_back(std::move(result));
    }

    try {
        summary.pooled = correlation_report(pooled);
        const auto cp = config.output_dir / "correlation.csv";
        write_correlation_csv(cp, *summary.pooled);
        summary.written.push_back(cp.string());
    } catch (const InputError& e) {
        summary.failures.push_back(std::string("correlation: ") + e.what());
    }

    meta["failures"] = summary.failures;
    meta["outputs"] = summary.written;
    const auto mp = config.output_dir / "run_meta.json";
    std::ofstream out(mp);
    if (!out) throw InputError("cannot write '" + mp.string() + "'");
    out << meta.dump(2) << '\n';
    summary.written.push_back(mp.string());
    return summary;
}

}  // namespace erpm::harness
