// Command-line front end: dataset generation, Takens reconstruction,
// reduction, metric evaluation, k-sweeps, correlation and joint exports.

#include "erpm/data_io.hpp"
#include "erpm/harness.hpp"
#include "erpm/metrics.hpp"
#include "erpm/reducers.hpp"
#include "erpm/takens.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

namespace {

using namespace erpm;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

std::vector<std::string> split_names(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

data_io::HeaderPolicy parse_header(const std::string& s) {
    if (s == "detect") return data_io::HeaderPolicy::detect;
    if (s == "present") return data_io::HeaderPolicy::present;
    if (s == "absent") return data_io::HeaderPolicy::absent;
    throw InputError("--header must be detect, present or absent");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embedding quality metrics: ERPM, Local Procrustes and MRRE"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset as CSV");
    std::string gen_kind = "s-curve", gen_out, gen_truth;
    Index gen_n = 2000;
    double gen_noise = 0.0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind, "s-curve or swiss-roll")->capture_default_str();
    gen->add_option("--n", gen_n, "Number of points")->capture_default_str();
    gen->add_option("--noise", gen_noise, "Gaussian noise standard deviation")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output CSV (points)")->required();
    gen->add_option("--truth", gen_truth, "Optional CSV for the intrinsic parameters");

    // takens
    auto* tk = app.add_subcommand("takens", "Delay-embed a time series (prints tau and m)");
    std::string tk_series, tk_column, tk_out, tk_header = "detect";
    bool tk_log = false;
    Index tk_tau = 0, tk_m = 0;
    takens::SelectionOptions tk_opts;
    tk->add_option("--series", tk_series, "Series CSV")->required();
    tk->add_option("--column", tk_column, "Column name or 0-based index")->required();
    tk->add_option("--header", tk_header, "detect, present or absent")->capture_default_str();
    tk->add_flag("--log-transform", tk_log, "Take the natural log of every sample");
    tk->add_option("--tau", tk_tau, "Fixed delay (default: first AMI minimum)");
    tk->add_option("--m", tk_m, "Fixed dimension (default: Cao's method)");
    tk->add_option("--max-lag", tk_opts.max_lag, "Largest AMI lag (0: automatic)");
    tk->add_option("--bins", tk_opts.bins, "AMI histogram bins (0: ceil(sqrt(n/5)))");
    tk->add_option("--m-max", tk_opts.m_max, "Largest dimension for Cao's method")->capture_default_str();
    tk->add_option("--cao-threshold", tk_opts.cao_threshold, "E1 saturation threshold")
        ->capture_default_str();
    tk->add_option("--out", tk_out, "Output CSV for the delay matrix");

    // reduce
    auto* rd = app.add_subcommand("reduce", "Reduce a point matrix");
    std::string rd_in, rd_out, rd_method = "pca";
    reducers::ReducerSpec rd_spec;
    rd->add_option("--input", rd_in, "Input CSV (rows are points)")->required();
    rd->add_option("--method", rd_method, "identity, pca, kpca2, lle, hlle, isomap, info-lle")
        ->capture_default_str();
    rd->add_option("--dim", rd_spec.target_dim, "Target dimension")->capture_default_str();
    rd->add_option("--k", rd_spec.k, "Neighbor count for neighborhood methods")->capture_default_str();
    rd->add_option("--regularization", rd_spec.regularization, "LLE Gram regularization")
        ->capture_default_str();
    rd->add_option("--out", rd_out, "Output CSV")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Compute ERPM, Local Procrustes and MRRE for (X, Y)");
    std::string ev_x, ev_y, ev_out;
    Index ev_k = 15;
    ev->add_option("--x", ev_x, "High-dimensional CSV")->required();
    ev->add_option("--y", ev_y, "Embedding CSV")->required();
    ev->add_option("--k", ev_k, "Neighborhood size")->capture_default_str();
    ev->add_option("--out", ev_out, "Write the full report as JSON");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Run the k-sweep protocol");
    std::string sw_config, sw_out, sw_methods;
    std::optional<std::uint64_t> sw_seed;
    std::optional<Index> sw_kmin, sw_kmax, sw_dim, sw_k;
    std::optional<unsigned> sw_threads;
    sw->add_option("--config", sw_config, "JSON configuration (defaults follow the reference setup)");
    sw->add_option("--seed", sw_seed, "Override the seed");
    sw->add_option("--out", sw_out, "Override the output directory");
    sw->add_option("--k-min", sw_kmin, "Override the sweep lower bound");
    sw->add_option("--k-max", sw_kmax, "Override the sweep upper bound");
    sw->add_option("--k", sw_k, "Override the joint-export k");
    sw->add_option("--method", sw_methods, "Comma-separated reducer list");
    sw->add_option("--dim", sw_dim, "Override the target dimension");
    sw->add_option("--threads", sw_threads, "Worker threads for sweep cells");

    // correlate
    auto* co = app.add_subcommand("correlate", "Correlation matrix of a sweep CSV");
    std::vector<std::string> co_in;
    std::string co_out;
    co->add_option("--sweep", co_in, "One or more sweep.csv files (pooled)")->required();
    co->add_option("--out", co_out, "Output correlation CSV (default: stdout)");

    // joint
    auto* jt = app.add_subcommand("joint", "Per-point ERPM / Procrustes table");
    std::string jt_x, jt_y, jt_out;
    Index jt_k = 15;
    jt->add_option("--x", jt_x, "High-dimensional CSV")->required();
    jt->add_option("--y", jt_y, "Embedding CSV")->required();
    jt->add_option("--k", jt_k, "Neighborhood size")->capture_default_str();
    jt->add_option("--out", jt_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;  // --help / --version exit 0
    }

    try {
        if (*gen) {
            const auto kind = data_io::parse_dataset_kind(gen_kind);
            data_io::SyntheticDataset ds;
            if (kind == data_io::DatasetKind::s_curve) ds = data_io::s_curve(gen_n, gen_noise, gen_seed);
            else if (kind == data_io::DatasetKind::swiss_roll) ds = data_io::swiss_roll(gen_n, gen_noise, gen_seed);
            else throw InputError("generate supports s-curve and swiss-roll");
            data_io::write_matrix_csv(gen_out, ds.points, {"x", "y", "z"});
            if (!gen_truth.empty()) data_io::write_matrix_csv(gen_truth, ds.ground_truth, {"t", "height"});
            std::cout << "wrote " << ds.points.rows() << " points (seed " << gen_seed << ") to " << gen_out << '\n';
        } else if (*tk) {
            auto series = data_io::load_series_csv(tk_series, tk_column, parse_header(tk_header));
            if (tk_log) {
                for (auto& v : series.values) {
                    if (!(v > 0.0)) throw InputError("--log-transform needs positive samples");
                    v = std::log(v);
                }
            }
            takens::EmbeddingParameters p{tk_tau, tk_m};
            if (p.tau == 0 || p.m == 0) {
                const auto sel = takens::select_parameters(series, tk_opts);
                if (p.tau == 0) {
                    p.tau = sel.params.tau;
                    if (!sel.delay.local_minimum)
                        std::cerr << "warning: AMI has no interior minimum; using the global minimum\n";
                    if (sel.ami.constant_series) std::cerr << "warning: series is constant\n";
                }
                if (p.m == 0) {
                    const auto cao = p.tau == sel.params.tau
                                         ? sel.cao
                                         : takens::cao_dimension(series, p.tau, tk_opts.m_max,
                                                                 tk_opts.cao_threshold);
                    p.m = cao.dimension;
                    if (!cao.saturated) std::cerr << "warning: Cao's E1 did not saturate; using m_max\n";
                }
            }
            const auto X = takens::delay_embed(series, p);
            std::cout << "tau=" << p.tau << " m=" << p.m << " rows=" << X.rows() << '\n';
            if (!tk_out.empty()) data_io::write_matrix_csv(tk_out, X);
        } else if (*rd) {
            const auto X = data_io::load_matrix_csv(rd_in);
            rd_spec.method = reducers::parse_method(rd_method);
            const auto r = reducers::reduce(X, rd_spec);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            data_io::write_matrix_csv(rd_out, r.embedding);
        } else if (*ev) {
            const auto X = data_io::load_matrix_csv(ev_x);
            const auto Y = data_io::load_matrix_csv(ev_y);
            const auto report = metrics::evaluate(X, Y, ev_k);
            std::cout << "n=" << report.n << " k=" << report.k << '\n'
                      << "r_delta_h=" << data_io::format_double(report.r_delta_h) << '\n'
                      << "r_procrustes=" << data_io::format_double(report.r_procrustes) << '\n'
                      << "w_n=" << data_io::format_double(report.w_n) << '\n'
                      << "w_v=" << data_io::format_double(report.w_v) << '\n'
                      << "degenerate_count=" << report.degenerate_count << '\n';
            if (!ev_out.empty()) harness::write_report_json(ev_out, report);
            if (!std::isfinite(report.r_delta_h)) {
                std::cerr << "error: every neighborhood is degenerate at k=" << ev_k << '\n';
                return kExitNumerical;
            }
        } else if (*sw) {
            auto config = sw_config.empty() ? harness::default_config() : harness::load_config(sw_config);
            if (sw_seed) config.seed = *sw_seed;
            if (!sw_out.empty()) config.output_dir = sw_out;
            if (sw_kmin) config.k_min = *sw_kmin;
            if (sw_kmax) config.k_max = *sw_kmax;
            if (sw_k) config.joint_k = *sw_k;
            if (sw_dim) config.target_dim = *sw_dim;
            if (sw_threads) config.threads = *sw_threads;
            if (!sw_methods.empty()) {
                config.reducers.clear();
                for (const auto& name : split_names(sw_methods))
                    config.reducers.push_back({reducers::parse_method(name), 0, reducers::kDefaultLleRegularization});
            }
            const auto summary = harness::run_experiment(config);
            for (const auto& r : summary.results)
                for (const auto& w : r.warnings) std::cerr << "warning: " << r.dataset << ": " << w << '\n';
            for (const auto& f : summary.failures) std::cerr << "failed cell: " << f << '\n';
            for (const auto& path : summary.written) std::cout << "wrote " << path << '\n';
            const bool any_ok = std::any_of(summary.results.begin(), summary.results.end(), [](const auto& r) {
                return std::any_of(r.cells.begin(), r.cells.end(), [](const auto& c) { return c.error.empty(); });
            });
            if (!any_ok) return kExitNumerical;
        } else if (*co) {
            std::vector<harness::SweepCell> cells;
            for (const auto& path : co_in) {
                auto part = harness::read_sweep_csv(path);
                cells.insert(cells.end(), part.begin(), part.end());
            }
            const auto corr = harness::correlation_report(cells);
            if (co_out.empty()) {
                std::cout << ",w_n,w_v,r_procrustes,r_delta_h\n";
                for (int a = 0; a < 4; ++a) {
                    std::cout << corr.labels[static_cast<std::size_t>(a)];
                    for (int b = 0; b < 4; ++b)
                        std::cout << ',' << (corr.defined[a][b] ? data_io::format_double(corr.entries(a, b)) : "undefined");
                    std::cout << '\n';
                }
            } else {
                harness::write_correlation_csv(co_out, corr);
            }
        } else if (*jt) {
            const auto X = data_io::load_matrix_csv(jt_x);
            const auto Y = data_io::load_matrix_csv(jt_y);
            const auto records = harness::joint_export(X, Y, jt_k);
            harness::write_joint_csv(jt_out, records);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}
