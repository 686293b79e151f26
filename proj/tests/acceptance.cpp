// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include "erpm/data_io.hpp"
#include "erpm/harness.hpp"
#include "erpm/metrics.hpp"
#include "erpm/neighborhoods.hpp"
#include "erpm/random.hpp"
#include "erpm/reducers.hpp"
#include "erpm/spectral.hpp"
#include "erpm/takens.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace erpm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", id, title,
                o.detail.c_str(), secs, budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Largest per-column residual of an affine fit of the ground truth from E.
double affine_alignment_error(const Matrix& E, const Matrix& G) {
    double worst = 0.0;
    for (Index j = 0; j < G.cols(); ++j) worst = std::max(worst, oracle::affine_residual(E, G.col(j)));
    return worst;
}

Outcome zero_metrics(const Matrix& X, const Matrix& Y, double tol) {
    double worst_h = 0, worst_p = 0, worst_w = 0;
    for (Index k : {2, 5, 10}) {
        const auto r = metrics::evaluate(X, Y, k);
        worst_h = std::max(worst_h, std::abs(r.r_delta_h));
        worst_p = std::max(worst_p, std::abs(r.r_procrustes));
        worst_w = std::max({worst_w, r.w_n, r.w_v});
    }
    std::ostringstream d;
    d << "max|R_dH|=" << worst_h << " max R_CN=" << worst_p << " max W=" << worst_w;
    return {worst_h < tol && worst_p < tol && worst_w == 0.0, d.str()};
}

}  // namespace

int main() {
    std::printf("acceptance checks (erpm %s)\n", kVersion);

    run(1, "identity invariance", 5, [] {
        std::mt19937_64 gen(101);
        const Matrix X = oracle::random_matrix(200, 5, gen);
        return zero_metrics(X, X, 1e-10);
    });

    run(2, "similarity invariance", 5, [] {
        std::mt19937_64 gen(202);
        const Matrix X = oracle::random_matrix(200, 5, gen);
        const double c = std::uniform_real_distribution<double>(0.0, 10.0)(gen);
        const Matrix Q = oracle::random_orthogonal(5, gen);
        const Eigen::RowVectorXd t = oracle::random_matrix(1, 5, gen, 10.0);
        const Matrix Y = ((c * X * Q.transpose()).rowwise() + t).eval();
        auto o = zero_metrics(X, Y, 1e-9);
        o.detail = "c=" + fmt("%.3f", c) + " " + o.detail;
        return o;
    });

    run(3, "entropy decomposition", 1, [] {
        std::mt19937_64 gen(303);
        std::uniform_int_distribution<int> len(1, 30);
        std::uniform_real_distribution<double> mag(-6.0, 2.0);
        std::bernoulli_distribution zero(0.15);
        double worst = 0.0;
        bool bounds = true;
        for (int trial = 0; trial < 1000; ++trial) {
            Vector v(len(gen));
            for (Index j = 0; j < v.size(); ++j) v[j] = zero(gen) ? 0.0 : std::pow(10.0, mag(gen));
            if (v.maxCoeff() == 0.0) v[0] = 1.0;
            const auto s = spectral::SingularSpectrum::from_values(v);
            const auto e = spectral::spectral_entropy(s);
            worst = std::max(worst, std::abs(e.entropy - (std::log(e.stable_rank) - e.epsilon_term)));
            const double r = spectral::stable_rank(s);
            bounds = bounds && r >= 1.0 - 1e-15 && r <= static_cast<double>(s.algebraic_rank) + 1e-12;
        }
        return Outcome{worst < 1e-12 && bounds,
                       "max|H-(log r - eps)|=" + fmt("%.2e", worst) + (bounds ? ", 1<=r<=rank" : ", rank bound violated")};
    });

    run(4, "MRRE oracle equivalence", 5, [] {
        std::mt19937_64 gen(404);
        double worst = 0.0;
        int bitwise = 0, total = 0;
        for (int trial = 0; trial < 25; ++trial) {
            const Matrix X = oracle::random_matrix(15, 4, gen);
            const Matrix Y = oracle::random_matrix(15, 2, gen);
            const auto q = metrics::coranking(neighborhoods::rank_table(X), neighborhoods::rank_table(Y));
            for (int K : {2, 4}) {
                const auto w = metrics::mrre(q, K);
                const auto [wn, wv] = oracle::mrre_rank_sum(X, Y, K);
                worst = std::max({worst, std::abs(w.w_n - wn), std::abs(w.w_v - wv)});
                bitwise += (w.w_n == wn) + (w.w_v == wv);
                total += 2;
            }
        }
        return Outcome{worst <= 1e-15, "max diff " + fmt("%.2e", worst) + ", " + std::to_string(bitwise) + "/" +
                                           std::to_string(total) + " bit-identical"};
    });

    run(5, "Procrustes vs dense search", 30, [] {
        std::mt19937_64 gen(505);
        double worst = 0.0, below = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix Xc = neighborhoods::center_columns(oracle::random_matrix(3, 8, gen));
            const Matrix Yc = neighborhoods::center_columns(oracle::random_matrix(2, 8, gen));
            const double value = *metrics::procrustes_local(Xc, Yc);
            const double searched = oracle::procrustes_search(Xc.transpose(), Yc.transpose(), 1e-3);
            worst = std::max(worst, searched - value);
            below = std::max(below, value - searched);
        }
        return Outcome{worst <= 1e-3 && below <= 1e-12,
                       "max(search - closed form)=" + fmt("%.2e", worst) + ", closed form never worse"};
    });

    // Shared S-curve run for criteria 6 and 7.
    const auto scurve = data_io::s_curve(500, 0.0, 0);

    run(6, "metric correlations on the S-curve sweep", 120, [&] {
        harness::SweepConfig c;
        c.k_min = 5;
        c.k_max = 15;
        c.target_dim = 2;
        c.threads = 4;
        for (auto m : {reducers::Method::pca, reducers::Method::lle, reducers::Method::isomap})
            c.reducers.push_back({m, 0, reducers::kDefaultLleRegularization});
        const auto r = harness::run_sweep(scurve.points, c, "s-curve");
        const auto corr = harness::correlation_report(r.cells);
        const double h_p = corr.entries(3, 2), h_wn = corr.entries(3, 0);
        const bool defined = corr.defined[3][2] && corr.defined[3][0];
        return Outcome{defined && h_p <= -0.7 && std::abs(h_wn) < std::abs(h_p),
                       "corr(R_dH,R_CN)=" + fmt("%.4f", h_p) + " corr(W_n,R_dH)=" + fmt("%.4f", h_wn) + " over " +
                           std::to_string(corr.samples) + " cells"};
    });

    run(7, "Isomap vs HLLE local entropy change at k=15", 120, [&] {
        auto med = [&](reducers::Method m) {
            const Matrix Y = reducers::reduce(scurve.points, {m, 2, 15, reducers::kDefaultLleRegularization}).embedding;
            std::vector<double> a;
            for (const auto& rec : harness::joint_export(scurve.points, Y, 15))
                if (rec.delta_h) a.push_back(std::abs(*rec.delta_h));
            return median(a);
        };
        const double iso = med(reducers::Method::isomap);
        const double hl = med(reducers::Method::hlle);
        return Outcome{iso < hl && iso < 0.1,
                       "median|dH| isomap=" + fmt("%.4f", iso) + " hlle=" + fmt("%.4f", hl)};
    });

    run(8, "Takens pipeline", 30, [] {
        std::mt19937_64 gen(808);
        bool shapes = true;
        int checked = 0;
        while (checked < 100) {
            const Index length = std::uniform_int_distribution<Index>(2, 500)(gen);
            const Index m = std::uniform_int_distribution<Index>(1, 10)(gen);
            const Index tau = std::uniform_int_distribution<Index>(1, 60)(gen);
            if ((m - 1) * tau >= length) continue;
            takens::TimeSeries s{std::vector<double>(static_cast<std::size_t>(length), 0.5), ""};
            const Matrix E = takens::delay_embed(s, {tau, m});
            shapes = shapes && E.rows() == length - (m - 1) * tau && E.cols() == m;
            ++checked;
        }

        takens::TimeSeries sine;
        for (int t = 0; t < 2000; ++t) sine.values.push_back(std::sin(2.0 * std::numbers::pi * t / 100.0));
        const Index bins = takens::default_bins(2000);
        const auto curve = takens::auto_mutual_information(sine, 200, bins);
        const auto [lo, hi] = std::minmax_element(sine.values.begin(), sine.values.end());
        double worst = 0.0;
        for (std::size_t lag = 1; lag <= curve.mi.size(); ++lag) {
            const std::size_t overlap = 2000 - lag;
            const std::vector<double> a(sine.values.begin(), sine.values.begin() + static_cast<std::ptrdiff_t>(overlap));
            const std::vector<double> b(sine.values.begin() + static_cast<std::ptrdiff_t>(lag), sine.values.end());
            worst = std::max(worst, std::abs(curve.mi[lag - 1] - oracle::histogram_mi(a, b, *lo, *hi, static_cast<int>(bins))));
        }

        Rng rng(8080);
        takens::TimeSeries noise;
        for (int t = 0; t < 2000; ++t) noise.values.push_back(rng.normal());
        const auto cao = takens::cao_dimension(noise, 1, 10);

        std::string detail = std::string(shapes ? "100 shapes ok" : "shape mismatch") + ", AMI max diff " +
                             fmt("%.1e", worst) + ", white-noise Cao " +
                             (cao.saturated ? "saturated (m=" + std::to_string(cao.dimension) + ")" : "unsaturated");
        if (const char* sp = std::getenv("ERPM_SP500_CSV")) {
            const char* col = std::getenv("ERPM_SP500_COLUMN");
            const auto series = data_io::load_series_csv(sp, col ? col : "close");
            const auto sel = takens::select_parameters(series);
            detail += "; S&P series (tau, m) = (" + std::to_string(sel.params.tau) + ", " +
                      std::to_string(sel.params.m) + "), published (57, 6) [informative]";
        }
        return Outcome{shapes && worst < 1e-12 && !cao.saturated, detail};
    });

    run(9, "sweep reproducibility (CLI)", 120, [] {
        const fs::path work = ERPM_ACCEPTANCE_DIR;
        fs::remove_all(work);
        fs::create_directories(work);
        {
            std::ofstream cfg(work / "config.json");
            cfg << R"({"dataset": {"kind": "s-curve", "n": 500, "noise": 0.01},
                      "reducers": ["pca", "lle", "isomap", "hlle"],
                      "sweep": {"k_min": 5, "k_max": 15}, "joint_k": 15,
                      "target_dim": 2, "seed": 2024, "threads": 4})";
        }
        for (const char* run : {"a", "b"}) {
            const std::string cmd = std::string("\"") + ERPM_CLI_PATH + "\" sweep --config \"" +
                                    (work / "config.json").string() + "\" --out \"" + (work / run).string() +
                                    "\" > \"" + (work / (std::string(run) + ".log")).string() + "\" 2>&1";
            if (std::system(cmd.c_str()) != 0) return Outcome{false, std::string("sweep run ") + run + " failed"};
        }
        int compared = 0;
        for (const auto& entry : fs::directory_iterator(work / "a")) {
            const auto name = entry.path().filename().string();
            if (name == "run_meta.json") continue;  // carries timings
            if (slurp(entry.path()) != slurp(work / "b" / name)) return Outcome{false, name + " differs"};
            ++compared;
        }
        return Outcome{compared >= 6, std::to_string(compared) + " files byte-identical"};
    });

    run(10, "HLLE recovers the S-curve parameters", 60, [] {
        const auto ds = data_io::s_curve(800, 0.0, 0);
        const auto r = reducers::hlle(ds.points, 2, 12);
        const double err = affine_alignment_error(r.embedding, ds.ground_truth);
        const double pooled = oracle::affine_residual(r.embedding, ds.ground_truth);
        return Outcome{err < 0.05, "worst per-parameter affine residual " + fmt("%.4f", err) + " (pooled " +
                                       fmt("%.4f", pooled) + ")"};
    });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
