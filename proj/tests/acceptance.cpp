// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: vmar_acceptance [data_dir] [jobs]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "vmar/dist.hpp"
#include "vmar/errors.hpp"
#include "vmar/estimate.hpp"
#include "vmar/inference.hpp"
#include "vmar/montecarlo.hpp"
#include "vmar/panel.hpp"
#include "vmar/parallel.hpp"
#include "vmar/preprocess.hpp"
#include "vmar/simulate.hpp"

using namespace vmar;
using vmar::test::max_abs;

namespace {

// Tolerances.
constexpr double kExpandTol = 1e-12;
constexpr double kExpandSeconds = 5.0;
constexpr double kAnnihilationTol = 1e-10;
constexpr double kQuantileTol = 1e-3;
constexpr double kSizeLr = 0.946, kSizeLrBand = 0.05;
constexpr double kSizeBicMin = 0.95;
constexpr double kSizeAic = 0.838, kSizeAicBand = 0.06;
constexpr double kPowerLrMin = 0.98;
constexpr double kHeavyLr = 0.913, kHeavyLrBand = 0.07;
constexpr double kHeavyFailureMax = 0.05;
constexpr double kRecoveryEntryTol = 0.10;
constexpr double kRecoveryShareMin = 0.90;
constexpr double kIdentityTol = 1e-9;
constexpr double kHpTol = 1e-9;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %2d %-34s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class F>
void guarded(int id, const std::string& name, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Matrix random_matrix(int n, int m, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return Matrix::NullaryExpr(n, m, [&] { return u(rng); });
}

// Draws coefficient lists and shrinks them until both factors are stationary.
MatrixList stable_list(int N, int p, std::mt19937_64& rng) {
    MatrixList out;
    for (int i = 0; i < p; ++i) out.push_back(random_matrix(N, N, 0.6, rng));
    while (companion_spectral_radius(out, N) >= 0.95) {
        for (auto& m : out) m *= 0.8;
    }
    return out;
}

Matrix random_spd(int N, std::mt19937_64& rng) {
    const Matrix a = random_matrix(N, N, 1.0, rng);
    return a * a.transpose() + Matrix::Identity(N, N);
}

void expansion_oracle() {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dimN(1, 4), ord(0, 3);
    double worst = 0.0, seconds = 0.0;
    for (int m = 0; m < 200; ++m) {
        const int N = dimN(rng);
        ModelOrder o{N, ord(rng), ord(rng)};
        if (o.r + o.s == 0) o.r = 1;
        const auto model = make_model(o, stable_list(N, o.r, rng), stable_list(N, o.s, rng), random_spd(N, rng), 3.0,
                                      m % 2 ? Representation::LagFirst : Representation::LeadFirst);
        const auto t0 = std::chrono::steady_clock::now();
        const auto poly = expand(model);
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& [j, a] : test::brute_force_expand(model)) worst = std::max(worst, max_abs(poly.at(j) - a));
    }
    report(1, "expansion oracle", worst <= kExpandTol && seconds < kExpandSeconds,
           fmt("200 models, max |diff| %.2e, %.3f s", worst, seconds));
}

void univariate_mapping() {
    const double in[4][2] = {{0.38, 0.85}, {0.34, 0.86}, {0.43, 0.87}, {0.87, 0.44}};
    const double want[4][2] = {{0.29, 0.64}, {0.26, 0.67}, {0.31, 0.63}, {0.63, 0.32}};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 4; ++i) {
        const auto add = to_additive(test::scalar_model(1, 1, in[i][0], in[i][1], 1.0, 3.0));
        const double b1 = add.b_lag[0](0, 0), b2 = add.b_lead[0](0, 0);
        const bool hit = std::round(b1 * 100.0) == std::round(want[i][0] * 100.0) &&
                         std::round(b2 * 100.0) == std::round(want[i][1] * 100.0);
        ok = ok && hit;
        detail += fmt("(%.2f,%.2f)%s ", b1, b2, hit ? "" : "!");
    }
    report(2, "univariate lag/lead mapping", ok, detail);
}

void annihilation() {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> dimN(2, 4), ord(1, 3), lag(0, 3);
    double worst = 0.0;
    for (int m = 0; m < 100; ++m) {
        const int N = dimN(rng);
        const int k = std::uniform_int_distribution<int>(1, N - 1)(rng);
        ReducedRankLeads spec;
        spec.order = {N, lag(rng), ord(rng)};
        spec.k = k;
        spec.delta_star = random_matrix(k, N - k, 1.0, rng);
        for (int j = 0; j < spec.order.s; ++j) spec.gammas.push_back(random_matrix(N - k, N, 0.5, rng));
        MatrixList psi = build_reduced_rank_leads(spec);
        while (companion_spectral_radius(psi, N) >= 0.95) {
            for (auto& g : spec.gammas) g *= 0.8;
            psi = build_reduced_rank_leads(spec);
        }
        const auto model = make_model(spec.order, stable_list(N, spec.order.r, rng), psi, random_spd(N, rng), 3.0);
        const auto add = to_additive(model);
        const Matrix delta_t = spec.delta().transpose();
        for (const auto& b : add.b_lead) worst = std::max(worst, max_abs(delta_t * b));
    }
    report(3, "common bubble annihilation", worst < kAnnihilationTol, fmt("100 specs, max |delta' B_-j| %.2e", worst));
}

// Rank of the Jacobian of (delta_star, Gamma) -> stacked leads at a random point:
// the dimension of the restricted set, so the test df is N^2 s minus it.
int restricted_dimension(int N, int k, int s, std::mt19937_64& rng) {
    ReducedRankLeads spec;
    spec.order = {N, 0, s};
    spec.k = k;
    spec.delta_star = random_matrix(k, N - k, 1.0, rng);
    for (int j = 0; j < s; ++j) spec.gammas.push_back(random_matrix(N - k, N, 1.0, rng));
    auto stacked = [&](const ReducedRankLeads& sp) {
        const MatrixList psi = build_reduced_rank_leads(sp);
        Vector v(N * N * s);
        for (int j = 0; j < s; ++j) v.segment(j * N * N, N * N) = psi[static_cast<std::size_t>(j)].reshaped();
        return v;
    };
    std::vector<double*> params;
    for (Eigen::Index i = 0; i < spec.delta_star.size(); ++i) params.push_back(spec.delta_star.data() + i);
    for (auto& g : spec.gammas)
        for (Eigen::Index i = 0; i < g.size(); ++i) params.push_back(g.data() + i);
    Matrix J(N * N * s, static_cast<Eigen::Index>(params.size()));
    const double h = 1e-6;
    for (std::size_t c = 0; c < params.size(); ++c) {
        const double keep = *params[c];
        *params[c] = keep + h;
        const Vector up = stacked(spec);
        *params[c] = keep - h;
        const Vector down = stacked(spec);
        *params[c] = keep;
        J.col(static_cast<Eigen::Index>(c)) = (up - down) / (2.0 * h);
    }
    Eigen::JacobiSVD<Matrix> svd(J);
    svd.setThreshold(1e-8);
    return static_cast<int>(svd.rank());
}

void df_identities() {
    std::mt19937_64 rng(13);
    int checked = 0, bad = 0;
    for (int N = 2; N <= 5; ++N) {
        for (int s = 1; s <= 4; ++s) {
            std::vector<int> counted(static_cast<std::size_t>(N), 0);
            for (int k = 1; k < N; ++k) {
                counted[static_cast<std::size_t>(k)] = N * N * s - restricted_dimension(N, k, s, rng);
                ++checked;
                if (rho(N, k, s) != counted[static_cast<std::size_t>(k)]) ++bad;
                const ModelOrder o{N, 1, s};
                if (param_count(o) - param_count(o, k) != counted[static_cast<std::size_t>(k)]) ++bad;
            }
            for (int k = 2; k < N; ++k) {
                for (int l = 1; l < k; ++l) {
                    ++checked;
                    if (rho_nested(N, k, l, s) != counted[static_cast<std::size_t>(k)] - counted[static_cast<std::size_t>(l)]) ++bad;
                }
            }
        }
    }
    const double q1 = chi2_quantile(0.95, 1), q4 = chi2_quantile(0.95, 4);
    const bool ok = bad == 0 && std::abs(q1 - 3.841) <= kQuantileTol && std::abs(q4 - 9.488) <= kQuantileTol;
    report(4, "degrees of freedom", ok, fmt("%d cases, %d mismatches, chi2 %.4f %.4f", checked, bad, q1, q4));
}

McResult run_design(const std::string& name, int reps, int jobs) {
    auto cfg = *find_design(name, reps);
    cfg.jobs = jobs;
    return run(cfg);
}

void mc_size(int jobs) {
    const auto res = run_design("biv-h0-l3-t500", 300, jobs);
    const auto& t = res.tests[0];
    const bool ok = std::abs(t.lr - kSizeLr) <= kSizeLrBand && t.bic >= kSizeBicMin &&
                    std::abs(t.aic - kSizeAic) <= kSizeAicBand;
    report(5, "Monte Carlo size, lambda 3", ok,
           fmt("n %d, LR %.3f (se %.3f), BIC %.3f, AIC %.3f, HQC %.3f, failures %d, %.0f s", t.n, t.lr, t.se_lr, t.bic,
               t.aic, t.hqc, res.failures, res.wall_seconds));
}

void mc_power(int jobs) {
    const auto res = run_design("biv-h1-l3-t500", 300, jobs);
    const auto& t = res.tests[0];
    report(6, "Monte Carlo power, lambda 3", t.lr >= kPowerLrMin,
           fmt("n %d, LR %.3f, BIC %.3f, AIC %.3f, failures %d, %.0f s", t.n, t.lr, t.bic, t.aic, res.failures,
               res.wall_seconds));
}

void mc_heavy(int jobs) {
    const auto res = run_design("biv-h0-l1.5-t500", 200, jobs);
    const auto& t = res.tests[0];
    const double fail_share = static_cast<double>(res.failures) / res.n_reps;
    report(7, "Monte Carlo size, lambda 1.5", std::abs(t.lr - kHeavyLr) <= kHeavyLrBand && fail_share < kHeavyFailureMax,
           fmt("n %d, LR %.3f (se %.3f), BIC %.3f, AIC %.3f, failures %d, %.0f s", t.n, t.lr, t.se_lr, t.bic, t.aic,
               res.failures, res.wall_seconds));
}

void recovery(int jobs) {
    const auto truth = test::bivariate_full(3.0);
    std::vector<int> hit(50, 0);
    std::vector<double> worst(50, 0.0);
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(50, jobs, [&](int i) {
        const auto panel = simulate_vmar(truth, {1000, std::nullopt, 5000u + static_cast<std::uint64_t>(i)});
        FitOptions o;
        o.n_starts = 1;
        o.start_mode = StartMode::TrueValues;
        o.initial = truth;
        o.seed = static_cast<std::uint64_t>(i);
        try {
            const auto f = fit(panel, truth.order, std::nullopt, o);
            const double w = std::max(max_abs(f.model.phi[0] - truth.phi[0]), max_abs(f.model.psi[0] - truth.psi[0]));
            worst[static_cast<std::size_t>(i)] = w;
            hit[static_cast<std::size_t>(i)] = w <= kRecoveryEntryTol;
        } catch (const std::exception&) {
            worst[static_cast<std::size_t>(i)] = INFINITY;
        }
    });
    int hits = 0;
    double median_worst = 0.0;
    for (int h : hit) hits += h;
    std::vector<double> sorted = worst;
    std::sort(sorted.begin(), sorted.end());
    median_worst = sorted[25];
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(8, "parameter recovery, T 1000", hits >= kRecoveryShareMin * 50,
           fmt("%d/50 seeds within %.2f, median max error %.3f, %.0f s", hits, kRecoveryEntryTol, median_worst, secs));
}

// Checks a scan's rows against the stored fits and the closed-form penalties.
bool scan_identities(const CBTestReport& rep, double& worst) {
    bool ok = true;
    const double lnT = std::log(static_cast<double>(rep.T));
    auto find = [&](std::optional<int> k) -> const CBFitSummary& {
        for (const auto& f : rep.fits)
            if (f.k == k) return f;
        throw std::runtime_error("missing fit");
    };
    for (const auto& row : rep.rows) {
        if (!row.ok) return false;
        const double lr = row.lr.stat;
        const int df = row.lr.df;
        ok = ok && lr >= 0.0;
        ok = ok && row.aic_delta == lr - 2.0 * df;
        ok = ok && row.bic_delta == lr - df * lnT;
        const auto& r = find(row.null_k);
        const auto& a = find(row.alt_l);
        const double lr_direct = std::max(0.0, 2.0 * (a.loglik - r.loglik));
        const double scale = 1.0 + std::abs(a.loglik);
        worst = std::max({worst, std::abs(lr - lr_direct) / scale, std::abs(row.aic_delta - (r.ic.aic - a.ic.aic)) / scale,
                          std::abs(row.bic_delta - (r.ic.bic - a.ic.bic)) / scale});
    }
    return ok && worst <= kIdentityTol;
}

void scan_arithmetic() {
    double worst = 0.0;
    bool ok = true;
    int rows = 0;
    FitOptions o;
    o.n_starts = 4;
    o.seed = 3;
    const MultiplicativeVMAR dgps[] = {test::bivariate_cb(3.0), find_design("tri-r3-l3-t500")->dgp};
    for (const auto& dgp : dgps) {
        for (std::uint64_t seed : {21u, 22u}) {
            const auto panel = simulate_vmar(dgp, {400, std::nullopt, seed});
            const auto rep = cb_scan(panel, dgp.order, o);
            ok = scan_identities(rep, worst) && ok;
            rows += static_cast<int>(rep.rows.size());
        }
    }
    report(9, "scan arithmetic", ok, fmt("%d rows, max relative deviation %.1e", rows, worst));
}

void hp_check() {
    double worst = 0.0, recon = 0.0;
    for (int T : {4, 50, 362, 2000}) {
        for (double smoothing : {1.0, 1600.0, 129600.0, 1e8}) {
            std::vector<double> y(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t) y[static_cast<std::size_t>(t)] = -7.0 + 0.3 * t;
            const auto hp = hp_filter(y, smoothing);
            worst = std::max(worst, hp.cycle.cwiseAbs().maxCoeff());
            const Eigen::Map<const Eigen::VectorXd> ym(y.data(), T);
            recon = std::max(recon, (hp.trend + hp.cycle - ym).cwiseAbs().maxCoeff());
        }
    }
    report(10, "HP filter", worst < kHpTol && recon == 0.0, fmt("max |cycle| %.2e, reconstruction %.1e", worst, recon));
}

void pipeline(const std::string& data_dir, int jobs) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto raw = read_panel_csv_file(data_dir + "/synthetic_commodities.csv");
    const auto panel = demean(hp_cycle(log_transform(raw), kDefaultHpSmoothing));
    const auto sel = select_var_order(panel, 4);
    const auto diag = diagnostics(panel, std::max(1, sel.p));
    FitOptions o;
    o.n_starts = 10;
    o.seed = 1;
    o.jobs = jobs;
    const auto grid = fit_order_grid(panel, std::max(1, sel.p), o);
    ModelOrder order = grid.best;
    if (order.s == 0) order = {panel.N(), std::max(1, sel.p - 1), 1};
    const auto rep = cb_scan(panel, order, o);
    double worst = 0.0;
    const bool shaped = raw.T() == 362 && raw.N() == 3 && rep.rows.size() == 3 && rep.rows[0].label == "2 vs 3" &&
                        rep.rows[1].label == "1 vs 3" && rep.rows[2].label == "1 vs 2";
    const bool ok = shaped && scan_identities(rep, worst);
    std::printf("      selected p %d, chosen (r,s) = (%d,%d), JB:", sel.p, grid.best.r, grid.best.s);
    for (const auto& d : diag) std::printf(" %s %.1f", d.name.c_str(), d.jb.stat);
    std::printf("\n      %-8s %9s %9s %9s %9s\n", "", "LR", "BIC", "AIC", "HQC");
    for (const auto& r : rep.rows) {
        std::printf("      %-8s %9.2f %9.2f %9.2f %9.2f%s\n", r.label.c_str(), r.lr.stat, r.bic_delta, r.aic_delta,
                    r.hqc_delta, r.lr.reject ? " *" : "");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(11, "end-to-end pipeline", ok, fmt("362x3 panel, order (%d,%d), %.0f s", order.r, order.s, secs));
}

}  // namespace

int main(int argc, char** argv) {
    const std::string data_dir = argc > 1 ? argv[1] : VMAR_DATA_DIR;
    const int jobs = argc > 2 ? std::max(1, std::atoi(argv[2])) : default_jobs();

    guarded(1, "expansion oracle", expansion_oracle);
    guarded(2, "univariate lag/lead mapping", univariate_mapping);
    guarded(3, "common bubble annihilation", annihilation);
    guarded(4, "degrees of freedom", df_identities);
    guarded(5, "Monte Carlo size, lambda 3", [&] { mc_size(jobs); });
    guarded(6, "Monte Carlo power, lambda 3", [&] { mc_power(jobs); });
    guarded(7, "Monte Carlo size, lambda 1.5", [&] { mc_heavy(jobs); });
    guarded(8, "parameter recovery, T 1000", [&] { recovery(jobs); });
    guarded(9, "scan arithmetic", scan_arithmetic);
    guarded(10, "HP filter", hp_check);
    guarded(11, "end-to-end pipeline", [&] { pipeline(data_dir, jobs); });

    std::printf("%d failing\n", failures);
    return failures == 0 ? 0 : 1;
}
