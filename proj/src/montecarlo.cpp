#include "vmar/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vmar/errors.hpp"
#include "vmar/parallel.hpp"
#include "vmar/simulate.hpp"

namespace vmar {

namespace {

Matrix mat(int rows, int cols, std::initializer_list<double> v) {
    Matrix m(rows, cols);
    auto it = v.begin();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = *it++;
    return m;
}

std::string lambda_tag(double lambda) {
    return lambda == 1.5 ? "1.5" : std::to_string(static_cast<int>(lambda));
}

double binomial_se(double f, int n) { return n > 0 ? std::sqrt(f * (1.0 - f) / n) : 0.0; }

}  // namespace

void McConfig::validate() const {
    dgp.validate();
    if (n_reps < 1) throw StructuralError("n_reps must be >= 1");
    if (!check_stationarity(dgp).stationary) throw ModelInvalidError("Monte Carlo DGP is not stationary");
    if (tests.empty()) throw StructuralError("at least one rank test is required");
    for (int k : tests) {
        if (k <= 0 || k >= dgp.order.N) throw StructuralError("tested rank deficit out of range");
    }
    if (true_k && (*true_k <= 0 || *true_k >= dgp.order.N)) throw StructuralError("true rank deficit out of range");
}

FitOptions default_mc_fit_options() {
    FitOptions o;
    o.n_starts = 1;
    o.start_mode = StartMode::TrueValues;
    return o;
}

McReplication run_replication(const McConfig& config, int index) {
    McReplication rec;
    rec.index = index;
    rec.seed = config.base_seed + static_cast<std::uint64_t>(index);
    try {
        const TimeSeriesPanel panel = simulate_vmar(config.dgp, {config.T, config.burn_in, rec.seed});
        const ModelOrder& order = config.dgp.order;

        FitOptions fo = config.fit_opts;
        fo.seed = rec.seed;
        fo.jobs = 1;
        if (fo.start_mode != StartMode::Random) fo.initial = config.dgp;

        std::vector<int> ks = config.tests;
        std::sort(ks.begin(), ks.end(), std::greater<>());
        std::vector<std::pair<int, FitResult>> restricted;
        std::vector<MultiplicativeVMAR> seeds;
        for (int k : ks) {
            FitOptions rfo = fo;
            rfo.extra_starts = seeds;
            FitResult f = fit(panel, order, k, rfo);
            rec.converged = rec.converged && f.converged;
            seeds.push_back(f.model);
            restricted.emplace_back(k, std::move(f));
        }
        FitOptions ufo = fo;
        ufo.extra_starts = seeds;
        const FitResult unrestricted = fit(panel, order, std::nullopt, ufo);
        rec.converged = rec.converged && unrestricted.converged;

        for (int k : config.tests) {
            const auto it = std::find_if(restricted.begin(), restricted.end(), [&](const auto& p) { return p.first == k; });
            const CBComparison row = compare(it->second, unrestricted, config.level);
            // The null "leads have rank <= N - k" holds when the DGP deficit is at least k.
            const bool null_true = config.true_k && *config.true_k >= k;
            auto correct = [&](bool detects_cb) { return detects_cb == null_true; };
            unsigned char bits = 0;
            if (correct(!row.lr.reject)) bits |= 1u;
            if (correct(row.bic_delta < 0.0)) bits |= 2u;
            if (correct(row.aic_delta < 0.0)) bits |= 4u;
            if (correct(row.hqc_delta < 0.0)) bits |= 8u;
            rec.lr_stats.push_back(row.lr.stat);
            rec.correct.push_back(bits);
        }
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        rec.lr_stats.clear();
        rec.correct.clear();
    }
    return rec;
}

McResult tally(const McConfig& config, const std::vector<McReplication>& reps) {
    McResult res;
    res.name = config.name;
    res.n_reps = static_cast<int>(reps.size());
    const int N = config.dgp.order.N;
    for (std::size_t t = 0; t < config.tests.size(); ++t) {
        McTestResult tr;
        tr.k = config.tests[t];
        tr.label = rank_label(N, tr.k, std::nullopt);
        int c[4] = {0, 0, 0, 0};
        for (const auto& r : reps) {
            if (!r.ok) continue;
            ++tr.n;
            for (int b = 0; b < 4; ++b)
                if (r.correct[t] & (1u << b)) ++c[b];
        }
        const double n = std::max(1, tr.n);
        tr.lr = c[0] / n;
        tr.bic = c[1] / n;
        tr.aic = c[2] / n;
        tr.hqc = c[3] / n;
        tr.se_lr = binomial_se(tr.lr, tr.n);
        tr.se_bic = binomial_se(tr.bic, tr.n);
        tr.se_aic = binomial_se(tr.aic, tr.n);
        tr.se_hqc = binomial_se(tr.hqc, tr.n);
        res.tests.push_back(tr);
    }
    for (const auto& r : reps) {
        if (!r.ok) ++res.failures;
        else if (!r.converged) ++res.nonconverged;
    }
    res.replications = reps;
    return res;
}

McResult run(const McConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<McReplication> reps(static_cast<std::size_t>(config.n_reps));
    parallel_for(config.n_reps, config.jobs,
                 [&](int i) { reps[static_cast<std::size_t>(i)] = run_replication(config, i); });
    McResult res = tally(config, reps);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<McConfig> builtin_designs(int n_reps) {
    std::vector<McConfig> out;
    const double lambdas[] = {3.0, 1.5};
    const int lengths[] = {500, 1000};

    const Matrix phi2 = mat(2, 2, {0.5, 0.1, 0.2, 0.3});
    const Matrix sigma2 = mat(2, 2, {4.0, 0.5, 0.5, 1.0});
    const Matrix psi2_cb = mat(2, 1, {1.0, 2.0}) * mat(1, 2, {0.3, 0.25});
    const Matrix psi2_full = mat(2, 2, {0.1, 0.4, 0.6, 0.5});

    const Matrix phi3 = mat(3, 3, {0.5, 0.1, 0.2, 0.2, 0.3, 0.1, 0.1, 0.4, 0.6});
    const Matrix sigma3 = mat(3, 3, {2.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 4.0});
    const Matrix psi3_rank2 = mat(3, 2, {1.0, 0.0, 0.0, 1.0, 2.0, 0.5}) * mat(2, 3, {0.3, 0.1, 0.1, 0.2, 0.3, 0.4});
    const Matrix psi3_rank1 = mat(3, 1, {1.0, 2.0, 0.5}) * mat(1, 3, {0.15, 0.25, 0.4});
    const Matrix psi3_full = mat(3, 3, {0.3, 0.2, 0.1, 0.2, 0.5, 0.4, 0.7, 0.125, 0.2});

    auto add = [&](std::string prefix, const Matrix& phi, const Matrix& psi, const Matrix& sigma,
                   std::optional<int> true_k, std::vector<int> tests) {
        for (double lambda : lambdas) {
            for (int T : lengths) {
                McConfig c;
                c.name = prefix + "-l" + lambda_tag(lambda) + "-t" + std::to_string(T);
                c.dgp = make_model({static_cast<int>(phi.rows()), 1, 1}, {phi}, {psi}, sigma, lambda);
                c.true_k = true_k;
                c.T = T;
                c.n_reps = n_reps;
                c.tests = tests;
                c.fit_opts = default_mc_fit_options();
                out.push_back(std::move(c));
            }
        }
    };
    add("biv-h0", phi2, psi2_cb, sigma2, 1, {1});
    add("biv-h1", phi2, psi2_full, sigma2, std::nullopt, {1});
    add("tri-r2", phi3, psi3_rank2, sigma3, 1, {1});
    add("tri-r1", phi3, psi3_rank1, sigma3, 2, {2});
    add("tri-r3", phi3, psi3_full, sigma3, std::nullopt, {1, 2});
    return out;
}

std::optional<McConfig> find_design(const std::string& name, int n_reps) {
    for (auto& c : builtin_designs(n_reps))
        if (c.name == name) return c;
    return std::nullopt;
}

}  // namespace vmar
