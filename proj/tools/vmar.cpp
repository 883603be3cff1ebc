// vmar: simulate, estimate and test mixed causal-noncausal VAR models.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "vmar/errors.hpp"
#include "vmar/estimate.hpp"
#include "vmar/inference.hpp"
#include "vmar/montecarlo.hpp"
#include "vmar/panel.hpp"
#include "vmar/parallel.hpp"
#include "vmar/preprocess.hpp"
#include "vmar/serialize.hpp"
#include "vmar/simulate.hpp"

#ifndef VMAR_VERSION
#define VMAR_VERSION "unknown"
#endif

namespace {

using vmar::Json;

enum Exit : int { kOk = 0, kInternal = 1, kInput = 2, kModel = 3, kData = 4, kEstimation = 5 };

std::uint64_t env_seed() {
    if (const char* v = std::getenv("VMAR_SEED")) {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw vmar::InputError(std::string("VMAR_SEED is not an unsigned integer: ") + v);
        }
    }
    return 1;
}

int env_jobs() {
    if (const char* v = std::getenv("VMAR_JOBS")) {
        try {
            return std::max(1, std::stoi(v));
        } catch (const std::exception&) {
            throw vmar::InputError(std::string("VMAR_JOBS is not an integer: ") + v);
        }
    }
    return vmar::default_jobs();
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw vmar::InputError("cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

// Shared state of one invocation: what ran, with which inputs, when.
struct Run {
    std::string command;
    std::vector<std::string> argv;
    Json config = Json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::string started = utc_now();

    // Writes `content` to path (stdout for "" or "-") and a <path>.manifest.json beside it.
    void emit(const std::string& path, const std::string& content) const {
        if (path.empty() || path == "-") {
            std::cout << content;
            std::cout.flush();
            return;
        }
        {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw vmar::InputError("cannot write " + path);
            out << content;
        }
        Json m;
        m["command"] = command;
        m["argv"] = argv;
        m["config"] = config;
        m["seed"] = seed;
        m["version"] = VMAR_VERSION;
        Json digests = Json::object();
        for (const auto& in : inputs) digests[in] = Json{{"sha256", sha256_file(in)}};
        m["inputs"] = std::move(digests);
        m["output"] = Json{{"path", path}, {"sha256", sha256_file(path)}};
        m["started"] = started;
        m["finished"] = utc_now();
        std::ofstream out(path + ".manifest.json");
        if (!out) throw vmar::InputError("cannot write manifest for " + path);
        out << m.dump(2) << '\n';
    }
};

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vmar::InputError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw vmar::InputError(path + ": " + e.what());
    }
}

vmar::ModelOrder parse_order(const std::string& text, int N) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw vmar::InputError("--order expects r,s (e.g. 1,1)");
    try {
        std::size_t pos = 0;
        const int r = std::stoi(text.substr(0, comma), &pos);
        const int s = std::stoi(text.substr(comma + 1));
        vmar::ModelOrder o{N, r, s};
        o.validate();
        return o;
    } catch (const vmar::StructuralError& e) {
        throw vmar::InputError(std::string("--order: ") + e.what());
    } catch (const std::exception&) {
        throw vmar::InputError("--order expects r,s (e.g. 1,1)");
    }
}

struct DataOptions {
    std::string path;
    bool log = false;
    CLI::Option* hp_opt = nullptr;
    std::string hp = std::to_string(static_cast<long>(vmar::kDefaultHpSmoothing));

    void add(CLI::App* cmd) {
        cmd->add_option("--data", path, "CSV panel: time label column, then one column per series")->required();
        cmd->add_flag("--log", log, "Take natural logs before anything else");
        hp_opt = cmd->add_option("--hp", hp, "Replace each series by its HP cycle (optional smoothing, default 129600)")
                     ->expected(0, 1);
    }

    std::optional<double> smoothing() const {
        if (!hp_opt || hp_opt->count() == 0) return std::nullopt;
        if (hp.empty()) return vmar::kDefaultHpSmoothing;
        try {
            return std::stod(hp);
        } catch (const std::exception&) {
            throw vmar::InputError("--hp expects a positive number");
        }
    }

    // Reads the panel, applies log / HP cycle, and removes column means.
    vmar::TimeSeriesPanel load(Run& run, Json& meta) const {
        auto panel = vmar::read_panel_csv_file(path);
        run.inputs.push_back(path);
        if (log) panel = vmar::log_transform(panel);
        const auto hp_value = smoothing();
        if (hp_value) panel = vmar::hp_cycle(panel, *hp_value);
        panel = vmar::demean(panel);
        meta = Json{{"data", path}, {"T", panel.T()}, {"N", panel.N()}, {"series", panel.names}, {"log", log}};
        meta["hp_smoothing"] = hp_value ? Json(*hp_value) : Json(nullptr);
        meta["demeaned"] = true;
        run.config["data"] = path;
        run.config["log"] = log;
        run.config["hp_smoothing"] = meta["hp_smoothing"];
        return panel;
    }
};

struct OrderOptions {
    std::string order;
    int auto_order = 0;

    void add(CLI::App* cmd) {
        auto* o = cmd->add_option("--order", order, "Lags and leads as r,s");
        auto* a = cmd->add_option("--auto-order", auto_order,
                                  "Select p <= p_max by pseudo-causal VAR BIC, then the best r+s=p split")
                      ->check(CLI::PositiveNumber);
        o->excludes(a);
    }
};

struct FitCli {
    int starts = 100;
    std::uint64_t seed = 0;
    int jobs = 1;

    void add(CLI::App* cmd) {
        seed = env_seed();
        jobs = env_jobs();
        cmd->add_option("--starts", starts, "Optimizer starts")->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for random starts (env VMAR_SEED)")->capture_default_str();
        cmd->add_option("--jobs", jobs, "Worker threads (env VMAR_JOBS)")->check(CLI::PositiveNumber);
    }

    vmar::FitOptions options(Run& run) const {
        vmar::FitOptions o;
        o.n_starts = starts;
        o.seed = seed;
        o.jobs = jobs;
        run.seed = seed;
        run.config["starts"] = starts;
        run.config["seed"] = seed;
        run.config["jobs"] = jobs;
        return o;
    }
};

struct OrderChoice {
    vmar::ModelOrder order;
    Json record = Json::object();
};

// Order from --order, or pseudo-causal BIC plus the likelihood grid over r+s=p.
OrderChoice choose_order(const vmar::TimeSeriesPanel& panel, const OrderOptions& oo, const vmar::FitOptions& fo,
                         Run& run, std::optional<vmar::GridResult>* grid_out = nullptr) {
    OrderChoice c;
    if (!oo.order.empty()) {
        c.order = parse_order(oo.order, panel.N());
        run.config["order"] = oo.order;
        return c;
    }
    if (oo.auto_order <= 0) throw vmar::InputError("give --order r,s or --auto-order p_max");
    run.config["auto_order"] = oo.auto_order;
    const auto sel = vmar::select_var_order(panel, oo.auto_order);
    c.record["p_max"] = oo.auto_order;
    c.record["selected_p"] = sel.p;
    c.record["bic"] = sel.bic;
    if (sel.p == 0) throw vmar::ModelInvalidError("pseudo-causal BIC selects p = 0; the panel shows no dynamics");
    Json jb = Json::array();
    for (const auto& d : vmar::diagnostics(panel, sel.p)) {
        jb.push_back(Json{{"series", d.name}, {"jb_stat", d.jb.stat}, {"jb_pvalue", d.jb.pvalue},
                          {"skewness", d.jb.skewness}, {"kurtosis", d.jb.kurtosis}});
    }
    c.record["jarque_bera"] = std::move(jb);
    auto grid = vmar::fit_order_grid(panel, sel.p, fo);
    Json cells = Json::array();
    for (const auto& cell : grid.cells) {
        Json j{{"r", cell.order.r}, {"s", cell.order.s}};
        if (cell.fit) j["loglik"] = cell.fit->loglik;
        else j["error"] = cell.error;
        cells.push_back(std::move(j));
    }
    c.record["grid"] = std::move(cells);
    c.order = grid.best;
    c.record["chosen"] = Json{{"r", grid.best.r}, {"s", grid.best.s}};
    if (grid_out) *grid_out = std::move(grid);
    return c;
}

int cmd_simulate(Run& run, const std::string& model_path, int T, std::optional<int> burn_in, std::uint64_t seed,
                 const std::string& out) {
    const auto model = vmar::model_from_json(read_json_file(model_path));
    run.inputs.push_back(model_path);
    run.seed = seed;
    run.config = Json{{"model", model_path}, {"T", T}, {"seed", seed}};
    run.config["burn_in"] = burn_in ? Json(*burn_in) : Json(nullptr);
    vmar::SimulationConfig cfg;
    cfg.T = T;
    cfg.burn_in = burn_in;
    cfg.seed = seed;
    const auto panel = vmar::simulate_vmar(model, cfg);
    std::ostringstream csv;
    vmar::write_panel_csv(panel, csv);
    run.emit(out, csv.str());
    return kOk;
}

int cmd_estimate(Run& run, const DataOptions& data, const OrderOptions& oo, const FitCli& fc,
                 std::optional<int> restrict_k, const std::string& out) {
    Json meta;
    const auto panel = data.load(run, meta);
    const auto fo = fc.options(run);
    std::optional<vmar::GridResult> grid;
    const auto choice = choose_order(panel, oo, fo, run, &grid);
    if (restrict_k) run.config["restrict"] = *restrict_k;

    vmar::FitResult result;
    if (restrict_k) {
        if (panel.N() < 2) throw vmar::InputError("--restrict needs a panel with at least two series");
        result = vmar::fit(panel, choice.order, restrict_k, fo);
    } else if (grid) {
        result = grid->fit;
    } else {
        result = vmar::fit(panel, choice.order, std::nullopt, fo);
    }
    Json j;
    j["preprocessing"] = meta;
    if (!choice.record.empty()) j["order_selection"] = choice.record;
    j["order"] = Json{{"N", choice.order.N}, {"r", choice.order.r}, {"s", choice.order.s}};
    j["fit"] = vmar::fit_result_to_json(result);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    run.emit(out, j.dump(2) + "\n");
    return kOk;
}

int cmd_test_cb(Run& run, const DataOptions& data, const OrderOptions& oo, const FitCli& fc, double level,
                const std::string& out, const std::string& table) {
    Json meta;
    const auto panel = data.load(run, meta);
    if (panel.N() < 2) throw vmar::DataInsufficientError("common bubbles need N >= 2 series");
    const auto fo = fc.options(run);
    run.config["level"] = level;
    const auto choice = choose_order(panel, oo, fo, run);
    if (choice.order.s < 1) {
        throw vmar::ModelInvalidError("order has no leads; there is no noncausal component to test");
    }
    const auto report = vmar::cb_scan(panel, choice.order, fo, level);
    Json j;
    j["preprocessing"] = meta;
    if (!choice.record.empty()) j["order_selection"] = choice.record;
    j["report"] = vmar::report_to_json(report);
    std::ostringstream csv;
    vmar::report_to_csv(report, csv);
    if (!table.empty()) run.emit(table, csv.str());
    else std::cerr << csv.str();
    run.emit(out, j.dump(2) + "\n");
    return kOk;
}

std::string design_names() {
    std::string s;
    for (const auto& d : vmar::builtin_designs(1)) s += "  " + d.name + "\n";
    return s;
}

int cmd_montecarlo(Run& run, const std::string& design, std::optional<int> reps, std::optional<std::uint64_t> seed,
                   int jobs, bool records, const std::string& out, const std::string& table) {
    vmar::McConfig cfg;
    if (std::filesystem::is_regular_file(design)) {
        cfg = vmar::mc_config_from_json(read_json_file(design));
        run.inputs.push_back(design);
    } else if (auto found = vmar::find_design(design)) {
        cfg = std::move(*found);
    } else {
        std::cerr << "error: unknown design '" << design << "'. Built-in designs:\n" << design_names();
        return kInput;
    }
    if (reps) cfg.n_reps = *reps;
    if (seed) cfg.base_seed = *seed;
    cfg.jobs = jobs;
    cfg.validate();
    run.seed = cfg.base_seed;
    run.config = Json{{"design", design}, {"n_reps", cfg.n_reps}, {"base_seed", cfg.base_seed}, {"jobs", jobs},
                      {"T", cfg.T}, {"level", cfg.level}, {"tests", cfg.tests}};
    run.config["dgp"] = vmar::model_to_json(cfg.dgp);
    run.config["true_k"] = cfg.true_k ? Json(*cfg.true_k) : Json(nullptr);

    const auto result = vmar::run(cfg);
    std::ostringstream csv;
    vmar::mc_result_to_csv(result, csv);
    if (!table.empty()) run.emit(table, csv.str());
    else std::cerr << csv.str();
    auto j = vmar::mc_result_to_json(result, records || cfg.n_reps == 1);
    // Wall-clock time varies between runs; keep it in the manifest so the result stays reproducible.
    run.config["wall_seconds"] = j["wall_seconds"];
    j.erase("wall_seconds");
    run.emit(out, j.dump(2) + "\n");
    return kOk;
}

int cmd_detrend(Run& run, const DataOptions& data, const std::string& out, const std::string& trend_out) {
    auto panel = vmar::read_panel_csv_file(data.path);
    run.inputs.push_back(data.path);
    if (data.log) panel = vmar::log_transform(panel);
    const double smoothing = data.smoothing().value_or(vmar::kDefaultHpSmoothing);
    run.config = Json{{"data", data.path}, {"log", data.log}, {"hp_smoothing", smoothing}};
    std::ostringstream cycle;
    vmar::write_panel_csv(vmar::hp_cycle(panel, smoothing), cycle);
    if (!trend_out.empty()) {
        std::ostringstream trend;
        vmar::write_panel_csv(vmar::hp_trend(panel, smoothing), trend);
        run.emit(trend_out, trend.str());
    }
    run.emit(out, cycle.str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    Run run;
    run.argv.assign(argv, argv + argc);

    try {
        CLI::App app{"Mixed causal-noncausal VAR models and common-bubble tests"};
        app.set_version_flag("--version", VMAR_VERSION);
        app.require_subcommand(1);

        auto* sim = app.add_subcommand("simulate", "Simulate a panel from a model JSON");
        std::string model_path, sim_out;
        int T = 500;
        std::optional<int> burn_in;
        std::uint64_t sim_seed = env_seed();
        sim->add_option("--model", model_path, "Model JSON")->required();
        sim->add_option("--T", T, "Observations")->capture_default_str();
        sim->add_option("--burn-in", burn_in, "Discarded points on each side")->check(CLI::NonNegativeNumber);
        sim->add_option("--seed", sim_seed, "Random seed (env VMAR_SEED)")->capture_default_str();
        sim->add_option("--out", sim_out, "Output CSV (default stdout)");

        auto* est = app.add_subcommand("estimate", "Fit a VMAR model by Student-t maximum likelihood");
        DataOptions est_data;
        OrderOptions est_order;
        FitCli est_fit;
        std::optional<int> restrict_k;
        std::string est_out;
        est_data.add(est);
        est_order.add(est);
        est_fit.add(est);
        est->add_option("--restrict", restrict_k, "Rank deficit k of the lead matrices");
        est->add_option("--out", est_out, "Output JSON (default stdout)");

        auto* cb = app.add_subcommand("test-cb", "Common-bubble rank scan with LR tests and information criteria");
        DataOptions cb_data;
        OrderOptions cb_order;
        FitCli cb_fit;
        double level = vmar::kDefaultLevel;
        std::string cb_out, cb_table;
        cb_data.add(cb);
        cb_order.add(cb);
        cb_fit.add(cb);
        cb->add_option("--level", level, "Test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
        cb->add_option("--out", cb_out, "Report JSON (default stdout)");
        cb->add_option("--table", cb_table, "Report CSV (default stderr)");

        auto* mc = app.add_subcommand("montecarlo", "Detection frequencies over simulated replications");
        std::string design, mc_out, mc_table;
        std::optional<int> reps;
        std::optional<std::uint64_t> mc_seed;
        int mc_jobs = env_jobs();
        bool records = false;
        mc->add_option("--design", design, "Built-in design name or JSON config file")->required();
        mc->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
        mc->add_option("--seed", mc_seed, "Base seed; replication i uses seed + i");
        mc->add_option("--jobs", mc_jobs, "Worker threads (env VMAR_JOBS)")->check(CLI::PositiveNumber);
        mc->add_flag("--records", records, "Include per-replication records");
        mc->add_option("--out", mc_out, "Result JSON (default stdout)");
        mc->add_option("--table", mc_table, "Frequency table CSV (default stderr)");

        auto* designs = app.add_subcommand("designs", "List built-in Monte Carlo designs");

        auto* det = app.add_subcommand("detrend", "HP cycle (and trend) of every series");
        DataOptions det_data;
        std::string det_out, det_trend;
        det_data.add(det);
        det->add_option("--out", det_out, "Cycle CSV (default stdout)");
        det->add_option("--trend", det_trend, "Trend CSV");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? kOk : kInput;
        }

        if (sim->parsed()) {
            run.command = "simulate";
            return cmd_simulate(run, model_path, T, burn_in, sim_seed, sim_out);
        }
        if (est->parsed()) {
            run.command = "estimate";
            return cmd_estimate(run, est_data, est_order, est_fit, restrict_k, est_out);
        }
        if (cb->parsed()) {
            run.command = "test-cb";
            return cmd_test_cb(run, cb_data, cb_order, cb_fit, level, cb_out, cb_table);
        }
        if (mc->parsed()) {
            run.command = "montecarlo";
            return cmd_montecarlo(run, design, reps, mc_seed, mc_jobs, records, mc_out, mc_table);
        }
        if (designs->parsed()) {
            std::cout << design_names();
            return kOk;
        }
        if (det->parsed()) {
            run.command = "detrend";
            return cmd_detrend(run, det_data, det_out, det_trend);
        }
        return kInput;
    } catch (const vmar::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const vmar::StructuralError& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kInput;
    } catch (const vmar::ModelInvalidError& e) {
        std::cerr << "invalid model: " << e.what() << '\n';
        return kModel;
    } catch (const vmar::DataInsufficientError& e) {
        std::cerr << "insufficient data: " << e.what() << '\n';
        return kData;
    } catch (const vmar::EstimationError& e) {
        std::cerr << "estimation failed: " << e.what() << '\n';
        return kEstimation;
    } catch (const vmar::DegenerateError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kEstimation;
    } catch (const Json::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}
