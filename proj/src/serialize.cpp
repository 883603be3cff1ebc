#include "vmar/serialize.hpp"

#include <iomanip>
#include <ostream>

#include "vmar/errors.hpp"

namespace vmar {

namespace {

Json matrices_to_json(const MatrixList& ms) {
    Json arr = Json::array();
    for (const auto& m : ms) arr.push_back(matrix_to_json(m));
    return arr;
}

MatrixList matrices_from_json(const Json& j, const char* field) {
    if (!j.is_array()) throw InputError(std::string("field '") + field + "' must be a list of matrices");
    MatrixList out;
    for (const auto& m : j) out.push_back(matrix_from_json(m));
    return out;
}

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    return j.at(key);
}

int require_int(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number_integer()) throw InputError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

double require_number(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number()) throw InputError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

Json test_to_json(const LrTest& t) {
    return Json{{"stat", t.stat}, {"df", t.df}, {"pvalue", t.pvalue}, {"critical", t.critical}, {"reject", t.reject}};
}

Json ic_to_json(const InfoCriteria& ic) {
    return Json{{"K", ic.K}, {"bic", ic.bic}, {"aic", ic.aic}, {"hqc", ic.hqc}};
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty()) throw InputError("matrix must be a non-empty array of rows");
    // A flat list of numbers is read as a single row.
    if (j.front().is_number()) {
        Matrix m(1, static_cast<Eigen::Index>(j.size()));
        for (std::size_t c = 0; c < j.size(); ++c) {
            if (!j[c].is_number()) throw InputError("matrix entries must be numbers");
            m(0, static_cast<Eigen::Index>(c)) = j[c].get<double>();
        }
        return m;
    }
    const auto rows = j.size();
    const auto cols = j.front().size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw InputError("matrix rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw InputError("matrix entries must be numbers");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Json model_to_json(const MultiplicativeVMAR& model) {
    return Json{{"N", model.order.N},
                {"r", model.order.r},
                {"s", model.order.s},
                {"phi", matrices_to_json(model.phi)},
                {"psi", matrices_to_json(model.psi)},
                {"sigma", matrix_to_json(model.sigma)},
                {"lambda", model.lambda},
                {"representation", model.representation == Representation::LeadFirst ? "lead_first" : "lag_first"}};
}

MultiplicativeVMAR model_from_json(const Json& j) {
    MultiplicativeVMAR m;
    m.order = ModelOrder{require_int(j, "N"), require_int(j, "r"), require_int(j, "s")};
    m.phi = matrices_from_json(require(j, "phi"), "phi");
    m.psi = matrices_from_json(require(j, "psi"), "psi");
    m.sigma = matrix_from_json(require(j, "sigma"));
    m.lambda = require_number(j, "lambda");
    if (j.contains("representation")) {
        const auto rep = j.at("representation").get<std::string>();
        if (rep == "lead_first") m.representation = Representation::LeadFirst;
        else if (rep == "lag_first") m.representation = Representation::LagFirst;
        else throw InputError("representation must be 'lead_first' or 'lag_first'");
    }
    try {
        m.validate();
    } catch (const StructuralError& e) {
        throw InputError(std::string("invalid model: ") + e.what());
    }
    return m;
}

Json additive_to_json(const AdditiveVMAR& a) {
    return Json{{"b_lag", matrices_to_json(a.b_lag)},
                {"b_lead", matrices_to_json(a.b_lead)},
                {"omega", matrix_to_json(a.omega)},
                {"lambda", a.lambda}};
}

Json restriction_to_json(const ReducedRankLeads& rr) {
    return Json{{"k", rr.k},
                {"delta_star", matrix_to_json(rr.delta_star)},
                {"delta", matrix_to_json(rr.delta())},
                {"delta_perp", matrix_to_json(rr.delta_perp())},
                {"gammas", matrices_to_json(rr.gammas)}};
}

Json fit_result_to_json(const FitResult& fit) {
    Json j;
    j["order"] = Json{{"N", fit.model.order.N}, {"r", fit.model.order.r}, {"s", fit.model.order.s}};
    j["loglik"] = fit.loglik;
    j["converged"] = fit.converged;
    j["T"] = fit.T;
    j["n_effective"] = fit.n_effective;
    j["start_index"] = fit.start_index;
    j["multiplicative"] = model_to_json(fit.model);
    try {
        j["additive"] = additive_to_json(to_additive(fit.model));
    } catch (const DegenerateError& e) {
        j["additive"] = nullptr;
        j["additive_error"] = e.what();
    }
    j["restriction"] = fit.restriction ? restriction_to_json(*fit.restriction) : Json(nullptr);
    const auto rep = check_stationarity(fit.model);
    j["stationarity"] = Json{{"stationary", rep.stationary}, {"lag_radius", rep.lag_radius}, {"lead_radius", rep.lead_radius}};
    j["information_criteria"] = ic_to_json(info_criteria(fit));
    Json starts = Json::array();
    for (const auto& s : fit.starts) {
        Json d{{"index", s.index}, {"origin", s.origin}, {"converged", s.converged}, {"evaluations", s.evaluations}};
        d["loglik"] = std::isfinite(s.loglik) ? Json(s.loglik) : Json(nullptr);
        if (!s.error.empty()) d["error"] = s.error;
        starts.push_back(std::move(d));
    }
    j["starts"] = std::move(starts);
    j["warnings"] = fit.warnings;
    return j;
}

Json report_to_json(const CBTestReport& report) {
    Json j;
    j["order"] = Json{{"N", report.order.N}, {"r", report.order.r}, {"s", report.order.s}};
    j["T"] = report.T;
    j["level"] = report.level;
    Json fits = Json::array();
    for (const auto& f : report.fits) {
        Json d;
        d["rank_deficit"] = f.k ? Json(*f.k) : Json(nullptr);
        d["lead_rank"] = report.order.N - f.k.value_or(0);
        d["ok"] = f.ok;
        if (f.ok) {
            d["loglik"] = f.loglik;
            d["information_criteria"] = ic_to_json(f.ic);
            d["converged"] = f.converged;
            d["start_index"] = f.start_index;
        } else {
            d["error"] = f.error;
        }
        fits.push_back(std::move(d));
    }
    j["fits"] = std::move(fits);
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json d{{"rank_test", r.label}, {"null_rank_deficit", r.null_k}};
        d["alt_rank_deficit"] = r.alt_l ? Json(*r.alt_l) : Json("full");
        d["ok"] = r.ok;
        if (r.ok) {
            d["lr"] = test_to_json(r.lr);
            d["bic_delta"] = r.bic_delta;
            d["aic_delta"] = r.aic_delta;
            d["hqc_delta"] = r.hqc_delta;
        } else {
            d["error"] = r.error;
        }
        rows.push_back(std::move(d));
    }
    j["comparisons"] = std::move(rows);
    Json models;
    if (report.unrestricted) models["unrestricted"] = fit_result_to_json(*report.unrestricted);
    for (std::size_t i = 0; i < report.restricted.size(); ++i) {
        if (report.restricted[i]) models["rank_deficit_" + std::to_string(i + 1)] = fit_result_to_json(*report.restricted[i]);
    }
    j["models"] = std::move(models);
    return j;
}

void report_to_csv(const CBTestReport& report, std::ostream& out) {
    out << "rank_test,lr,bic,aic,hqc,df,pvalue,critical,reject\n";
    out << std::setprecision(10);
    for (const auto& r : report.rows) {
        out << r.label << ',';
        if (r.ok) {
            out << r.lr.stat << ',' << r.bic_delta << ',' << r.aic_delta << ',' << r.hqc_delta << ',' << r.lr.df
                << ',' << r.lr.pvalue << ',' << r.lr.critical << ',' << (r.lr.reject ? "true" : "false") << '\n';
        } else {
            out << "NA,NA,NA,NA,NA,NA,NA,NA\n";
        }
    }
}

Json mc_result_to_json(const McResult& result, bool include_replications) {
    Json j;
    j["design"] = result.name;
    j["n_reps"] = result.n_reps;
    j["failures"] = result.failures;
    j["nonconverged"] = result.nonconverged;
    j["wall_seconds"] = result.wall_seconds;
    Json tests = Json::array();
    for (const auto& t : result.tests) {
        tests.push_back(Json{{"rank_test", t.label},
                             {"rank_deficit", t.k},
                             {"n", t.n},
                             {"frequency", Json{{"lr", t.lr}, {"bic", t.bic}, {"aic", t.aic}, {"hqc", t.hqc}}},
                             {"std_error", Json{{"lr", t.se_lr}, {"bic", t.se_bic}, {"aic", t.se_aic}, {"hqc", t.se_hqc}}}});
    }
    j["tests"] = std::move(tests);
    if (include_replications) {
        Json reps = Json::array();
        for (const auto& r : result.replications) {
            Json d{{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}, {"converged", r.converged}};
            if (!r.ok) d["error"] = r.error;
            d["lr_stats"] = r.lr_stats;
            Json decisions = Json::array();
            for (unsigned char c : r.correct) {
                decisions.push_back(Json{{"lr", (c & 1u) != 0}, {"bic", (c & 2u) != 0}, {"aic", (c & 4u) != 0}, {"hqc", (c & 8u) != 0}});
            }
            d["correct"] = std::move(decisions);
            reps.push_back(std::move(d));
        }
        j["replications"] = std::move(reps);
    }
    return j;
}

void mc_result_to_csv(const McResult& result, std::ostream& out, bool header) {
    if (header) out << "design,rank_test,n,failures,lr,bic,aic,hqc,se_lr,se_bic,se_aic,se_hqc\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& t : result.tests) {
        out << result.name << ',' << t.label << ',' << t.n << ',' << result.failures << ',' << t.lr << ',' << t.bic
            << ',' << t.aic << ',' << t.hqc << ',' << t.se_lr << ',' << t.se_bic << ',' << t.se_aic << ','
            << t.se_hqc << '\n';
    }
    out.unsetf(std::ios::floatfield);
}

McConfig mc_config_from_json(const Json& j) {
    McConfig c;
    c.name = j.value("name", std::string("custom"));
    c.dgp = model_from_json(require(j, "dgp"));
    if (j.contains("true_k") && !j.at("true_k").is_null()) c.true_k = j.at("true_k").get<int>();
    c.T = require_int(j, "T");
    c.n_reps = j.value("n_reps", 300);
    for (const auto& k : require(j, "tests")) {
        if (!k.is_number_integer()) throw InputError("tests must be a list of rank deficits");
        c.tests.push_back(k.get<int>());
    }
    c.level = j.value("level", kDefaultLevel);
    c.base_seed = j.value("base_seed", std::uint64_t{1});
    if (j.contains("burn_in") && !j.at("burn_in").is_null()) c.burn_in = j.at("burn_in").get<int>();
    c.fit_opts = default_mc_fit_options();
    const auto mode = j.value("start_mode", std::string("true_values"));
    if (mode == "random") {
        c.fit_opts.start_mode = StartMode::Random;
        c.fit_opts.n_starts = j.value("n_starts", 10);
    } else if (mode != "true_values") {
        throw InputError("start_mode must be 'true_values' or 'random'");
    }
    try {
        c.validate();
    } catch (const StructuralError& e) {
        throw InputError(std::string("invalid Monte Carlo config: ") + e.what());
    }
    return c;
}

}  // namespace vmar
