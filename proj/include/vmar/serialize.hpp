#pragma once

// JSON and CSV encodings of models, fits, reports and Monte Carlo results.
// Matrices are arrays of rows.

#include <iosfwd>

#include <json.hpp>

#include "vmar/estimate.hpp"
#include "vmar/inference.hpp"
#include "vmar/montecarlo.hpp"
#include "vmar/preprocess.hpp"

namespace vmar {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);
/// Throws InputError when rows are ragged or entries are not numbers.
Matrix matrix_from_json(const Json& j);

/// Fields N, r, s, phi, psi, sigma, lambda, representation ("lead_first" | "lag_first").
Json model_to_json(const MultiplicativeVMAR& model);
/// Throws InputError on missing fields or inconsistent shapes.
MultiplicativeVMAR model_from_json(const Json& j);

Json additive_to_json(const AdditiveVMAR& additive);
Json restriction_to_json(const ReducedRankLeads& rr);

/// Multiplicative and additive coefficients side by side, plus diagnostics.
Json fit_result_to_json(const FitResult& fit);

Json report_to_json(const CBTestReport& report);
/// Columns: rank_test, lr, bic, aic, hqc, df, pvalue, critical, reject.
void report_to_csv(const CBTestReport& report, std::ostream& out);

Json mc_result_to_json(const McResult& result, bool include_replications = false);
/// One row per test: design, rank_test, n, failures, then LR/BIC/AIC/HQC frequencies and standard errors.
void mc_result_to_csv(const McResult& result, std::ostream& out, bool header = true);

/// {"name", "dgp": model, "true_k": int|null, "T", "n_reps", "tests": [k...],
///  "level", "base_seed", "burn_in", "start_mode": "true_values"|"random", "n_starts"}
McConfig mc_config_from_json(const Json& j);

}  // namespace vmar
