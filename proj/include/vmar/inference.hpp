#pragma once

// Common-bubble tests: likelihood ratio, information criteria, rank scan.

#include <optional>
#include <string>
#include <vector>

#include "vmar/estimate.hpp"

namespace vmar {

inline constexpr double kDefaultLevel = 0.95;

struct LrTest {
    double stat = 0.0;
    int df = 0;
    double pvalue = 1.0;
    double critical = 0.0;  // chi2 quantile at the test level
    bool reject = false;
};

/// Restricted (rank deficit k) against unrestricted, df = rho(N, k, s).
/// Tiny negative statistics from rounding are clamped to zero; anything
/// larger throws InternalError.
LrTest lr_test(const FitResult& restricted, const FitResult& unrestricted, double level = kDefaultLevel);

/// Rank deficit k against the weaker deficit l < k, df = rho_nested(N, k, l, s).
LrTest lr_test_nested(const FitResult& more_restricted, const FitResult& less_restricted,
                      double level = kDefaultLevel);

struct InfoCriteria {
    int K = 0;  // lag and lead coefficients only
    double bic = 0.0;
    double aic = 0.0;
    double hqc = 0.0;
};

/// BIC = K ln T - 2 lnL, AIC = 2K - 2 lnL, HQC = 2K ln ln T - 2 lnL with T the panel length.
InfoCriteria info_criteria(double loglik, int K, int T);
InfoCriteria info_criteria(const FitResult& fit);

struct CBComparison {
    int null_k = 0;                 // rank deficit under the null
    std::optional<int> alt_l;       // empty = full rank alternative
    std::string label;              // "<rank under null> vs <rank under alternative>"
    bool ok = false;
    std::string error;
    LrTest lr;
    double bic_delta = 0.0;  // restricted minus unrestricted
    double aic_delta = 0.0;
    double hqc_delta = 0.0;
};

struct CBFitSummary {
    std::optional<int> k;  // empty = unrestricted
    bool ok = false;
    std::string error;
    double loglik = 0.0;
    int K = 0;
    InfoCriteria ic;
    bool converged = false;
    int start_index = 0;
};

struct CBTestReport {
    ModelOrder order;
    int T = 0;
    double level = kDefaultLevel;
    std::vector<CBFitSummary> fits;     // k = N-1..1 then unrestricted
    std::vector<CBComparison> rows;     // k vs full for k = 1..N-1, then nested pairs
    std::optional<FitResult> unrestricted;
    std::vector<std::optional<FitResult>> restricted;  // index k-1
};

/// Row for a restricted fit against a weaker restriction or the unrestricted fit.
CBComparison compare(const FitResult& restricted, const FitResult& alternative, double level = kDefaultLevel);

/// Rank label of a comparison, e.g. k=1 vs full at N=3 gives "2 vs 3".
std::string rank_label(int N, int null_k, std::optional<int> alt_l);

/// Fits rank deficits k = N-1 down to 1, each seeded with the more
/// restricted optima, then the unrestricted model seeded with all of them,
/// so log-likelihoods are ordered by restriction strength.
CBTestReport cb_scan(const TimeSeriesPanel& panel, const ModelOrder& order, const FitOptions& opts,
                     double level = kDefaultLevel);

}  // namespace vmar
