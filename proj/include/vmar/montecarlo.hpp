#pragma once

// Replication studies of common-bubble detection frequencies.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vmar/estimate.hpp"
#include "vmar/inference.hpp"
#include "vmar/model.hpp"

namespace vmar {

struct McConfig {
    std::string name;
    MultiplicativeVMAR dgp;
    std::optional<int> true_k;   // rank deficit of the DGP leads; empty = no common bubble
    int T = 500;
    int n_reps = 300;
    std::vector<int> tests;      // rank deficits k tested against full rank
    double level = kDefaultLevel;
    std::uint64_t base_seed = 1;
    std::optional<int> burn_in;
    FitOptions fit_opts;         // start mode TrueValues by default (see default_mc_fit_options)
    int jobs = 1;

    void validate() const;
};

/// One start from the true parameters, no random starts.
FitOptions default_mc_fit_options();

struct McTestResult {
    int k = 0;
    std::string label;
    int n = 0;  // successful replications
    double lr = 0.0, bic = 0.0, aic = 0.0, hqc = 0.0;            // frequency of correct decisions
    double se_lr = 0.0, se_bic = 0.0, se_aic = 0.0, se_hqc = 0.0;  // binomial standard errors
};

struct McReplication {
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    bool converged = true;
    std::string error;
    std::vector<double> lr_stats;         // per test
    std::vector<unsigned char> correct;   // per test, bit 0 LR, 1 BIC, 2 AIC, 3 HQC
};

struct McResult {
    std::string name;
    int n_reps = 0;
    int failures = 0;
    int nonconverged = 0;
    double wall_seconds = 0.0;
    std::vector<McTestResult> tests;
    std::vector<McReplication> replications;
};

/// Simulates, fits restricted and unrestricted models, and tallies correct
/// decisions. Replication i uses seed base_seed + i, so the outcome does not
/// depend on jobs or execution order. Failed replications are counted, not fatal.
McResult run(const McConfig& config);

/// Replication i on its own (used by run()).
McReplication run_replication(const McConfig& config, int index);

/// Tally of replication records in the order given.
McResult tally(const McConfig& config, const std::vector<McReplication>& reps);

/// Bivariate (H0/H1) and trivariate (rank 1, 2, 3) designs for lambda in
/// {3, 1.5} and T in {500, 1000}. Names look like "biv-h0-l3-t500" or
/// "tri-r1-l1.5-t1000".
std::vector<McConfig> builtin_designs(int n_reps = 300);

std::optional<McConfig> find_design(const std::string& name, int n_reps = 300);

}  // namespace vmar
