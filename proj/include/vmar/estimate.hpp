#pragma once

// Approximate (conditional) Student-t maximum likelihood for lead-first VMAR
// models, unrestricted or with reduced-rank leads, using multi-start local
// optimization.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmar/model.hpp"
#include "vmar/panel.hpp"

namespace vmar {

inline constexpr double kLambdaFloor = 0.1;
inline constexpr double kLambdaStart = 4.0;

enum class StartMode { Random, Provided, TrueValues };

struct FitOptions {
    int n_starts = 100;
    std::uint64_t seed = 0;
    int max_iter = 5000;
    double tol = 1e-8;
    StartMode start_mode = StartMode::Random;
    /// Start 0 for Provided/TrueValues. For restricted fits the leads are
    /// projected onto the rank constraint.
    std::optional<MultiplicativeVMAR> initial;
    /// Additional starts tried before the random ones (e.g. a more restricted
    /// optimum, which guarantees nested likelihood ordering).
    std::vector<MultiplicativeVMAR> extra_starts;
    int jobs = 1;
};

struct StartDiagnostics {
    int index = 0;
    std::string origin;  // "initial", "extra", "random"
    double loglik = 0.0;
    bool converged = false;
    int evaluations = 0;
    std::string error;
};

struct FitResult {
    MultiplicativeVMAR model;
    std::optional<ReducedRankLeads> restriction;
    double loglik = 0.0;
    bool converged = false;
    int n_effective = 0;  // T - r - s
    int T = 0;
    int start_index = 0;
    std::vector<StartDiagnostics> starts;
    std::vector<std::string> warnings;
};

/// Sum over t = r+1..T-s of the t log-density of eps_t = A(L) Y_t.
double loglik(const TimeSeriesPanel& panel, const MultiplicativeVMAR& model);

/// Maps model parameters to an unconstrained vector: coefficients raw
/// (row-major), sigma through its lower Cholesky factor with log diagonal,
/// lambda through log(lambda - 0.1). The restricted layout replaces the leads
/// by delta_star followed by the Gamma' blocks.
class ParamLayout {
public:
    explicit ParamLayout(ModelOrder order, std::optional<int> k = std::nullopt);

    [[nodiscard]] const ModelOrder& order() const { return order_; }
    [[nodiscard]] std::optional<int> rank_deficit() const { return k_; }
    [[nodiscard]] int coefficient_size() const;
    [[nodiscard]] int size() const;

    [[nodiscard]] Vector pack(const MultiplicativeVMAR& model) const;  // unrestricted layout only
    [[nodiscard]] Vector pack(const MatrixList& phi, const ReducedRankLeads& leads, const Matrix& sigma,
                              double lambda) const;

    struct Unpacked {
        MultiplicativeVMAR model;
        std::optional<ReducedRankLeads> restriction;
    };
    [[nodiscard]] Unpacked unpack(const Vector& x) const;

private:
    ModelOrder order_;
    std::optional<int> k_;
};

FitResult fit(const TimeSeriesPanel& panel, const ModelOrder& order, std::optional<int> restriction,
              const FitOptions& opts);

struct GridCell {
    ModelOrder order;
    std::optional<FitResult> fit;
    std::string error;
};

struct GridResult {
    ModelOrder best;
    FitResult fit;
    std::vector<GridCell> cells;
};

/// Fits every (r, s) with r + s = p and keeps the highest log-likelihood.
GridResult fit_order_grid(const TimeSeriesPanel& panel, int p, const FitOptions& opts);

/// Univariate convenience wrapper around fit_order_grid.
GridResult fit_mar_grid(std::span<const double> series, int p, const FitOptions& opts);

/// Random lead-first coefficients with companion radii <= 0.95 (leads built
/// from a random reduced-rank factorization when k is given).
MultiplicativeVMAR random_stationary_model(const ModelOrder& order, std::optional<int> k, const Matrix& sigma,
                                           double lambda, std::uint64_t seed);

}  // namespace vmar
