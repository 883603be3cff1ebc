#pragma once

// Mixed causal-noncausal VAR representations.
//
// A VMAR(r,s) in lead-first form is
//     (I - Psi_1 L^-1 - ... - Psi_s L^-s)(I - Phi_1 L - ... - Phi_r L^r) Y_t = eps_t
// and in lag-first form the two factors are swapped. Expanding either product
// gives a two-sided polynomial A(L) = sum_{j=-s..r} A_j L^j; normalizing by A_0
// yields the additive form shared by both representations.

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace vmar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixList = std::vector<Matrix>;

struct ModelOrder {
    int N = 1;  // dimension
    int r = 0;  // lags
    int s = 0;  // leads

    void validate() const;
    friend bool operator==(const ModelOrder&, const ModelOrder&) = default;
};

enum class Representation { LeadFirst, LagFirst };

struct MultiplicativeVMAR {
    ModelOrder order;
    MatrixList phi;  // r matrices, N x N
    MatrixList psi;  // s matrices, N x N
    Matrix sigma;    // innovation scale, SPD
    double lambda = 4.0;
    Representation representation = Representation::LeadFirst;

    /// Checks dimensions, symmetry and positive definiteness of sigma, and lambda > 0.
    void validate() const;
};

/// Coefficients A_j of the expanded product polynomial, j = -s..r.
struct ExpandedPolynomial {
    ModelOrder order;
    MatrixList coeffs;  // coeffs[j + s] holds A_j

    [[nodiscard]] const Matrix& at(int j) const { return coeffs.at(static_cast<std::size_t>(j + order.s)); }
    [[nodiscard]] Matrix& at(int j) { return coeffs.at(static_cast<std::size_t>(j + order.s)); }
};

/// B(L) = I - sum B_i L^i - sum B_-j L^-j, innovations eta_t with scale omega.
struct AdditiveVMAR {
    ModelOrder order;
    MatrixList b_lag;   // B_1..B_r
    MatrixList b_lead;  // B_-1..B_-s
    Matrix omega;
    double lambda = 4.0;
};

/// Lead matrices restricted to Psi_j = delta_perp * Gamma_j' with the
/// normalization delta' = [I_k, delta_star].
struct ReducedRankLeads {
    ModelOrder order;
    int k = 1;             // rank deficit, 0 < k < N
    Matrix delta_star;     // k x (N-k)
    MatrixList gammas;     // s matrices, (N-k) x N  (Gamma_j')

    void validate() const;

    /// N x k matrix whose transpose is [I_k, delta_star].
    [[nodiscard]] Matrix delta() const;
    /// N x (N-k) matrix [-delta_star; I_{N-k}], so that delta' * delta_perp = 0.
    [[nodiscard]] Matrix delta_perp() const;
};

struct StationarityReport {
    bool stationary = false;
    double lag_radius = 0.0;   // spectral radius of the lag companion matrix
    double lead_radius = 0.0;  // spectral radius of the lead companion matrix
};

inline constexpr double kDefaultStationarityMargin = 1e-6;
inline constexpr double kMinReciprocalCondition = 1e-10;

ExpandedPolynomial expand(const MultiplicativeVMAR& model);

/// Throws DegenerateError when A_0 has reciprocal condition number below 1e-10.
AdditiveVMAR to_additive(const MultiplicativeVMAR& model);

MatrixList build_reduced_rank_leads(const ReducedRankLeads& spec);

/// Best joint rank-(N-k) approximation of the stacked leads [Psi_1 ... Psi_s],
/// expressed in the normalized (delta_star, Gamma) coordinates. Exact when the
/// leads already share a left null space of dimension >= k. Throws
/// DegenerateError if the normalization is not attainable.
ReducedRankLeads project_reduced_rank(const MatrixList& psi, int k);

/// Spectral radius of the companion matrix of I - C_1 z - ... - C_p z^p.
/// Zero for an empty list.
double companion_spectral_radius(const MatrixList& coeffs, int N);

StationarityReport check_stationarity(const MultiplicativeVMAR& model,
                                      double margin = kDefaultStationarityMargin);

/// Number of free lag/lead coefficients: N^2 (r+s) unrestricted, or
/// N^2 r + k(N-k) + s N (N-k) at rank deficit k.
int param_count(const ModelOrder& order, std::optional<int> k = std::nullopt);

/// Degrees of freedom of the common-bubble LR test against full rank: k^2 - N k (1 - s).
int rho(int N, int k, int s);

/// Degrees of freedom of rank deficit k against the weaker deficit l (0 < l < k < N).
int rho_nested(int N, int k, int l, int s);

/// Builds and validates a model.
MultiplicativeVMAR make_model(const ModelOrder& order, MatrixList phi, MatrixList psi, Matrix sigma,
                              double lambda,
                              Representation representation = Representation::LeadFirst);

}  // namespace vmar
