#pragma once

// Multivariate Student-t law, chi-square tail functions, Jarque-Bera.

#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace vmar {

using Rng = std::mt19937_64;

class MvtParams {
public:
    /// Throws StructuralError if scale is not SPD or df <= 0.
    MvtParams(Eigen::MatrixXd scale, double df);

    [[nodiscard]] int dim() const { return static_cast<int>(scale_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& scale() const { return scale_; }
    [[nodiscard]] double df() const { return df_; }
    /// Lower Cholesky factor of the scale.
    [[nodiscard]] const Eigen::MatrixXd& chol() const { return chol_; }
    [[nodiscard]] double log_det_scale() const { return log_det_; }

    /// df/(df-2) * scale; empty when df <= 2 (infinite variance).
    [[nodiscard]] std::optional<Eigen::MatrixXd> covariance() const;

private:
    Eigen::MatrixXd scale_;
    Eigen::MatrixXd chol_;
    double df_;
    double log_det_;
};

/// Normalizing constant of the t density, ln G((df+N)/2) - ln G(df/2) - N/2 ln(df pi).
double mvt_log_norm_const(int N, double df);

double log_density(const Eigen::VectorXd& x, const MvtParams& p);

/// n x N matrix of draws, row i = L z sqrt(df / w) with z ~ N(0, I) and w ~ chi2(df).
Eigen::MatrixXd sample(int n, const MvtParams& p, Rng& rng);

double chi2_sf(double x, double df);
/// Solves chi2_sf(x, df) = 1 - q by bracketed root finding, absolute tolerance 1e-10.
double chi2_quantile(double q, double df);

struct JarqueBera {
    double stat = 0.0;
    double pvalue = 1.0;
    double skewness = 0.0;
    double kurtosis = 3.0;
};

/// Requires at least 8 observations; throws DegenerateError on zero variance.
JarqueBera jarque_bera(std::span<const double> x);

}  // namespace vmar
