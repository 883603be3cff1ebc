#pragma once

// Detrending, pseudo-causal VAR order selection and residual diagnostics.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vmar/dist.hpp"
#include "vmar/model.hpp"
#include "vmar/panel.hpp"

namespace vmar {

/// Monthly convention; the smoothing used is echoed in CLI output metadata.
inline constexpr double kDefaultHpSmoothing = 129600.0;

struct HpResult {
    Eigen::VectorXd trend;
    Eigen::VectorXd cycle;  // series - trend
};

/// Trend minimizing sum (y - tau)^2 + smoothing * sum (second difference of tau)^2,
/// obtained from the pentadiagonal system (I + smoothing D'D) tau = y.
HpResult hp_filter(std::span<const double> series, double smoothing = kDefaultHpSmoothing);

/// Least-squares VAR(p) with intercept, fitted on rows first_row..T-1.
struct VarFit {
    int p = 0;
    Eigen::VectorXd intercept;
    MatrixList coeffs;           // p matrices, N x N
    Eigen::MatrixXd residuals;   // (T - first_row) x N
    Eigen::MatrixXd sigma_ml;    // residual covariance, divisor = rows
};

/// first_row defaults to p. Throws DegenerateError on rank-deficient regressors.
VarFit fit_var(const Eigen::MatrixXd& values, int p, int first_row = -1);

struct OrderSelection {
    int p = 0;
    std::vector<double> bic;  // index = order 0..p_max
};

/// Gaussian BIC over p = 0..p_max on the common sample rows p_max..T-1.
OrderSelection select_var_order(const TimeSeriesPanel& panel, int p_max);

struct SeriesDiagnostics {
    std::string name;
    JarqueBera jb;
};

/// Jarque-Bera on each residual series of the pseudo-causal VAR(p).
std::vector<SeriesDiagnostics> diagnostics(const TimeSeriesPanel& panel, int p);

/// Natural log of every value; throws InputError on non-positive entries.
TimeSeriesPanel log_transform(const TimeSeriesPanel& panel);
/// Replaces each series by its HP cycle.
TimeSeriesPanel hp_cycle(const TimeSeriesPanel& panel, double smoothing);
/// Same for the HP trend.
TimeSeriesPanel hp_trend(const TimeSeriesPanel& panel, double smoothing);
/// Subtracts column means.
TimeSeriesPanel demean(const TimeSeriesPanel& panel);

}  // namespace vmar
