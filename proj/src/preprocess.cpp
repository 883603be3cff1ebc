#include "vmar/preprocess.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "vmar/errors.hpp"

namespace vmar {

HpResult hp_filter(std::span<const double> series, double smoothing) {
    const auto T = static_cast<Eigen::Index>(series.size());
    if (T < 4) throw StructuralError("HP filter needs at least 4 observations");
    if (!(smoothing > 0.0) || !std::isfinite(smoothing)) throw StructuralError("HP smoothing must be positive");
    const Eigen::Map<const Eigen::VectorXd> y(series.data(), T);
    if (!y.allFinite()) throw StructuralError("HP filter input must be finite");

    // Rows of D'D: interior stencil (1, -4, 6, -4, 1), adjusted at both ends.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5 * T));
    for (Eigen::Index i = 0; i + 2 < T; ++i) {
        const Eigen::Index c[3] = {i, i + 1, i + 2};
        const double w[3] = {1.0, -2.0, 1.0};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) trip.emplace_back(c[a], c[b], smoothing * w[a] * w[b]);
    }
    for (Eigen::Index i = 0; i < T; ++i) trip.emplace_back(i, i, 1.0);
    Eigen::SparseMatrix<double> A(T, T);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw DegenerateError("HP system factorization failed");
    // Lines lie in the null space of the penalty, so only the detrended part
    // goes through the solver. This keeps the solve well scaled at large smoothing.
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(T, 0.0, static_cast<double>(T - 1));
    const double t_mean = t.mean();
    const Eigen::VectorXd tc = t.array() - t_mean;
    const double slope = tc.dot(y) / tc.squaredNorm();
    const Eigen::VectorXd line = (y.mean() + slope * tc.array()).matrix();
    const Eigen::VectorXd rest = y - line;
    Eigen::VectorXd trend = solver.solve(rest);
    for (int refine = 0; refine < 2; ++refine) {
        const Eigen::VectorXd resid = rest - A * trend;
        trend += solver.solve(resid);
    }
    trend += line;
    HpResult out;
    out.cycle = y - trend;
    out.trend = std::move(trend);
    return out;
}

VarFit fit_var(const Eigen::MatrixXd& values, int p, int first_row) {
    const auto T = static_cast<int>(values.rows());
    const auto N = static_cast<int>(values.cols());
    if (p < 0) throw StructuralError("VAR order must be non-negative");
    if (first_row < 0) first_row = p;
    if (first_row < p) throw StructuralError("first row must be at least p");
    const int rows = T - first_row;
    const int cols = 1 + N * p;
    if (rows <= cols) throw DataInsufficientError("too few observations for VAR(" + std::to_string(p) + ")");

    Eigen::MatrixXd X(rows, cols);
    X.col(0).setOnes();
    for (int i = 1; i <= p; ++i) X.middleCols(1 + (i - 1) * N, N) = values.middleRows(first_row - i, rows);
    const Eigen::MatrixXd Y = values.middleRows(first_row, rows);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) throw DegenerateError("VAR regressor matrix is rank deficient");
    const Eigen::MatrixXd beta = qr.solve(Y);  // cols x N

    VarFit fit;
    fit.p = p;
    fit.intercept = beta.row(0).transpose();
    for (int i = 1; i <= p; ++i) fit.coeffs.push_back(beta.middleRows(1 + (i - 1) * N, N).transpose());
    fit.residuals = Y - X * beta;
    fit.sigma_ml = fit.residuals.transpose() * fit.residuals / static_cast<double>(rows);
    return fit;
}

OrderSelection select_var_order(const TimeSeriesPanel& panel, int p_max) {
    const int N = panel.N();
    if (p_max < 0) throw StructuralError("p_max must be non-negative");
    if (panel.T() <= N * p_max + 10) throw DataInsufficientError("panel too short for the requested p_max");
    OrderSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= p_max; ++p) {
        const VarFit fit = fit_var(panel.values, p, p_max);
        const auto rows = static_cast<double>(fit.residuals.rows());
        Eigen::LLT<Eigen::MatrixXd> llt(fit.sigma_ml);
        if (llt.info() != Eigen::Success) throw DegenerateError("singular VAR residual covariance");
        const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
        const double bic = logdet + std::log(rows) / rows * static_cast<double>(N * N * p);
        sel.bic.push_back(bic);
        if (bic < best) {
            best = bic;
            sel.p = p;
        }
    }
    return sel;
}

std::vector<SeriesDiagnostics> diagnostics(const TimeSeriesPanel& panel, int p) {
    const VarFit fit = fit_var(panel.values, p);
    std::vector<SeriesDiagnostics> out;
    for (int j = 0; j < panel.N(); ++j) {
        const Eigen::VectorXd col = fit.residuals.col(j);
        out.push_back({panel.names[static_cast<std::size_t>(j)],
                       jarque_bera(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())))});
    }
    return out;
}

TimeSeriesPanel log_transform(const TimeSeriesPanel& panel) {
    if ((panel.values.array() <= 0.0).any()) throw InputError("log transform needs strictly positive data");
    TimeSeriesPanel out = panel;
    out.values = panel.values.array().log().matrix();
    return out;
}

namespace {

template <class Pick>
TimeSeriesPanel hp_apply(const TimeSeriesPanel& panel, double smoothing, Pick pick) {
    TimeSeriesPanel out = panel;
    for (int j = 0; j < panel.N(); ++j) {
        const Eigen::VectorXd col = panel.values.col(j);
        const HpResult hp = hp_filter(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), smoothing);
        out.values.col(j) = pick(hp);
    }
    return out;
}

}  // namespace

TimeSeriesPanel hp_cycle(const TimeSeriesPanel& panel, double smoothing) {
    return hp_apply(panel, smoothing, [](const HpResult& hp) { return hp.cycle; });
}

TimeSeriesPanel hp_trend(const TimeSeriesPanel& panel, double smoothing) {
    return hp_apply(panel, smoothing, [](const HpResult& hp) { return hp.trend; });
}

TimeSeriesPanel demean(const TimeSeriesPanel& panel) {
    TimeSeriesPanel out = panel;
    out.values = panel.values.rowwise() - panel.values.colwise().mean();
    return out;
}

}  // namespace vmar
