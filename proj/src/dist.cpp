#include "vmar/dist.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "vmar/errors.hpp"

namespace vmar {

MvtParams::MvtParams(Eigen::MatrixXd scale, double df) : scale_(std::move(scale)), df_(df) {
    if (scale_.rows() < 1 || scale_.rows() != scale_.cols()) throw StructuralError("t scale must be square");
    if (!(df_ > 0.0) || !std::isfinite(df_)) throw StructuralError("t degrees of freedom must be positive");
    Eigen::LLT<Eigen::MatrixXd> llt(scale_);
    if (llt.info() != Eigen::Success || !scale_.allFinite()) {
        throw StructuralError("t scale must be symmetric positive definite");
    }
    chol_ = llt.matrixL();
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

std::optional<Eigen::MatrixXd> MvtParams::covariance() const {
    if (df_ <= 2.0) return std::nullopt;
    return Eigen::MatrixXd(scale_ * (df_ / (df_ - 2.0)));
}

double mvt_log_norm_const(int N, double df) {
    return std::lgamma(0.5 * (df + N)) - std::lgamma(0.5 * df) -
           0.5 * N * std::log(df * std::numbers::pi);
}

double log_density(const Eigen::VectorXd& x, const MvtParams& p) {
    if (x.size() != p.dim()) throw StructuralError("density argument has wrong dimension");
    const Eigen::VectorXd z = p.chol().triangularView<Eigen::Lower>().solve(x);
    const double q = z.squaredNorm();
    const double df = p.df();
    return mvt_log_norm_const(p.dim(), df) - 0.5 * p.log_det_scale() -
           0.5 * (df + p.dim()) * std::log1p(q / df);
}

Eigen::MatrixXd sample(int n, const MvtParams& p, Rng& rng) {
    if (n < 1) throw StructuralError("sample size must be >= 1");
    const int N = p.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(p.df());
    Eigen::MatrixXd out(n, N);
    Eigen::VectorXd z(N);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < N; ++j) z(j) = normal(rng);
        const double w = chi2(rng);
        out.row(i) = (p.chol() * z).transpose() * std::sqrt(p.df() / w);
    }
    return out;
}

double chi2_sf(double x, double df) {
    if (!(df > 0.0)) throw StructuralError("chi-square degrees of freedom must be positive");
    if (std::isnan(x)) throw StructuralError("chi-square argument is NaN");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chi2_quantile(double q, double df) {
    if (!(q > 0.0 && q < 1.0)) throw StructuralError("chi-square quantile level must lie in (0,1)");
    if (!(df > 0.0)) throw StructuralError("chi-square degrees of freedom must be positive");
    const double target = 1.0 - q;
    auto f = [&](double x) { return chi2_sf(x, df) - target; };

    double lo = 0.0;
    double hi = std::max(1.0, df);
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10; };
    std::uintmax_t max_iter = 500;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, max_iter);
    return 0.5 * (a + b);
}

JarqueBera jarque_bera(std::span<const double> x) {
    const auto T = static_cast<double>(x.size());
    if (x.size() < 8) throw StructuralError("Jarque-Bera needs at least 8 observations");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= T;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= T;
    m3 /= T;
    m4 /= T;
    if (!(m2 > 0.0)) throw DegenerateError("Jarque-Bera on a constant series");
    JarqueBera jb;
    jb.skewness = m3 / std::pow(m2, 1.5);
    jb.kurtosis = m4 / (m2 * m2);
    const double excess = jb.kurtosis - 3.0;
    jb.stat = T * (jb.skewness * jb.skewness / 6.0 + excess * excess / 24.0);
    jb.pvalue = chi2_sf(jb.stat, 2.0);
    return jb;
}

}  // namespace vmar
