#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "support.hpp"
#include "vmar/dist.hpp"
#include "vmar/errors.hpp"

using namespace vmar;
using vmar::test::mat;

namespace {

// Integral of the density over the real line through x = tan(theta).
double integrate_1d(double df) {
    const MvtParams p(Matrix::Identity(1, 1), df);
    auto f = [&](double th) {
        const double c = std::cos(th);
        Eigen::VectorXd x(1);
        x(0) = std::tan(th);
        return std::exp(log_density(x, p)) / (c * c);
    };
    const double h = std::numbers::pi / 2;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -h, h, 15, 1e-12);
}

}  // namespace

TEST(LogDensity, CauchyMode) {
    const MvtParams p(Matrix::Identity(1, 1), 1.0);
    EXPECT_NEAR(log_density(Eigen::VectorXd::Zero(1), p), std::log(1.0 / std::numbers::pi), 1e-12);
    EXPECT_NEAR(log_density(Eigen::VectorXd::Zero(1), p), -1.14473, 1e-5);
}

TEST(LogDensity, GaussianLimit) {
    const MvtParams p(Matrix::Identity(1, 1), 1e6);
    EXPECT_NEAR(log_density(Eigen::VectorXd::Ones(1), p), -1.41894, 1e-4);
}

TEST(LogDensity, BivariateIntegratesToOne) {
    const MvtParams p(mat(2, 2, {4.0, 0.5, 0.5, 1.0}), 3.0);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double h = std::numbers::pi / 2;
    auto outer = [&](double t1) {
        auto inner = [&](double t2) {
            Eigen::VectorXd x(2);
            x << 2.0 * std::tan(t1), std::tan(t2);
            const double c1 = std::cos(t1), c2 = std::cos(t2);
            return std::exp(log_density(x, p)) * 2.0 / (c1 * c1 * c2 * c2);
        };
        return GK::integrate(inner, -h, h, 10, 1e-9);
    };
    EXPECT_NEAR(GK::integrate(outer, -h, h, 10, 1e-9), 1.0, 1e-3);
}

TEST(LogDensity, UnivariateNormalization) {
    for (double df : {1.0, 1.5, 3.0, 30.0}) EXPECT_NEAR(integrate_1d(df), 1.0, 1e-6) << "df=" << df;
}

TEST(LogDensity, MaximizedAtZero) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    const MvtParams p(mat(3, 3, {2.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 4.0}), 2.5);
    const double at0 = log_density(Eigen::VectorXd::Zero(3), p);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(3, [&] { return z(rng); });
        EXPECT_LT(log_density(x, p), at0);
    }
}

TEST(LogDensity, RejectsBadScale) {
    EXPECT_THROW(MvtParams(mat(2, 2, {1.0, 2.0, 2.0, 1.0}), 3.0), StructuralError);
    EXPECT_THROW(MvtParams(Matrix::Identity(2, 2), 0.0), StructuralError);
    const MvtParams p(Matrix::Identity(2, 2), 3.0);
    EXPECT_THROW(log_density(Eigen::VectorXd::Zero(3), p), StructuralError);
}

TEST(Sample, UncorrelatedComponents) {
    Rng rng(5);
    const auto x = sample(100000, MvtParams(Matrix::Identity(2, 2), 3.0), rng);
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const double r = c.col(0).dot(c.col(1)) / std::sqrt(c.col(0).squaredNorm() * c.col(1).squaredNorm());
    EXPECT_LT(std::abs(r), 0.02);
}

TEST(Sample, GaussianLimitVariance) {
    Rng rng(6);
    const auto x = sample(100000, MvtParams(Matrix::Identity(1, 1), 1e8), rng);
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / (x.rows() - 1);
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Sample, Deterministic) {
    const MvtParams p(mat(2, 2, {4.0, 0.5, 0.5, 1.0}), 1.5);
    Rng a(99), b(99);
    const auto x = sample(1000, p, a);
    const auto y = sample(1000, p, b);
    EXPECT_TRUE((x.array() == y.array()).all());
}

TEST(Sample, ScaleConverges) {
    const Matrix sigma = mat(2, 2, {4.0, 0.5, 0.5, 1.0});
    Rng rng(7);
    const double df = 5.0;
    const auto x = sample(1000000, MvtParams(sigma, df), rng);
    const Matrix c = x.rowwise() - x.colwise().mean();
    const Matrix cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
    const Matrix implied = cov * (df - 2.0) / df;
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(implied(i, i), sigma(i, i), 0.03 * sigma(i, i));
    EXPECT_NEAR(implied(0, 1), sigma(0, 1), 0.03 * std::sqrt(sigma(0, 0) * sigma(1, 1)));
}

TEST(Sample, CovarianceUndefinedForHeavyTails) {
    EXPECT_FALSE(MvtParams(Matrix::Identity(2, 2), 1.5).covariance().has_value());
    EXPECT_NEAR((*MvtParams(Matrix::Identity(2, 2), 4.0).covariance())(0, 0), 2.0, 1e-15);
}

TEST(ChiSquare, CriticalValues) {
    EXPECT_NEAR(chi2_quantile(0.95, 1), 3.841, 1e-3);
    EXPECT_NEAR(chi2_quantile(0.95, 4), 9.488, 1e-3);
    EXPECT_EQ(chi2_sf(0.0, 3.0), 1.0);
    // Closed forms: sf(x; 2) = exp(-x/2), sf(x; 1) = erfc(sqrt(x/2)).
    EXPECT_NEAR(chi2_sf(3.0, 2.0), std::exp(-1.5), 1e-14);
    EXPECT_NEAR(chi2_sf(2.5, 1.0), std::erfc(std::sqrt(1.25)), 1e-14);
}

TEST(ChiSquare, QuantileInvertsSurvival) {
    for (double d : {1.0, 2.0, 4.0, 9.0})
        for (double q : {0.5, 0.9, 0.95, 0.99}) EXPECT_NEAR(chi2_sf(chi2_quantile(q, d), d), 1.0 - q, 1e-8);
}

TEST(ChiSquare, Errors) {
    EXPECT_THROW(chi2_quantile(0.0, 1), StructuralError);
    EXPECT_THROW(chi2_quantile(1.0, 1), StructuralError);
    EXPECT_THROW(chi2_sf(1.0, 0.0), StructuralError);
}

TEST(JarqueBera, SymmetricMesokurticSample) {
    // A third of the mass at +-2 and the rest at 0: skewness 0, kurtosis 1/(1/3) = 3.
    const std::vector<double> x = {2, -2, 2, -2, 0, 0, 0, 0, 0, 0, 0, 0};
    const auto jb = jarque_bera(x);
    EXPECT_NEAR(jb.skewness, 0.0, 1e-14);
    EXPECT_NEAR(jb.kurtosis, 3.0, 1e-12);
    EXPECT_NEAR(jb.stat, 0.0, 1e-10);
    EXPECT_NEAR(jb.pvalue, 1.0, 1e-10);
}

TEST(JarqueBera, NormalCalibration) {
    Rng rng(8);
    std::normal_distribution<double> z;
    std::vector<double> x(10000);
    int rejections = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        for (auto& v : x) v = z(rng);
        if (jarque_bera(x).pvalue < 0.05) ++rejections;
    }
    // 5% nominal; binomial sd over 1000 trials is about 0.007.
    EXPECT_NEAR(rejections / 1000.0, 0.05, 0.025);
}

TEST(JarqueBera, HeavyTailsDetected) {
    Rng rng(9);
    const MvtParams p(Matrix::Identity(1, 1), 3.0);
    int large = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::MatrixXd x = sample(500, p, rng);
        if (jarque_bera(std::span<const double>(x.data(), 500)).stat > 20.0) ++large;
    }
    EXPECT_GE(large, 180);
}

TEST(JarqueBera, Errors) {
    EXPECT_THROW(jarque_bera(std::vector<double>(8, 1.0)), DegenerateError);
    EXPECT_THROW(jarque_bera(std::vector<double>(7, 1.0)), StructuralError);
}
