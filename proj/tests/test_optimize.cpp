#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "vmar/optimize.hpp"

using namespace vmar;

namespace {

double rosenbrock(const Eigen::VectorXd& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        f += 100.0 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(1.0 - x(i), 2);
    }
    return f;
}

// Ill-conditioned quadratic with known minimizer.
Objective quadratic(const Eigen::VectorXd& center) {
    return [center](const Eigen::VectorXd& x) {
        double f = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) f += std::pow(10.0, static_cast<double>(i)) * std::pow(x(i) - center(i), 2);
        return f;
    };
}

}  // namespace

TEST(NelderMead, Rosenbrock) {
    const auto r = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), Eigen::Vector2d(0.1, 0.1));
    EXPECT_TRUE(r.converged);
    EXPECT_LT((r.x - Eigen::Vector2d(1.0, 1.0)).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT(r.f, 1e-6);
}

TEST(NelderMead, QuadraticFourDims) {
    const Eigen::Vector4d c(1.0, -2.0, 0.5, 3.0);
    const auto r = nelder_mead(quadratic(c), Eigen::Vector4d::Zero(), Eigen::Vector4d::Constant(0.5));
    EXPECT_LT((r.x - c).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(NelderMead, InfeasibleRegionIsAvoided) {
    // Minimum of (x-2)^2 on x > 1, with the wall at 1 reported as NaN.
    const Objective f = [](const Eigen::VectorXd& x) {
        return x(0) <= 1.0 ? std::numeric_limits<double>::quiet_NaN() : std::pow(x(0) - 2.0, 2);
    };
    Eigen::VectorXd x0(1);
    x0 << 1.3;
    const auto r = nelder_mead(f, x0, Eigen::VectorXd::Constant(1, 2.0));
    EXPECT_NEAR(r.x(0), 2.0, 1e-3);
}

TEST(Bfgs, Rosenbrock) {
    const auto r = bfgs(rosenbrock, Eigen::Vector2d(-1.2, 1.0));
    EXPECT_LT((r.x - Eigen::Vector2d(1.0, 1.0)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Bfgs, Quadratic) {
    const Eigen::Vector3d c(0.3, -0.7, 2.0);
    const auto r = bfgs(quadratic(c), Eigen::Vector3d::Zero());
    EXPECT_TRUE(r.converged);
    EXPECT_LT((r.x - c).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Optimizers, NeverWorseThanStart) {
    for (int seed = 0; seed < 20; ++seed) {
        std::srand(static_cast<unsigned>(seed));
        const Eigen::VectorXd x0 = 2.0 * Eigen::VectorXd::Random(3);
        const double f0 = rosenbrock(x0);
        const auto nm = nelder_mead(rosenbrock, x0, Eigen::VectorXd::Constant(3, 0.2));
        const auto bf = bfgs(rosenbrock, x0);
        EXPECT_LE(nm.f, f0);
        EXPECT_LE(bf.f, f0);
        EXPECT_DOUBLE_EQ(nm.f, rosenbrock(nm.x));
        EXPECT_DOUBLE_EQ(bf.f, rosenbrock(bf.x));
    }
}
