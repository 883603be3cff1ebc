#pragma once

// Derivative-free and quasi-Newton local minimizers. Both are monotone: the
// best objective value never increases across accepted steps. Non-finite
// objective values are treated as +inf, so infeasible regions can be marked
// by returning infinity.

#include <functional>

#include <Eigen/Dense>

namespace vmar {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;  // stopped on the tolerance rather than the iteration cap
};

struct NelderMeadOptions {
    double tol = 1e-8;      // spread of simplex values
    int max_iter = 5000;    // per simplex run
    int max_restarts = 5;   // fresh simplex around the incumbent
};

/// Nelder-Mead with restarts: after each collapse a new simplex is built
/// around the best point, until a restart improves by less than tol.
OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                        const NelderMeadOptions& opts = {});

struct BfgsOptions {
    double tol = 1e-8;       // stop once an iteration improves by less than this
    int max_iter = 500;
    double grad_step = 1e-5; // relative central-difference step
};

/// BFGS on a finite-difference gradient with backtracking Armijo line search.
OptimResult bfgs(const Objective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts = {});

}  // namespace vmar
