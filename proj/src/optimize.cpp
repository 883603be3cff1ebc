#include "vmar/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace vmar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CountingObjective {
    const Objective& f;
    int calls = 0;

    double operator()(const Eigen::VectorXd& x) {
        ++calls;
        const double v = f(x);
        return std::isfinite(v) ? v : kInf;
    }
};

struct SimplexRun {
    Eigen::VectorXd x;
    double f;
    int iterations;
    bool collapsed;
};

SimplexRun simplex_run(CountingObjective& f, const Eigen::VectorXd& x0, double f0,
                       const Eigen::VectorXd& steps, double tol, int max_iter) {
    const auto n = x0.size();
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> fv(static_cast<std::size_t>(n + 1), f0);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& p = pts[static_cast<std::size_t>(i + 1)];
        p(i) += steps(i);
        fv[static_cast<std::size_t>(i + 1)] = f(p);
        if (!std::isfinite(fv[static_cast<std::size_t>(i + 1)])) {
            p(i) = x0(i) - steps(i);
            fv[static_cast<std::size_t>(i + 1)] = f(p);
        }
    }

    std::vector<std::size_t> idx(static_cast<std::size_t>(n + 1));
    Eigen::VectorXd centroid(n), xr(n), xe(n), xc(n);
    int iter = 0;
    bool collapsed = false;
    for (; iter < max_iter; ++iter) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = idx.front();
        const std::size_t worst = idx.back();
        const std::size_t second = idx[idx.size() - 2];
        const double spread = fv[worst] - fv[best];
        if (std::isfinite(spread) && spread <= tol) {
            collapsed = true;
            break;
        }

        centroid.setZero();
        for (std::size_t k = 0; k + 1 < idx.size(); ++k) centroid += pts[idx[k]];
        centroid /= static_cast<double>(n);

        xr = centroid + (centroid - pts[worst]);
        const double fr = f(xr);
        if (fr < fv[best]) {
            xe = centroid + 2.0 * (xr - centroid);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                         : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
            const double fc = f(xc);
            if (fc < (outside ? fr : fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t k = 1; k < idx.size(); ++k) {
                    auto& p = pts[idx[k]];
                    p = pts[best] + 0.5 * (p - pts[best]);
                    fv[idx[k]] = f(p);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return {pts[best], fv[best], iter, collapsed};
}

Eigen::VectorXd numeric_gradient(CountingObjective& f, const Eigen::VectorXd& x, double fx, double rel_step) {
    const auto n = x.size();
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        if (std::isfinite(fp) && std::isfinite(fm)) {
            g(i) = (fp - fm) / (2.0 * h);
        } else if (std::isfinite(fp)) {
            g(i) = (fp - fx) / h;
        } else if (std::isfinite(fm)) {
            g(i) = (fx - fm) / h;
        } else {
            g(i) = 0.0;
        }
    }
    return g;
}

}  // namespace

OptimResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                        const NelderMeadOptions& opts) {
    CountingObjective f{objective};
    OptimResult res;
    res.x = x0;
    res.f = f(x0);
    if (!std::isfinite(res.f)) {
        res.evaluations = f.calls;
        return res;
    }
    Eigen::VectorXd step = steps;
    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        const SimplexRun run = simplex_run(f, res.x, res.f, step, opts.tol, opts.max_iter);
        res.iterations += run.iterations;
        const double gain = res.f - run.f;
        if (run.f < res.f) {
            res.x = run.x;
            res.f = run.f;
        }
        res.converged = run.collapsed;
        if (run.collapsed && restart > 0 && gain < opts.tol) break;
        if (run.collapsed) step *= 0.5;
    }
    res.evaluations = f.calls;
    return res;
}

OptimResult bfgs(const Objective& objective, const Eigen::VectorXd& x0, const BfgsOptions& opts) {
    CountingObjective f{objective};
    const auto n = x0.size();
    OptimResult res;
    res.x = x0;
    res.f = f(x0);
    if (!std::isfinite(res.f)) {
        res.evaluations = f.calls;
        return res;
    }
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = numeric_gradient(f, res.x, res.f, opts.grad_step);
    int small_steps = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        Eigen::VectorXd d = -h_inv * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            h_inv.setIdentity();
            d = -g;
            slope = -g.squaredNorm();
        }
        if (slope == 0.0) {
            res.converged = true;
            break;
        }
        double alpha = 1.0;
        Eigen::VectorXd x_new;
        double f_new = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = res.x + alpha * d;
            f_new = f(x_new);
            if (f_new <= res.f + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted || !(f_new < res.f)) {
            if (h_inv.isIdentity()) {
                res.converged = true;  // no descent possible along the gradient
                break;
            }
            h_inv.setIdentity();
            continue;
        }
        const double gain = res.f - f_new;
        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd g_new = numeric_gradient(f, x_new, f_new, opts.grad_step);
        const Eigen::VectorXd y = g_new - g;
        res.x = x_new;
        res.f = f_new;
        g = g_new;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            h_inv = (I - rho * s * y.transpose()) * h_inv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        small_steps = gain < opts.tol ? small_steps + 1 : 0;
        if (small_steps >= 2) {
            res.converged = true;
            break;
        }
    }
    res.evaluations = f.calls;
    return res;
}

}  // namespace vmar
