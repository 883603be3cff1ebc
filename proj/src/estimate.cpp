#include "vmar/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vmar/dist.hpp"
#include "vmar/errors.hpp"
#include "vmar/optimize.hpp"
#include "vmar/parallel.hpp"
#include "vmar/preprocess.hpp"

namespace vmar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Conditional log-likelihood on a pre-transposed sample (N x T).
class LikelihoodEngine {
public:
    LikelihoodEngine(const TimeSeriesPanel& panel, const ModelOrder& order)
        : y_(panel.values.transpose()), order_(order), n_eff_(panel.T() - order.r - order.s) {}

    [[nodiscard]] int n_effective() const { return n_eff_; }

    // -inf when sigma is not positive definite.
    [[nodiscard]] double operator()(const MultiplicativeVMAR& m) const {
        const ExpandedPolynomial a = expand(m);
        const int N = order_.N;
        Matrix resid = Matrix::Zero(N, n_eff_);
        for (int j = -order_.s; j <= order_.r; ++j) {
            resid.noalias() += a.at(j) * y_.middleCols(order_.r - j, n_eff_);
        }
        Eigen::LLT<Matrix> llt(m.sigma);
        if (llt.info() != Eigen::Success) return -kInf;
        const Matrix L = llt.matrixL();
        const double log_det = 2.0 * L.diagonal().array().log().sum();
        if (!std::isfinite(log_det)) return -kInf;
        L.triangularView<Eigen::Lower>().solveInPlace(resid);
        const double lambda = m.lambda;
        const double tail = (resid.colwise().squaredNorm().array() / lambda).log1p().sum();
        return n_eff_ * (mvt_log_norm_const(N, lambda) - 0.5 * log_det) - 0.5 * (lambda + N) * tail;
    }

private:
    Matrix y_;
    ModelOrder order_;
    int n_eff_;
};

void check_sample_size(const TimeSeriesPanel& panel, const ModelOrder& order) {
    if (panel.T() <= order.r + order.s + order.N) {
        throw DataInsufficientError("sample of " + std::to_string(panel.T()) +
                                    " observations is too short for VMAR(" + std::to_string(order.r) + "," +
                                    std::to_string(order.s) + ") with N=" + std::to_string(order.N));
    }
}

void append_matrix(Vector& x, int& pos, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) x(pos++) = m(i, j);
}

Matrix read_matrix(const Vector& x, int& pos, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = x(pos++);
    return m;
}

void append_scale(Vector& x, int& pos, const Matrix& sigma, double lambda) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw StructuralError("sigma must be positive definite");
    const Matrix L = llt.matrixL();
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j) x(pos++) = i == j ? std::log(L(i, i)) : L(i, j);
    if (!(lambda > kLambdaFloor)) throw StructuralError("lambda must exceed the 0.1 floor to be packed");
    x(pos++) = std::log(lambda - kLambdaFloor);
}

// Rescales lag-type coefficients C_i -> c^i C_i so the companion radius is at most `bound`.
void shrink_to_radius(MatrixList& coeffs, int N, double bound) {
    const double radius = companion_spectral_radius(coeffs, N);
    if (radius <= bound) return;
    const double c = bound / radius;
    double f = 1.0;
    for (auto& m : coeffs) {
        f *= c;
        m *= f;
    }
}

Matrix residual_scale_start(const TimeSeriesPanel& panel, const ModelOrder& order) {
    const int p = order.r + order.s;
    try {
        const VarFit var = fit_var(panel.values, p);
        Matrix s = var.sigma_ml * ((kLambdaStart - 2.0) / kLambdaStart);
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() == Eigen::Success) return s;
    } catch (const std::exception&) {
    }
    Matrix cov = (panel.values.rowwise() - panel.values.colwise().mean()).eval();
    cov = cov.transpose() * cov / std::max(1, panel.T() - 1);
    cov.diagonal().array() += 1e-8;
    return cov;
}

struct StartPoint {
    std::string origin;
    std::optional<Vector> x;
    std::string error;
};

}  // namespace

double loglik(const TimeSeriesPanel& panel, const MultiplicativeVMAR& model) {
    model.validate();
    if (panel.N() != model.order.N) throw StructuralError("panel dimension does not match the model");
    check_sample_size(panel, model.order);
    return LikelihoodEngine(panel, model.order)(model);
}

ParamLayout::ParamLayout(ModelOrder order, std::optional<int> k) : order_(order), k_(k) {
    order_.validate();
    if (k_) {
        if (*k_ <= 0 || *k_ >= order_.N) throw StructuralError("rank deficit k must satisfy 0 < k < N");
        if (order_.s < 1) throw StructuralError("a rank restriction needs at least one lead");
    }
}

int ParamLayout::coefficient_size() const { return param_count(order_, k_); }

int ParamLayout::size() const {
    const int N = order_.N;
    return coefficient_size() + N * (N + 1) / 2 + 1;
}

Vector ParamLayout::pack(const MultiplicativeVMAR& model) const {
    if (k_) throw StructuralError("restricted layout needs the reduced-rank leads");
    if (!(model.order == order_)) throw StructuralError("model order does not match the layout");
    Vector x(size());
    int pos = 0;
    for (const auto& m : model.phi) append_matrix(x, pos, m);
    for (const auto& m : model.psi) append_matrix(x, pos, m);
    append_scale(x, pos, model.sigma, model.lambda);
    return x;
}

Vector ParamLayout::pack(const MatrixList& phi, const ReducedRankLeads& leads, const Matrix& sigma,
                         double lambda) const {
    if (!k_ || leads.k != *k_) throw StructuralError("restricted layout rank does not match");
    if (static_cast<int>(phi.size()) != order_.r || static_cast<int>(leads.gammas.size()) != order_.s) {
        throw StructuralError("coefficient count does not match the layout");
    }
    Vector x(size());
    int pos = 0;
    for (const auto& m : phi) append_matrix(x, pos, m);
    append_matrix(x, pos, leads.delta_star);
    for (const auto& g : leads.gammas) append_matrix(x, pos, g);
    append_scale(x, pos, sigma, lambda);
    return x;
}

ParamLayout::Unpacked ParamLayout::unpack(const Vector& x) const {
    if (x.size() != size()) throw StructuralError("parameter vector has wrong length");
    const int N = order_.N;
    Unpacked out;
    MultiplicativeVMAR& m = out.model;
    m.order = order_;
    m.representation = Representation::LeadFirst;
    int pos = 0;
    for (int i = 0; i < order_.r; ++i) m.phi.push_back(read_matrix(x, pos, N, N));
    if (k_) {
        ReducedRankLeads rr;
        rr.order = order_;
        rr.k = *k_;
        rr.delta_star = read_matrix(x, pos, *k_, N - *k_);
        for (int j = 0; j < order_.s; ++j) rr.gammas.push_back(read_matrix(x, pos, N - *k_, N));
        m.psi = build_reduced_rank_leads(rr);
        out.restriction = std::move(rr);
    } else {
        for (int j = 0; j < order_.s; ++j) m.psi.push_back(read_matrix(x, pos, N, N));
    }
    Matrix L = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) L(i, j) = i == j ? std::exp(x(pos++)) : x(pos++);
    m.sigma = L * L.transpose();
    m.lambda = kLambdaFloor + std::exp(x(pos++));
    return out;
}

MultiplicativeVMAR random_stationary_model(const ModelOrder& order, std::optional<int> k, const Matrix& sigma,
                                           double lambda, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
    Rng rng(seq);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int N = order.N;
    auto draw = [&](int rows, int cols) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = unif(rng);
        return m;
    };
    MultiplicativeVMAR m;
    m.order = order;
    m.sigma = sigma;
    m.lambda = lambda;
    for (int i = 0; i < order.r; ++i) m.phi.push_back(draw(N, N));
    shrink_to_radius(m.phi, N, 0.95);
    if (k) {
        ReducedRankLeads rr;
        rr.order = order;
        rr.k = *k;
        rr.delta_star = draw(*k, N - *k);
        for (int j = 0; j < order.s; ++j) rr.gammas.push_back(draw(N - *k, N));
        MatrixList psi = build_reduced_rank_leads(rr);
        const double radius = companion_spectral_radius(psi, N);
        if (radius > 0.95) {
            const double c = 0.95 / radius;
            double f = 1.0;
            for (auto& g : rr.gammas) {
                f *= c;
                g *= f;
            }
        }
        m.psi = build_reduced_rank_leads(rr);
    } else {
        for (int j = 0; j < order.s; ++j) m.psi.push_back(draw(N, N));
        shrink_to_radius(m.psi, N, 0.95);
    }
    return m;
}

FitResult fit(const TimeSeriesPanel& panel, const ModelOrder& order, std::optional<int> restriction,
              const FitOptions& opts) {
    order.validate();
    if (panel.N() != order.N) throw StructuralError("panel dimension does not match the model order");
    if (!panel.values.allFinite()) throw InputError("panel contains non-finite values");
    if (opts.n_starts < 1) throw StructuralError("n_starts must be >= 1");
    check_sample_size(panel, order);
    const int per_equation = order.N * (order.r + order.s) + order.N;
    if (panel.T() - order.r - order.s <= per_equation) {
        throw DataInsufficientError("effective sample of " + std::to_string(panel.T() - order.r - order.s) +
                                   " observations cannot identify " + std::to_string(per_equation) +
                                   " parameters per equation");
    }
    const ParamLayout layout(order, restriction);
    const LikelihoodEngine engine(panel, order);

    FitResult result;
    result.T = panel.T();
    result.n_effective = engine.n_effective();
    if (panel.T() < 5 * layout.coefficient_size()) {
        result.warnings.push_back("sample size " + std::to_string(panel.T()) + " is below 5x the " +
                                  std::to_string(layout.coefficient_size()) + " free coefficients");
    }

    const Objective objective = [&](const Vector& x) {
        const auto u = layout.unpack(x);
        if (!std::isfinite(u.model.lambda) || !u.model.sigma.allFinite()) return kInf;
        if (!check_stationarity(u.model).stationary) return kInf;
        const double ll = engine(u.model);
        return std::isfinite(ll) ? -ll : kInf;
    };

    auto pack_start = [&](const MultiplicativeVMAR& m) -> Vector {
        if (!(m.order == order)) throw StructuralError("start model order does not match the fit");
        if (!restriction) return layout.pack(m);
        ReducedRankLeads rr = project_reduced_rank(m.psi, *restriction);
        rr.order = order;
        return layout.pack(m.phi, rr, m.sigma, m.lambda);
    };

    std::vector<StartPoint> starts;
    const bool has_initial = opts.start_mode != StartMode::Random && opts.initial.has_value();
    if (opts.start_mode != StartMode::Random && !opts.initial) {
        throw StructuralError("start mode requires an initial model");
    }
    if (has_initial) starts.push_back({"initial", std::nullopt, {}});
    for (std::size_t i = 0; i < opts.extra_starts.size(); ++i) starts.push_back({"extra", std::nullopt, {}});
    const int n_random = std::max(0, opts.n_starts - (has_initial ? 1 : 0));
    for (int i = 0; i < n_random; ++i) starts.push_back({"random", std::nullopt, {}});

    const Matrix sigma0 = residual_scale_start(panel, order);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto& sp = starts[i];
        try {
            if (sp.origin == "initial") {
                sp.x = pack_start(*opts.initial);
            } else if (sp.origin == "extra") {
                sp.x = pack_start(opts.extra_starts[i - (has_initial ? 1 : 0)]);
            } else {
                sp.x = pack_start(random_stationary_model(order, restriction, sigma0, kLambdaStart,
                                                          opts.seed * 1000003ULL + i));
            }
        } catch (const std::exception& e) {
            sp.error = e.what();
        }
    }

    struct Outcome {
        Vector x;
        double f = kInf;
        bool converged = false;
        int evaluations = 0;
    };
    std::vector<Outcome> outcomes(starts.size());

    const int n_par = layout.size();
    Vector steps = Vector::Constant(n_par, 0.1);
    steps(n_par - 1) = 0.2;

    parallel_for(static_cast<int>(starts.size()), opts.jobs, [&](int i) {
        const auto& sp = starts[static_cast<std::size_t>(i)];
        if (!sp.x) return;
        NelderMeadOptions nm_opts;
        nm_opts.tol = std::max(opts.tol, 1e-6);
        nm_opts.max_iter = opts.max_iter;
        nm_opts.max_restarts = 2;
        const OptimResult nm = nelder_mead(objective, *sp.x, steps, nm_opts);
        BfgsOptions bf_opts;
        bf_opts.tol = opts.tol;
        bf_opts.max_iter = opts.max_iter;
        const OptimResult bf = bfgs(objective, nm.x, bf_opts);
        auto& out = outcomes[static_cast<std::size_t>(i)];
        out.x = bf.f <= nm.f ? bf.x : nm.x;
        out.f = std::min(bf.f, nm.f);
        out.converged = std::isfinite(out.f) && bf.converged;
        out.evaluations = nm.evaluations + bf.evaluations;
    });

    int best = -1;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        StartDiagnostics d;
        d.index = static_cast<int>(i);
        d.origin = starts[i].origin;
        d.error = starts[i].error;
        d.loglik = std::isfinite(outcomes[i].f) ? -outcomes[i].f : -kInf;
        d.converged = outcomes[i].converged;
        d.evaluations = outcomes[i].evaluations;
        if (d.error.empty() && !std::isfinite(outcomes[i].f)) d.error = "start is infeasible or diverged";
        result.starts.push_back(d);
        if (std::isfinite(outcomes[i].f) &&
            (best < 0 || outcomes[i].f < outcomes[static_cast<std::size_t>(best)].f)) {
            best = static_cast<int>(i);
        }
    }
    if (best < 0) {
        std::ostringstream msg;
        msg << "all " << starts.size() << " starts failed:";
        for (const auto& d : result.starts) msg << " [" << d.index << " " << d.origin << ": " << d.error << "]";
        throw EstimationError(msg.str());
    }

    const auto& win = outcomes[static_cast<std::size_t>(best)];
    auto u = layout.unpack(win.x);
    result.model = std::move(u.model);
    result.restriction = std::move(u.restriction);
    result.loglik = -win.f;
    result.converged = win.converged;
    result.start_index = best;
    return result;
}

GridResult fit_order_grid(const TimeSeriesPanel& panel, int p, const FitOptions& opts) {
    if (p < 1) throw StructuralError("total order p must be >= 1");
    GridResult grid;
    int best = -1;
    for (int r = p; r >= 0; --r) {
        GridCell cell;
        cell.order = ModelOrder{panel.N(), r, p - r};
        FitOptions cell_opts = opts;
        if (cell_opts.initial && !(cell_opts.initial->order == cell.order)) {
            cell_opts.initial.reset();
            cell_opts.start_mode = StartMode::Random;
        }
        std::erase_if(cell_opts.extra_starts, [&](const MultiplicativeVMAR& m) { return !(m.order == cell.order); });
        try {
            cell.fit = fit(panel, cell.order, std::nullopt, cell_opts);
        } catch (const EstimationError& e) {
            cell.error = e.what();
        }
        grid.cells.push_back(std::move(cell));
        const auto& c = grid.cells.back();
        if (c.fit && (best < 0 || c.fit->loglik > grid.cells[static_cast<std::size_t>(best)].fit->loglik)) {
            best = static_cast<int>(grid.cells.size() - 1);
        }
    }
    if (best < 0) throw EstimationError("every (r,s) cell of the order grid failed");
    grid.best = grid.cells[static_cast<std::size_t>(best)].order;
    grid.fit = *grid.cells[static_cast<std::size_t>(best)].fit;
    return grid;
}

GridResult fit_mar_grid(std::span<const double> series, int p, const FitOptions& opts) {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(series.size()), 1);
    for (std::size_t t = 0; t < series.size(); ++t) values(static_cast<Eigen::Index>(t), 0) = series[t];
    return fit_order_grid(TimeSeriesPanel::from_values(std::move(values)), p, opts);
}

}  // namespace vmar
