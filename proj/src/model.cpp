#include "vmar/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vmar/errors.hpp"

namespace vmar {

namespace {

void require_square(const Matrix& m, int N, const char* what) {
    if (m.rows() != N || m.cols() != N) {
        throw StructuralError(std::string(what) + " must be " + std::to_string(N) + "x" +
                              std::to_string(N) + ", got " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()));
    }
}

// Polynomial in L with coefficients indexed from `lowest` power upward.
struct MatrixPoly {
    int lowest = 0;
    MatrixList coeffs;
};

MatrixPoly lag_factor(const MatrixList& phi, int N) {
    MatrixPoly p{0, {}};
    p.coeffs.push_back(Matrix::Identity(N, N));
    for (const auto& m : phi) p.coeffs.push_back(-m);
    return p;
}

MatrixPoly lead_factor(const MatrixList& psi, int N) {
    const int s = static_cast<int>(psi.size());
    MatrixPoly p{-s, MatrixList(static_cast<std::size_t>(s + 1), Matrix::Zero(N, N))};
    p.coeffs[static_cast<std::size_t>(s)] = Matrix::Identity(N, N);
    for (int j = 1; j <= s; ++j) p.coeffs[static_cast<std::size_t>(s - j)] = -psi[static_cast<std::size_t>(j - 1)];
    return p;
}

MatrixPoly multiply(const MatrixPoly& left, const MatrixPoly& right, int N) {
    MatrixPoly out;
    out.lowest = left.lowest + right.lowest;
    out.coeffs.assign(left.coeffs.size() + right.coeffs.size() - 1, Matrix::Zero(N, N));
    for (std::size_t a = 0; a < left.coeffs.size(); ++a) {
        for (std::size_t b = 0; b < right.coeffs.size(); ++b) {
            out.coeffs[a + b].noalias() += left.coeffs[a] * right.coeffs[b];
        }
    }
    return out;
}

double reciprocal_condition(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

}  // namespace

void ModelOrder::validate() const {
    if (N < 1) throw StructuralError("model dimension N must be >= 1");
    if (r < 0 || s < 0) throw StructuralError("lag and lead orders must be non-negative");
    if (r + s < 1) throw StructuralError("r + s must be >= 1");
}

void MultiplicativeVMAR::validate() const {
    order.validate();
    if (static_cast<int>(phi.size()) != order.r) throw StructuralError("phi must hold r matrices");
    if (static_cast<int>(psi.size()) != order.s) throw StructuralError("psi must hold s matrices");
    for (const auto& m : phi) require_square(m, order.N, "phi");
    for (const auto& m : psi) require_square(m, order.N, "psi");
    require_square(sigma, order.N, "sigma");
    if (!sigma.allFinite()) throw StructuralError("sigma must be finite");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
        throw StructuralError("sigma must be symmetric");
    }
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw StructuralError("sigma must be positive definite");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw StructuralError("lambda must be a positive real");
}

void ReducedRankLeads::validate() const {
    order.validate();
    const int N = order.N;
    if (k <= 0 || k >= N) {
        throw StructuralError("rank deficit k must satisfy 0 < k < N (k=" + std::to_string(k) +
                              ", N=" + std::to_string(N) + ")");
    }
    if (delta_star.rows() != k || delta_star.cols() != N - k) {
        throw StructuralError("delta_star must be k x (N-k)");
    }
    if (static_cast<int>(gammas.size()) != order.s) throw StructuralError("gammas must hold s matrices");
    for (const auto& g : gammas) {
        if (g.rows() != N - k || g.cols() != N) throw StructuralError("each Gamma' must be (N-k) x N");
    }
}

Matrix ReducedRankLeads::delta() const {
    const int N = order.N;
    Matrix d(N, k);
    d.topRows(k).setIdentity();
    d.bottomRows(N - k) = delta_star.transpose();
    return d;
}

Matrix ReducedRankLeads::delta_perp() const {
    const int N = order.N;
    Matrix dp(N, N - k);
    dp.topRows(k) = -delta_star;
    dp.bottomRows(N - k).setIdentity();
    return dp;
}

ExpandedPolynomial expand(const MultiplicativeVMAR& model) {
    const ModelOrder& o = model.order;
    o.validate();
    if (static_cast<int>(model.phi.size()) != o.r || static_cast<int>(model.psi.size()) != o.s) {
        throw StructuralError("coefficient count does not match model order");
    }
    for (const auto& m : model.phi) require_square(m, o.N, "phi");
    for (const auto& m : model.psi) require_square(m, o.N, "psi");

    const MatrixPoly lags = lag_factor(model.phi, o.N);
    const MatrixPoly leads = lead_factor(model.psi, o.N);
    const MatrixPoly prod = model.representation == Representation::LeadFirst
                                ? multiply(leads, lags, o.N)
                                : multiply(lags, leads, o.N);
    return ExpandedPolynomial{o, prod.coeffs};
}

AdditiveVMAR to_additive(const MultiplicativeVMAR& model) {
    const ExpandedPolynomial a = expand(model);
    const ModelOrder& o = model.order;
    const Matrix& a0 = a.at(0);
    if (reciprocal_condition(a0) < kMinReciprocalCondition) {
        throw DegenerateError("A0 is numerically singular; additive form undefined");
    }
    const Eigen::PartialPivLU<Matrix> lu(a0);
    const Matrix a0_inv = lu.inverse();

    AdditiveVMAR out;
    out.order = o;
    out.lambda = model.lambda;
    for (int i = 1; i <= o.r; ++i) out.b_lag.push_back(-(a0_inv * a.at(i)));
    for (int j = 1; j <= o.s; ++j) out.b_lead.push_back(-(a0_inv * a.at(-j)));
    out.omega = a0_inv * model.sigma * a0_inv.transpose();
    out.omega = 0.5 * (out.omega + out.omega.transpose());
    return out;
}

MatrixList build_reduced_rank_leads(const ReducedRankLeads& spec) {
    spec.validate();
    const Matrix dp = spec.delta_perp();
    MatrixList psi;
    psi.reserve(spec.gammas.size());
    for (const auto& g : spec.gammas) psi.push_back(dp * g);
    return psi;
}

ReducedRankLeads project_reduced_rank(const MatrixList& psi, int k) {
    if (psi.empty()) throw StructuralError("reduced-rank projection needs at least one lead matrix");
    const int N = static_cast<int>(psi.front().rows());
    const int s = static_cast<int>(psi.size());
    if (k <= 0 || k >= N) throw StructuralError("rank deficit k must satisfy 0 < k < N");
    const int rank = N - k;

    Matrix stacked(N, N * s);
    for (int j = 0; j < s; ++j) {
        require_square(psi[static_cast<std::size_t>(j)], N, "psi");
        stacked.middleCols(j * N, N) = psi[static_cast<std::size_t>(j)];
    }
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullU | Eigen::ComputeThinV);
    const Matrix u = svd.matrixU().leftCols(rank);
    const Matrix vt = svd.singularValues().head(rank).asDiagonal() * svd.matrixV().leftCols(rank).transpose();

    const Matrix u_bottom = u.bottomRows(rank);
    if (reciprocal_condition(u_bottom) < 1e-8) {
        throw DegenerateError("leading column space cannot be normalized as [-delta_star; I]");
    }
    const Eigen::PartialPivLU<Matrix> lu(u_bottom);
    const Matrix dp = u * lu.inverse();           // bottom block is identity
    const Matrix loadings = u_bottom * vt;        // (N-k) x N s

    ReducedRankLeads out;
    out.order = ModelOrder{N, 0, s};
    out.k = k;
    out.delta_star = -dp.topRows(k);
    for (int j = 0; j < s; ++j) out.gammas.push_back(loadings.middleCols(j * N, N));
    return out;
}

double companion_spectral_radius(const MatrixList& coeffs, int N) {
    const int p = static_cast<int>(coeffs.size());
    if (p == 0) return 0.0;
    if (N == 1 && p == 1) return std::abs(coeffs.front()(0, 0));
    Matrix companion = Matrix::Zero(N * p, N * p);
    for (int i = 0; i < p; ++i) companion.block(0, i * N, N, N) = coeffs[static_cast<std::size_t>(i)];
    if (p > 1) companion.block(N, 0, N * (p - 1), N * (p - 1)).setIdentity();
    if (!companion.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Matrix> es(companion, false);
    if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

StationarityReport check_stationarity(const MultiplicativeVMAR& model, double margin) {
    StationarityReport rep;
    rep.lag_radius = companion_spectral_radius(model.phi, model.order.N);
    rep.lead_radius = companion_spectral_radius(model.psi, model.order.N);
    const double bound = 1.0 - margin;
    rep.stationary = rep.lag_radius < bound && rep.lead_radius < bound;
    return rep;
}

int param_count(const ModelOrder& order, std::optional<int> k) {
    const int N = order.N;
    if (!k) return N * N * (order.r + order.s);
    if (*k <= 0 || *k >= N) throw StructuralError("rank deficit k must satisfy 0 < k < N");
    return N * N * order.r + *k * (N - *k) + order.s * N * (N - *k);
}

int rho(int N, int k, int s) {
    if (k <= 0 || k >= N) throw StructuralError("rank deficit k must satisfy 0 < k < N");
    if (s < 0) throw StructuralError("lead order must be non-negative");
    return k * k - N * k * (1 - s);
}

int rho_nested(int N, int k, int l, int s) {
    if (!(0 < l && l < k && k < N)) throw StructuralError("nested ranks require 0 < l < k < N");
    return rho(N, k, s) - rho(N, l, s);
}

MultiplicativeVMAR make_model(const ModelOrder& order, MatrixList phi, MatrixList psi, Matrix sigma,
                              double lambda, Representation representation) {
    MultiplicativeVMAR m{order, std::move(phi), std::move(psi), std::move(sigma), lambda, representation};
    m.validate();
    return m;
}

}  // namespace vmar
