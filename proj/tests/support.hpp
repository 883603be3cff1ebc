#pragma once

#include <initializer_list>
#include <map>

#include <Eigen/Dense>

#include "vmar/model.hpp"

namespace vmar::test {

inline Matrix mat(int rows, int cols, std::initializer_list<double> v) {
    Matrix m(rows, cols);
    auto it = v.begin();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = *it++;
    return m;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Coefficients of the lead-first (or lag-first) product written out term by
// term: A_j = [j=0] I - [j=m] Phi_m - [j=-l] Psi_l + sum over m-l=j of the
// cross products.
inline std::map<int, Matrix> brute_force_expand(const MultiplicativeVMAR& m) {
    const int N = m.order.N, r = m.order.r, s = m.order.s;
    std::map<int, Matrix> a;
    for (int j = -s; j <= r; ++j) a[j] = Matrix::Zero(N, N);
    a[0] += Matrix::Identity(N, N);
    for (int i = 1; i <= r; ++i) a[i] -= m.phi[i - 1];
    for (int l = 1; l <= s; ++l) a[-l] -= m.psi[l - 1];
    for (int l = 1; l <= s; ++l) {
        for (int i = 1; i <= r; ++i) {
            const Matrix cross = m.representation == Representation::LeadFirst ? Matrix(m.psi[l - 1] * m.phi[i - 1])
                                                                                : Matrix(m.phi[i - 1] * m.psi[l - 1]);
            a[i - l] += cross;
        }
    }
    return a;
}

// Bivariate design with a common bubble: Psi = [1; 2] [0.3, 0.25].
inline MultiplicativeVMAR bivariate_cb(double lambda = 3.0) {
    return make_model({2, 1, 1}, {mat(2, 2, {0.5, 0.1, 0.2, 0.3})}, {mat(2, 2, {0.3, 0.25, 0.6, 0.5})},
                      mat(2, 2, {4.0, 0.5, 0.5, 1.0}), lambda);
}

// Same lags and scale, full-rank leads.
inline MultiplicativeVMAR bivariate_full(double lambda = 3.0) {
    return make_model({2, 1, 1}, {mat(2, 2, {0.5, 0.1, 0.2, 0.3})}, {mat(2, 2, {0.1, 0.4, 0.6, 0.5})},
                      mat(2, 2, {4.0, 0.5, 0.5, 1.0}), lambda);
}

inline MultiplicativeVMAR scalar_model(int r, int s, double phi, double psi, double sigma, double lambda) {
    MatrixList ph, ps;
    if (r > 0) ph.push_back(Matrix::Constant(1, 1, phi));
    if (s > 0) ps.push_back(Matrix::Constant(1, 1, psi));
    return make_model({1, r, s}, ph, ps, Matrix::Constant(1, 1, sigma), lambda);
}

}  // namespace vmar::test
