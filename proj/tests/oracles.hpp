// Independent reference implementations used only by the tests.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "memdyn/qcore.hpp"

namespace oracle {

using memdyn::cplx;
using memdyn::Matrix;

// Tr over one factor of a bipartite operator, by explicit index loops.
inline Matrix partial_trace_loops(const Matrix& x, int d1, int d2, int which)
{
    const int keep = which == 0 ? d2 : d1;
    Matrix out = Matrix::Zero(keep, keep);
    for (int a = 0; a < d1; ++a)
        for (int b = 0; b < d2; ++b)
            for (int c = 0; c < d1; ++c)
                for (int e = 0; e < d2; ++e) {
                    const cplx v = x(a * d2 + b, c * d2 + e);
                    if (which == 0 && a == c) out(b, e) += v;
                    if (which == 1 && b == e) out(a, c) += v;
                }
    return out;
}

inline Matrix partial_transpose_loops(const Matrix& x, int d1, int d2, int which)
{
    Matrix out(x.rows(), x.cols());
    for (int a = 0; a < d1; ++a)
        for (int b = 0; b < d2; ++b)
            for (int c = 0; c < d1; ++c)
                for (int e = 0; e < d2; ++e) {
                    if (which == 0) {
                        out(a * d2 + b, c * d2 + e) = x(c * d2 + b, a * d2 + e);
                    } else {
                        out(a * d2 + b, c * d2 + e) = x(a * d2 + e, c * d2 + b);
                    }
                }
    return out;
}

inline Matrix kraus_apply(const std::vector<Matrix>& ops, const Matrix& rho)
{
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& k : ops) out += k * rho * k.adjoint();
    return out;
}

// e^M through an eigendecomposition; valid for diagonalizable M.
inline Matrix expm_eig(const Matrix& m)
{
    Eigen::ComplexEigenSolver<Matrix> es(m);
    const Matrix v = es.eigenvectors();
    Matrix d = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.rows(); ++k) d(k, k) = std::exp(es.eigenvalues()(k));
    return v * d * v.inverse();
}

inline Matrix expm_hermitian(const Matrix& h, cplx factor)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix d = Matrix::Zero(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < h.rows(); ++k) d(k, k) = std::exp(factor * es.eigenvalues()(k));
    return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

// Tr_R[e^{-iHt}(rho (x) omega)e^{iHt}] with the system factor first.
inline Matrix unitary_dilation(const Matrix& h_total, const Matrix& rho, const Matrix& omega, double t)
{
    const int d = static_cast<int>(rho.rows());
    const int r = static_cast<int>(omega.rows());
    Matrix joint(d * r, d * r);
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) joint.block(a * r, c * r, r, r) = rho(a, c) * omega;
    const Matrix u = expm_hermitian(h_total, cplx(0.0, -t));
    return partial_trace_loops(u * joint * u.adjoint(), d, r, 1);
}

// Choi-free CP check: the map rho -> S(rho) tensored with id on a maximally
// entangled input, built entry by entry.
inline Matrix choi_direct(const memdyn::Superoperator& s)
{
    const int d = s.dim();
    Matrix out = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Matrix eij = Matrix::Zero(d, d);
            eij(i, j) = 1.0;
            const Matrix img = s.apply(eij);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) out(a * d + i, b * d + j) = img(a, b);
        }
    return out;
}

}  // namespace oracle
