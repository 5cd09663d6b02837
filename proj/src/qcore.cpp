// qcore.cpp: states, superoperators, Choi matrices and tensor structure

#include "memdyn/qcore.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace memdyn {

namespace {

int product(std::span<const int> dims)
{
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

void check_factor_dims(std::span<const int> dims, int total)
{
    for (int d : dims) {
        if (d <= 0) throw DimensionError("factor dimensions must be positive");
    }
    if (product(dims) != total) {
        std::ostringstream os;
        os << "factor dimensions multiply to " << product(dims) << ", expected " << total;
        throw DimensionError(os.str());
    }
}

struct Split {
    int left;
    int mid;
    int right;
};

Split split_at(std::span<const int> dims, int which)
{
    if (dims.empty()) throw DimensionError("operation requires factor_dims");
    if (which < 0 || which >= static_cast<int>(dims.size())) {
        throw DimensionError("subsystem index out of range");
    }
    Split s{1, dims[static_cast<std::size_t>(which)], 1};
    for (int k = 0; k < which; ++k) s.left *= dims[static_cast<std::size_t>(k)];
    for (int k = which + 1; k < static_cast<int>(dims.size()); ++k) {
        s.right *= dims[static_cast<std::size_t>(k)];
    }
    return s;
}

void require_square(const Matrix& x, const char* what)
{
    if (x.rows() != x.cols() || x.rows() == 0) {
        throw DimensionError(std::string(what) + " must be a nonempty square matrix");
    }
}

}  // namespace

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(const Matrix& data, std::vector<int> factor_dims, const Tolerances& tol)
    : factor_dims_(std::move(factor_dims))
{
    require_square(data, "density matrix");
    if (!data.allFinite()) throw NumericalError("density matrix has non-finite entries");
    if (!factor_dims_.empty()) check_factor_dims(factor_dims_, static_cast<int>(data.rows()));

    const double herm = hermiticity_error(data);
    if (herm > tol.hermiticity) {
        std::ostringstream os;
        os << "density matrix is not Hermitian (error " << herm << ")";
        throw std::invalid_argument(os.str());
    }
    const cplx tr = data.trace();
    if (std::abs(tr - cplx(1.0, 0.0)) > tol.trace) {
        std::ostringstream os;
        os << "density matrix trace " << tr.real() << " differs from 1";
        throw std::invalid_argument(os.str());
    }
    data_ = (data + data.adjoint()) * 0.5;
    data_ /= data_.trace().real();
    const double lo = min_hermitian_eigenvalue(data_);
    if (lo < -tol.psd) {
        std::ostringstream os;
        os << "density matrix is not positive semidefinite (min eigenvalue " << lo << ")";
        throw std::invalid_argument(os.str());
    }
}

DensityMatrix DensityMatrix::pure(const Vector& psi, std::vector<int> factor_dims)
{
    const double n = psi.norm();
    if (n == 0.0 || !std::isfinite(n)) throw std::invalid_argument("state vector has zero norm");
    return DensityMatrix(outer(psi / n), std::move(factor_dims));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim, std::vector<int> factor_dims)
{
    if (dim <= 0) throw DimensionError("dimension must be positive");
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim), std::move(factor_dims));
}

DensityMatrix DensityMatrix::with_factors(std::vector<int> factor_dims) const
{
    return DensityMatrix(data_, std::move(factor_dims));
}

// ---------------------------------------------------------------- Superoperator

Superoperator::Superoperator(int dim, Matrix matrix)
    : dim_(dim), matrix_(std::move(matrix))
{
    if (dim <= 0) throw DimensionError("superoperator dimension must be positive");
    if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) {
        std::ostringstream os;
        os << "superoperator on d=" << dim << " needs a " << dim * dim << "x" << dim * dim
           << " matrix, got " << matrix_.rows() << "x" << matrix_.cols();
        throw DimensionError(os.str());
    }
}

Superoperator Superoperator::identity(int dim)
{
    return {dim, Matrix::Identity(dim * dim, dim * dim)};
}

Superoperator Superoperator::zero(int dim)
{
    return {dim, Matrix::Zero(dim * dim, dim * dim)};
}

Matrix Superoperator::apply(const Matrix& x) const
{
    if (x.rows() != dim_ || x.cols() != dim_) {
        throw DimensionError("superoperator applied to a matrix of the wrong dimension");
    }
    return devectorize(matrix_ * vectorize(x));
}

Superoperator Superoperator::operator+(const Superoperator& o) const
{
    if (o.dim_ != dim_) throw DimensionError("superoperator dimension mismatch");
    return {dim_, matrix_ + o.matrix_};
}

Superoperator Superoperator::operator-(const Superoperator& o) const
{
    if (o.dim_ != dim_) throw DimensionError("superoperator dimension mismatch");
    return {dim_, matrix_ - o.matrix_};
}

Superoperator Superoperator::operator*(const Superoperator& o) const
{
    if (o.dim_ != dim_) throw DimensionError("superoperator dimension mismatch");
    return {dim_, matrix_ * o.matrix_};
}

Superoperator Superoperator::operator*(cplx a) const
{
    return {dim_, matrix_ * a};
}

// ---------------------------------------------------------------- vectorization

Vector vectorize(const Matrix& x)
{
    // Eigen storage is column-major, so the raw buffer is already column-stacked.
    return Eigen::Map<const Vector>(x.data(), x.size());
}

Vector vectorize(const DensityMatrix& rho)
{
    return vectorize(rho.matrix());
}

Matrix devectorize(const Vector& v)
{
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw DimensionError("vector length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

Matrix apply_superop(const Superoperator& s, const DensityMatrix& rho)
{
    if (s.dim() != rho.dim()) throw DimensionError("superoperator and state dimensions differ");
    return s.apply(rho.matrix());
}

Superoperator superop_from_kraus(std::span<const Matrix> kraus_ops)
{
    if (kraus_ops.empty()) throw std::invalid_argument("Kraus list is empty");
    const auto d = kraus_ops.front().rows();
    Matrix m = Matrix::Zero(d * d, d * d);
    for (const auto& k : kraus_ops) {
        if (k.rows() != d || k.cols() != d) throw DimensionError("Kraus operators must share one square dimension");
        m += tensor(k.conjugate(), k);
    }
    return {static_cast<int>(d), std::move(m)};
}

// ---------------------------------------------------------------- Choi

ChoiMatrix choi_matrix(const Superoperator& s)
{
    const int d = s.dim();
    Matrix choi = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            choi += tensor(s.apply(matrix_unit(d, i, j)), matrix_unit(d, i, j));
        }
    }
    return {d, std::move(choi)};
}

Superoperator superop_from_choi(const ChoiMatrix& choi)
{
    const int d = choi.dim;
    if (choi.matrix.rows() != d * d || choi.matrix.cols() != d * d) {
        throw DimensionError("Choi matrix has the wrong shape");
    }
    // Choi[(a,i),(b,j)] = S(|i><j|)[a,b]; column i + d*j of S is vec(S(|i><j|)).
    Matrix m(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    m(a + d * b, i + d * j) = choi.matrix(a * d + i, b * d + j);
                }
            }
        }
    }
    return {d, std::move(m)};
}

CPTPReport is_cptp(const Superoperator& s, double tol)
{
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const int d = s.dim();
    CPTPReport r;
    r.tolerance = tol;
    r.min_choi_eigenvalue = min_hermitian_eigenvalue(choi_matrix(s).matrix);

    double tp = 0.0;
    double herm = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const Matrix out = s.apply(matrix_unit(d, i, j));
            const cplx expected = (i == j) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            tp = std::max(tp, std::abs(out.trace() - expected));
            // Hermiticity preservation: S(|j><i|) must equal S(|i><j|)^dagger.
            herm = std::max(herm, max_abs(s.apply(matrix_unit(d, j, i)) - out.adjoint()));
        }
    }
    r.trace_preservation_error = tp;
    r.hermiticity_error = herm;
    r.is_cp = r.min_choi_eigenvalue >= -tol;
    r.is_tp = r.trace_preservation_error <= tol;
    return r;
}

// ---------------------------------------------------------------- tensor structure

Matrix tensor(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix partial_trace(const Matrix& x, std::span<const int> factor_dims, int which)
{
    require_square(x, "partial trace input");
    check_factor_dims(factor_dims, static_cast<int>(x.rows()));
    const Split s = split_at(factor_dims, which);
    const int out_dim = s.left * s.right;
    Matrix out = Matrix::Zero(out_dim, out_dim);
    for (int l = 0; l < s.left; ++l) {
        for (int r = 0; r < s.right; ++r) {
            for (int lp = 0; lp < s.left; ++lp) {
                for (int rp = 0; rp < s.right; ++rp) {
                    cplx acc = 0.0;
                    for (int w = 0; w < s.mid; ++w) {
                        acc += x((l * s.mid + w) * s.right + r, (lp * s.mid + w) * s.right + rp);
                    }
                    out(l * s.right + r, lp * s.right + rp) = acc;
                }
            }
        }
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, int which)
{
    const auto& dims = rho.factor_dims();
    Matrix out = partial_trace(rho.matrix(), dims, which);
    std::vector<int> rest;
    for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
        if (k != which) rest.push_back(dims[static_cast<std::size_t>(k)]);
    }
    if (rest.size() == 1) rest.clear();
    return DensityMatrix(out, std::move(rest));
}

Matrix partial_transpose(const Matrix& x, std::span<const int> factor_dims, int which)
{
    require_square(x, "partial transpose input");
    check_factor_dims(factor_dims, static_cast<int>(x.rows()));
    const Split s = split_at(factor_dims, which);
    Matrix out(x.rows(), x.cols());
    for (int l = 0; l < s.left; ++l) {
        for (int w = 0; w < s.mid; ++w) {
            for (int r = 0; r < s.right; ++r) {
                for (int lp = 0; lp < s.left; ++lp) {
                    for (int wp = 0; wp < s.mid; ++wp) {
                        for (int rp = 0; rp < s.right; ++rp) {
                            out((l * s.mid + w) * s.right + r, (lp * s.mid + wp) * s.right + rp) =
                                x((l * s.mid + wp) * s.right + r, (lp * s.mid + w) * s.right + rp);
                        }
                    }
                }
            }
        }
    }
    return out;
}

Matrix partial_transpose(const DensityMatrix& rho, int which)
{
    return partial_transpose(rho.matrix(), rho.factor_dims(), which);
}

// ---------------------------------------------------------------- spectra and norms

Eigen::VectorXd hermitian_eigenvalues(const Matrix& x)
{
    require_square(x, "eigenvalue input");
    const Matrix h = (x + x.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
    return es.eigenvalues();
}

double min_hermitian_eigenvalue(const Matrix& x)
{
    return hermitian_eigenvalues(x).minCoeff();
}

double trace_norm(const Matrix& x)
{
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues().sum();
}

double trace_distance(const Matrix& a, const Matrix& b)
{
    return 0.5 * trace_norm(a - b);
}

double max_abs(const Matrix& x)
{
    return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

double hermiticity_error(const Matrix& x)
{
    return max_abs(x - x.adjoint());
}

Matrix outer(const Vector& psi)
{
    return psi * psi.adjoint();
}

Matrix matrix_unit(int dim, int i, int j)
{
    Matrix e = Matrix::Zero(dim, dim);
    e(i, j) = 1.0;
    return e;
}

}  // namespace memdyn
