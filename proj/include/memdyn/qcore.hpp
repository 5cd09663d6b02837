// qcore.hpp: states, superoperators, Choi matrices and tensor structure

#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace memdyn {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Default numerical tolerances. Every check that takes a tolerance accepts
// an override; these are only the defaults.
struct Tolerances {
    double hermiticity = 1e-12;
    double trace = 1e-12;
    double psd = 1e-10;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a computation produces a non-finite value or otherwise fails
// numerically; `step` is the time-step index when one applies, -1 otherwise.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, long step = -1)
        : std::runtime_error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// A validated quantum state.
///
/// Construction symmetrizes (A + A^dagger)/2 and rescales to unit trace when
/// the input is within tolerance of a density matrix, and throws otherwise.
/// `factor_dims` optionally records a tensor-product structure; factor 0 is
/// the leftmost factor.
class DensityMatrix {
public:
    explicit DensityMatrix(const Matrix& data,
                           std::vector<int> factor_dims = {},
                           const Tolerances& tol = {});

    static DensityMatrix pure(const Vector& psi, std::vector<int> factor_dims = {});
    static DensityMatrix maximally_mixed(int dim, std::vector<int> factor_dims = {});

    int dim() const noexcept { return static_cast<int>(data_.rows()); }
    const Matrix& matrix() const noexcept { return data_; }
    const std::vector<int>& factor_dims() const noexcept { return factor_dims_; }
    bool has_factors() const noexcept { return !factor_dims_.empty(); }

    DensityMatrix with_factors(std::vector<int> factor_dims) const;

private:
    Matrix data_;
    std::vector<int> factor_dims_;
};

/// Linear map on d x d matrices stored as a d^2 x d^2 matrix in the
/// column-stacking convention vec(A X B) = (B^T kron A) vec(X).
class Superoperator {
public:
    Superoperator(int dim, Matrix matrix);

    static Superoperator identity(int dim);
    static Superoperator zero(int dim);

    int dim() const noexcept { return dim_; }
    const Matrix& matrix() const noexcept { return matrix_; }

    Matrix apply(const Matrix& x) const;

    Superoperator operator+(const Superoperator& o) const;
    Superoperator operator-(const Superoperator& o) const;
    Superoperator operator*(const Superoperator& o) const;  // composition, this after o
    Superoperator operator*(cplx a) const;
    Superoperator operator*(double a) const { return *this * cplx(a, 0.0); }
    friend Superoperator operator*(double a, const Superoperator& s) { return s * a; }
    friend Superoperator operator*(cplx a, const Superoperator& s) { return s * a; }

private:
    int dim_;
    Matrix matrix_;
};

struct ChoiMatrix {
    int dim = 0;
    Matrix matrix;
};

struct CPTPReport {
    double min_choi_eigenvalue = 0.0;
    double trace_preservation_error = 0.0;
    double hermiticity_error = 0.0;
    double tolerance = 0.0;
    bool is_cp = false;
    bool is_tp = false;

    bool is_cptp() const noexcept { return is_cp && is_tp; }
};

Vector vectorize(const Matrix& x);
Vector vectorize(const DensityMatrix& rho);
Matrix devectorize(const Vector& v);

Matrix apply_superop(const Superoperator& s, const DensityMatrix& rho);

/// Sum_k conj(K_k) kron K_k. Trace preservation is not enforced; see is_cptp.
Superoperator superop_from_kraus(std::span<const Matrix> kraus_ops);

/// Choi = sum_ij S(|i><j|) kron |i><j|; the map acts on the first factor.
ChoiMatrix choi_matrix(const Superoperator& s);
Superoperator superop_from_choi(const ChoiMatrix& choi);

CPTPReport is_cptp(const Superoperator& s, double tol = 1e-10);

Matrix tensor(const Matrix& a, const Matrix& b);

DensityMatrix partial_trace(const DensityMatrix& rho, int which);
Matrix partial_transpose(const DensityMatrix& rho, int which);
// Raw-matrix variants for intermediate results that are not yet states.
Matrix partial_trace(const Matrix& x, std::span<const int> factor_dims, int which);
Matrix partial_transpose(const Matrix& x, std::span<const int> factor_dims, int which);

/// Eigenvalues of the Hermitian part of x, ascending.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& x);
double min_hermitian_eigenvalue(const Matrix& x);

/// Sum of singular values.
double trace_norm(const Matrix& x);
double trace_distance(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& x);
double hermiticity_error(const Matrix& x);

/// Projector |psi><psi|.
Matrix outer(const Vector& psi);
/// |i><j| in dimension d.
Matrix matrix_unit(int dim, int i, int j);

}  // namespace memdyn
