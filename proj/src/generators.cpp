// generators.cpp: GKSL generators, projections and the pure-decoherence model

#include "memdyn/generators.hpp"

#include <cmath>
#include <sstream>

#include "memdyn/expm.hpp"

namespace memdyn {

namespace {

constexpr cplx kI(0.0, 1.0);

void require_rate(double gamma, const char* what)
{
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument(std::string(what) + " must be a finite nonnegative rate");
    }
}

bool is_idempotent(const Superoperator& p, double tol)
{
    return max_abs(p.matrix() * p.matrix() - p.matrix()) <= tol;
}

}  // namespace

Superoperator gksl_generator(const GKSLSpec& spec)
{
    const auto d = spec.hamiltonian.rows();
    if (d == 0 || spec.hamiltonian.cols() != d) throw DimensionError("Hamiltonian must be square");
    if (hermiticity_error(spec.hamiltonian) > 1e-12) throw std::invalid_argument("Hamiltonian is not Hermitian");
    if (spec.jump_ops.size() != spec.rates.size()) {
        throw DimensionError("jump_ops and rates have different lengths");
    }
    const Matrix id = Matrix::Identity(d, d);
    Matrix l = -kI * (tensor(id, spec.hamiltonian) - tensor(spec.hamiltonian.transpose(), id));
    for (std::size_t k = 0; k < spec.jump_ops.size(); ++k) {
        const Matrix& v = spec.jump_ops[k];
        if (v.rows() != d || v.cols() != d) throw DimensionError("jump operator dimension mismatch");
        const double rate = spec.rates[k];
        if (!(rate >= 0.0) || !std::isfinite(rate)) {
            std::ostringstream os;
            os << "rate " << k << " is negative or not finite";
            throw std::invalid_argument(os.str());
        }
        const Matrix vdv = v.adjoint() * v;
        l += rate * (tensor(v.conjugate(), v) - 0.5 * tensor(id, vdv) - 0.5 * tensor(vdv.transpose(), id));
    }
    return {static_cast<int>(d), std::move(l)};
}

Superoperator depolarizing_generator(int dim, double gamma)
{
    require_rate(gamma, "depolarizing gamma");
    if (dim <= 0) throw DimensionError("dimension must be positive");
    const Vector vec_id = vectorize(Matrix::Identity(dim, dim));
    // Tr(rho) = vec(1)^T vec(rho).
    Matrix m = vec_id * vec_id.transpose() / static_cast<double>(dim);
    m -= Matrix::Identity(dim * dim, dim * dim);
    return {dim, gamma * m};
}

Superoperator dephasing_projector(int dim, const std::vector<Vector>& basis)
{
    if (static_cast<int>(basis.size()) != dim) {
        throw std::invalid_argument("dephasing basis must contain exactly dim vectors");
    }
    Matrix gram(dim, dim);
    for (int a = 0; a < dim; ++a) {
        if (basis[static_cast<std::size_t>(a)].size() != dim) throw DimensionError("basis vector dimension mismatch");
        for (int b = 0; b < dim; ++b) {
            gram(a, b) = basis[static_cast<std::size_t>(a)].dot(basis[static_cast<std::size_t>(b)]);
        }
    }
    if (max_abs(gram - Matrix::Identity(dim, dim)) > 1e-10) {
        throw std::invalid_argument("dephasing basis is not orthonormal");
    }
    Matrix m = Matrix::Zero(dim * dim, dim * dim);
    for (const auto& v : basis) {
        const Matrix p = outer(v);
        m += tensor(p.conjugate(), p);
    }
    return {dim, std::move(m)};
}

Superoperator dephasing_projector(int dim)
{
    std::vector<Vector> basis;
    for (int n = 0; n < dim; ++n) basis.push_back(Vector::Unit(dim, n));
    return dephasing_projector(dim, basis);
}

Superoperator projector_complement_generator(double gamma, const Superoperator& projector)
{
    require_rate(gamma, "projector gamma");
    if (!is_idempotent(projector, 1e-10)) throw std::invalid_argument("projector is not idempotent");
    return -gamma * (Superoperator::identity(projector.dim()) - projector);
}

Superoperator block_projection_channel(int d1, int d2)
{
    if (d1 <= 0 || d2 <= 0) throw DimensionError("factor dimensions must be positive");
    // Product basis |m (x) n> is the computational basis of the composite space.
    return dephasing_projector(d1 * d2);
}

Superoperator amplitude_damping_channel(double g)
{
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("amplitude damping g must lie in (0, 1]");
    Matrix k0 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - g);
    Matrix k1 = Matrix::Zero(2, 2);
    k1(0, 1) = std::sqrt(g);
    const std::vector<Matrix> ops{k0, k1};
    return superop_from_kraus(ops);
}

// ---------------------------------------------------------------- pure decoherence

void DecoherenceModel::validate(const Tolerances& tol) const
{
    const int d = sys_dim();
    const int r = reservoir_dim();
    if (d == 0) throw std::invalid_argument("decoherence model needs at least one level");
    if (r == 0 || reservoir_hamiltonian.cols() != r) throw DimensionError("H_R must be a nonempty square matrix");
    if (hermiticity_error(reservoir_hamiltonian) > tol.hermiticity) throw std::invalid_argument("H_R is not Hermitian");
    if (static_cast<int>(couplings.size()) != d) throw DimensionError("need one coupling operator B_n per level");
    for (std::size_t n = 0; n < couplings.size(); ++n) {
        const Matrix& b = couplings[n];
        if (b.rows() != r || b.cols() != r) throw DimensionError("B_n dimension differs from reservoir dimension");
        if (hermiticity_error(b) > tol.hermiticity) {
            std::ostringstream os;
            os << "B_" << n << " is not Hermitian";
            throw std::invalid_argument(os.str());
        }
    }
    if (reservoir_state.rows() != r || reservoir_state.cols() != r) throw DimensionError("omega_R dimension mismatch");
    DensityMatrix check(reservoir_state, {}, tol);  // throws if omega_R is not a state
    (void)check;
}

Matrix DecoherenceModel::reservoir_operator(int n) const
{
    const auto r = reservoir_hamiltonian.rows();
    return eps[static_cast<std::size_t>(n)] * Matrix::Identity(r, r) + reservoir_hamiltonian +
           couplings[static_cast<std::size_t>(n)];
}

Matrix DecoherenceModel::total_hamiltonian() const
{
    const int d = sys_dim();
    const int r = reservoir_dim();
    Matrix h_s = Matrix::Zero(d, d);
    for (int n = 0; n < d; ++n) h_s(n, n) = eps[static_cast<std::size_t>(n)];
    Matrix h = tensor(h_s, Matrix::Identity(r, r)) + tensor(Matrix::Identity(d, d), reservoir_hamiltonian);
    for (int n = 0; n < d; ++n) h += tensor(matrix_unit(d, n, n), couplings[static_cast<std::size_t>(n)]);
    return h;
}

CoeffMatrix pure_decoherence_coeffs(const DecoherenceModel& model, double t)
{
    model.validate();
    const int d = model.sys_dim();
    std::vector<Matrix> u;
    u.reserve(static_cast<std::size_t>(d));
    for (int n = 0; n < d; ++n) u.push_back(matrix_exp(-kI * t * model.reservoir_operator(n)));
    CoeffMatrix out{t, Matrix(d, d)};
    for (int m = 0; m < d; ++m) {
        const Matrix left = u[static_cast<std::size_t>(m)] * model.reservoir_state;
        for (int n = 0; n < d; ++n) {
            out.c(m, n) = (left * u[static_cast<std::size_t>(n)].adjoint()).trace();
        }
    }
    return out;
}

void check_coeff_matrix(const CoeffMatrix& c, const Tolerances& tol)
{
    if (c.c.rows() != c.c.cols()) throw DimensionError("coefficient matrix must be square");
    for (Eigen::Index m = 0; m < c.c.rows(); ++m) {
        if (std::abs(c.c(m, m) - cplx(1.0, 0.0)) > tol.trace) {
            throw std::invalid_argument("coefficient matrix diagonal differs from 1");
        }
    }
    if (hermiticity_error(c.c) > 1e-10) throw std::invalid_argument("coefficient matrix is not Hermitian");
    const double lo = min_hermitian_eigenvalue(c.c);
    if (lo < -tol.psd) {
        std::ostringstream os;
        os << "coefficient matrix is not positive semidefinite (min eigenvalue " << lo << ")";
        throw std::invalid_argument(os.str());
    }
}

DensityMatrix pure_decoherence_apply(const CoeffMatrix& c, const DensityMatrix& rho)
{
    if (c.c.rows() != rho.dim()) throw DimensionError("coefficient matrix and state dimensions differ");
    check_coeff_matrix(c);
    return DensityMatrix(c.c.cwiseProduct(rho.matrix()), rho.factor_dims());
}

Superoperator pure_decoherence_superop(const CoeffMatrix& c)
{
    const auto d = static_cast<int>(c.c.rows());
    return {d, Matrix(vectorize(c.c).asDiagonal())};
}

Matrix decoherence_phi_action(const DecoherenceModel& model, double tau, const DensityMatrix& rho)
{
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be nonnegative");
    if (rho.dim() != model.sys_dim()) throw DimensionError("state and model dimensions differ");
    const double h = 1e-5 * std::max(1.0, tau);
    // c_mn(t) is defined for all real t, so the stencil may cross t = 0.
    const Matrix dc = (pure_decoherence_coeffs(model, tau + h).c - pure_decoherence_coeffs(model, tau - h).c) /
                      (2.0 * h);
    return dc.cwiseProduct(rho.matrix());
}

double phi_trace_check(const DecoherenceModel& model, double tau, const DensityMatrix& rho)
{
    return std::abs(decoherence_phi_action(model, tau, rho).trace());
}

}  // namespace memdyn
