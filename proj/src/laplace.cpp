// laplace.cpp: Laplace-domain analysis: transforms, generator relation, asymptotics

#include "memdyn/laplace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>

namespace memdyn {

namespace {

// Gauss-Kronrod 7/15 abscissae (positive half) and weights.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a;
    double b;
    Matrix value;
    double error;

    bool operator<(const Interval& o) const { return error < o.error; }
};

Interval integrate_piece(const std::function<Matrix(double)>& h, double a, double b)
{
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const Matrix fc = h(centre);
    Matrix kronrod = kKronrod[7] * fc;
    Matrix gauss = kGauss[3] * fc;
    for (std::size_t k = 0; k < 7; ++k) {
        const Matrix sum = h(centre - half * kNodes[k]) + h(centre + half * kNodes[k]);
        kronrod += kKronrod[k] * sum;
        if (k % 2 == 1) gauss += kGauss[k / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, max_abs(kronrod - gauss)};
}

double reciprocal_condition(const Matrix& m)
{
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

Matrix solve_checked(const Matrix& a, const Matrix& rhs, double reg, const char* what)
{
    const double rcond = reciprocal_condition(a);
    if (!(rcond >= reg)) {
        std::ostringstream os;
        os << what << " is singular or ill-conditioned (reciprocal condition " << rcond << ")";
        throw NumericalError(os.str());
    }
    return a.partialPivLu().solve(rhs);
}

Matrix superop_from_modes(const DampingBasis& basis, const std::vector<cplx>& coeffs)
{
    const auto n2 = basis.right_ops.front().size();
    Matrix m = Matrix::Zero(n2, n2);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        m += coeffs[a] * vectorize(basis.right_ops[a]) * vectorize(basis.left_ops[a]).adjoint();
    }
    return m;
}

}  // namespace

// ---------------------------------------------------------------- transforms

LaplaceResult numerical_laplace(const std::function<Matrix(double)>& g, cplx s, const LaplaceOptions& opts)
{
    if (!(s.real() > 0.0)) throw std::invalid_argument("Laplace transform needs Re(s) > 0");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("Laplace tolerance must be positive");
    const double rate = s.real() + std::max(0.0, opts.decay_rate);
    const Matrix g0 = g(0.0);
    const double scale = std::max(1.0, max_abs(g0));

    LaplaceResult result;
    result.t_max = opts.t_max.value_or(std::log(scale / (opts.tol * rate)) / rate);
    if (!(result.t_max > 0.0)) throw std::invalid_argument("Laplace truncation point must be positive");

    auto integrand = [&](double t) -> Matrix {
        Matrix v = std::exp(-s * t) * g(t);
        if (!v.allFinite()) throw NumericalError("Laplace integrand is not finite");
        return v;
    };

    // Start from pieces about one decay length wide.
    const int pieces = std::clamp(static_cast<int>(std::ceil(result.t_max * rate)), 1, 400);
    std::priority_queue<Interval> queue;
    for (int k = 0; k < pieces; ++k) {
        const double a = result.t_max * k / pieces;
        const double b = result.t_max * (k + 1) / pieces;
        queue.push(integrate_piece(integrand, a, b));
    }

    auto total_error = [&]() {
        double e = 0.0;
        auto copy = queue;
        while (!copy.empty()) {
            e += copy.top().error;
            copy.pop();
        }
        return e;
    };

    double err = total_error();
    int intervals = pieces;
    while (err > opts.tol) {
        if (intervals >= opts.max_intervals) {
            std::ostringstream os;
            os << "Laplace quadrature did not converge: error " << err << " after " << intervals << " intervals";
            throw NumericalError(os.str());
        }
        Interval worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Interval left = integrate_piece(integrand, worst.a, mid);
        Interval right = integrate_piece(integrand, mid, worst.b);
        err += left.error + right.error - worst.error;
        queue.push(std::move(left));
        queue.push(std::move(right));
        ++intervals;
        // Re-sum periodically to shed accumulated rounding in the running total.
        if (intervals % 256 == 0) err = total_error();
    }

    result.value = Matrix::Zero(g0.rows(), g0.cols());
    while (!queue.empty()) {
        result.value += queue.top().value;
        queue.pop();
    }
    result.quadrature_error = err;
    result.truncation_error = max_abs(g(result.t_max)) * std::exp(-s.real() * result.t_max) / rate;
    return result;
}

cplx numerical_laplace_scalar(const std::function<cplx(double)>& g, cplx s, const LaplaceOptions& opts)
{
    auto wrapped = [&g](double t) {
        Matrix m(1, 1);
        m(0, 0) = g(t);
        return m;
    };
    return numerical_laplace(wrapped, s, opts).value(0, 0);
}

Superoperator numerical_laplace_superop(const std::function<Superoperator(double)>& g, cplx s,
                                        const LaplaceOptions& opts)
{
    const int d = g(0.0).dim();
    auto wrapped = [&g](double t) { return g(t).matrix(); };
    return {d, numerical_laplace(wrapped, s, opts).value};
}

// ---------------------------------------------------------------- generator relation

Superoperator generator_laplace_from_phi(const Superoperator& phi_s, cplx s, double reg)
{
    const int d = phi_s.dim();
    const Matrix lhs = Matrix::Identity(d * d, d * d) + phi_s.matrix();
    // Phi~ and (id + Phi~)^{-1} commute, so solving from the left is exact.
    return {d, solve_checked(lhs, s * phi_s.matrix(), reg, "id + Phi~_s")};
}

Superoperator identity_mixture_generator_laplace(const Superoperator& generator, double p, cplx s)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mixing parameter p must lie in [0, 1]");
    const int d = generator.dim();
    const Matrix& l = generator.matrix();
    const Matrix resolvent_arg = s * Matrix::Identity(d * d, d * d) - p * l;
    const Matrix tail = resolvent_arg.partialPivLu().solve(l * l);
    return {d, (1.0 - p) * l + p * (1.0 - p) * tail};
}

// ---------------------------------------------------------------- final values

Matrix final_value_limit(const std::function<Matrix(double)>& g)
{
    constexpr std::array<double, 3> nodes = {1e-4, 1e-5, 1e-6};
    Matrix out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        // Lagrange weight of node k for extrapolation to s = 0.
        double w = 1.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j != k) w *= (0.0 - nodes[j]) / (nodes[k] - nodes[j]);
        }
        const Matrix v = g(nodes[k]);
        out = (k == 0) ? Matrix(w * v) : Matrix(out + w * v);
    }
    return out;
}

Superoperator semigroup_limit(const Superoperator& generator)
{
    const int d = generator.dim();
    const auto n2 = static_cast<Eigen::Index>(d) * d;
    auto s_resolvent = [&](double s) -> Matrix {
        const Matrix a = s * Matrix::Identity(n2, n2) - generator.matrix();
        return s * a.partialPivLu().solve(Matrix::Identity(n2, n2));
    };
    return {d, final_value_limit(s_resolvent)};
}

Superoperator asymptotic_identity_mixture(const Superoperator& generator, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mixing parameter p must lie in [0, 1]");
    return (1.0 - p) * semigroup_limit(generator) + p * Superoperator::identity(generator.dim());
}

Superoperator asymptotic_projector_mixture(const Superoperator& generator, double p, double gamma,
                                           const Superoperator& projector)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mixing parameter p must lie in [0, 1]");
    if (!(gamma >= 0.0)) throw std::invalid_argument("projector gamma must be nonnegative");
    const Superoperator id = Superoperator::identity(generator.dim());
    // s/(s + gamma) -> 0 for gamma > 0 and stays 1 for gamma = 0.
    const Superoperator tail = gamma > 0.0 ? projector : id;
    return (1.0 - p) * semigroup_limit(generator) + p * tail;
}

Superoperator asymptotic_channel_memory(double f0, const Superoperator& channel, double reg)
{
    if (!(f0 >= 0.0 && f0 <= 1.0)) throw std::invalid_argument("f~(0) must lie in [0, 1]");
    const int d = channel.dim();
    const auto n2 = static_cast<Eigen::Index>(d) * d;
    const Matrix id = Matrix::Identity(n2, n2);
    if (f0 < 1.0) {
        const Matrix a = id - f0 * channel.matrix();
        return {d, solve_checked(a, (1.0 - f0) * id, reg, "id - f0 B")};
    }
    if (max_abs(channel.matrix() * channel.matrix() - channel.matrix()) <= 1e-10) return channel;

    const DampingBasis basis = damping_basis(channel);
    const auto unit = basis.unit_modes();
    if (unit.size() != 1) {
        std::ostringstream os;
        os << "f~(0) = 1 needs a unique fixed point, but eigenvalue 1 has multiplicity " << unit.size();
        throw std::invalid_argument(os.str());
    }
    std::vector<cplx> coeffs(basis.size(), 0.0);
    coeffs[unit.front()] = 1.0;
    return {d, superop_from_modes(basis, coeffs)};
}

// ---------------------------------------------------------------- damping basis

Matrix DampingBasis::apply(const Matrix& rho) const
{
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (std::size_t a = 0; a < size(); ++a) {
        out += eigenvalues[a] * right_ops[a] * (left_ops[a].adjoint() * rho).trace();
    }
    return out;
}

std::vector<std::size_t> DampingBasis::unit_modes(double tol) const
{
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < size(); ++a) {
        if (std::abs(eigenvalues[a] - cplx(1.0, 0.0)) <= tol) out.push_back(a);
    }
    return out;
}

DampingBasis damping_basis(const Superoperator& channel)
{
    Eigen::ComplexEigenSolver<Matrix> es(channel.matrix());
    if (es.info() != Eigen::Success) throw NumericalError("complex eigensolver failed on channel");
    const Matrix& v = es.eigenvectors();
    const double rcond = reciprocal_condition(v);
    if (!(rcond > 1e-7)) {
        std::ostringstream os;
        os << "channel is not diagonalizable (eigenvector reciprocal condition " << rcond << ")";
        throw NumericalError(os.str());
    }
    // Rows of V^{-1} are the left eigenvectors, already bi-orthogonal to V.
    const Matrix w = v.partialPivLu().inverse();

    DampingBasis basis;
    const auto n2 = v.rows();
    for (Eigen::Index a = 0; a < n2; ++a) {
        basis.eigenvalues.push_back(es.eigenvalues()(a));
        basis.right_ops.push_back(devectorize(v.col(a)));
        basis.left_ops.push_back(devectorize(w.row(a).adjoint()));
    }

    const auto unit = basis.unit_modes();
    if (unit.size() == 1) {
        const std::size_t k = unit.front();
        const cplx tr = basis.right_ops[k].trace();
        if (std::abs(tr) > 1e-12) {
            basis.right_ops[k] /= tr;
            basis.left_ops[k] *= std::conj(tr);
            basis.eigenvalues[k] = 1.0;
            std::swap(basis.eigenvalues[0], basis.eigenvalues[k]);
            std::swap(basis.right_ops[0], basis.right_ops[k]);
            std::swap(basis.left_ops[0], basis.left_ops[k]);
            basis.fixed_index = 0;
        }
    }
    return basis;
}

Matrix asymptotic_via_damping_basis(double f0, const DampingBasis& basis, const Matrix& rho)
{
    if (!(f0 >= 0.0 && f0 <= 1.0)) throw std::invalid_argument("f~(0) must lie in [0, 1]");
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (std::size_t a = 0; a < basis.size(); ++a) {
        const cplx b = basis.eigenvalues[a];
        cplx coeff = 1.0;
        if (std::abs(b - cplx(1.0, 0.0)) > 1e-8) {
            const cplx denom = 1.0 - f0 * b;
            if (std::abs(denom) < 1e-12) {
                std::ostringstream os;
                os << "resonance f0 * b = 1 at mode " << a;
                throw NumericalError(os.str());
            }
            coeff = (1.0 - f0) / denom;
        }
        out += coeff * basis.right_ops[a] * (basis.left_ops[a].adjoint() * rho).trace();
    }
    return out;
}

Superoperator markovian_spectral_propagator(const DampingBasis& basis, double gamma, double t)
{
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    std::vector<cplx> coeffs;
    coeffs.reserve(basis.size());
    for (const cplx b : basis.eigenvalues) coeffs.push_back(std::exp(gamma * (b - 1.0) * t));
    const int d = static_cast<int>(basis.right_ops.front().rows());
    return {d, superop_from_modes(basis, coeffs)};
}

double final_value_check(const std::function<Superoperator(double)>& lambda, double t_large,
                         const Superoperator& predicted)
{
    if (!(t_large > 0.0)) throw std::invalid_argument("t_large must be positive");
    return max_abs(lambda(t_large).matrix() - predicted.matrix());
}

Matrix decoherence_kernel_laplace(const DecoherenceModel& model, cplx s, const LaplaceOptions& opts)
{
    model.validate();
    auto coeffs = [&model](double t) { return pure_decoherence_coeffs(model, t).c; };
    const Matrix c_s = numerical_laplace(coeffs, s, opts).value;
    Matrix kappa(c_s.rows(), c_s.cols());
    for (Eigen::Index m = 0; m < c_s.rows(); ++m) {
        for (Eigen::Index n = 0; n < c_s.cols(); ++n) {
            if (std::abs(c_s(m, n)) < 1e-300) throw NumericalError("c~_mn(s) vanishes");
            kappa(m, n) = (s * c_s(m, n) - 1.0) / c_s(m, n);
        }
    }
    return kappa;
}

}  // namespace memdyn
