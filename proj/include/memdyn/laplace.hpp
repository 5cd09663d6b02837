// laplace.hpp: Laplace-domain analysis: transforms, generator relation, asymptotics

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "memdyn/generators.hpp"
#include "memdyn/qcore.hpp"

namespace memdyn {

struct LaplaceOptions {
    /// Absolute tolerance for both the quadrature and the truncated tail.
    double tol = 1e-10;
    /// Upper integration limit; derived from tol and decay_rate when unset.
    std::optional<double> t_max;
    /// Known exponential decay rate of the integrand (0 if none).
    double decay_rate = 0.0;
    int max_intervals = 20000;
};

struct LaplaceResult {
    Matrix value;
    double quadrature_error = 0.0;
    double truncation_error = 0.0;
    double t_max = 0.0;
};

/// int_0^{t_max} e^{-s t} g(t) dt by adaptive Gauss-Kronrod (7/15) quadrature.
/// Throws NumericalError if the error target is not met within max_intervals.
LaplaceResult numerical_laplace(const std::function<Matrix(double)>& g, cplx s, const LaplaceOptions& opts = {});
cplx numerical_laplace_scalar(const std::function<cplx(double)>& g, cplx s, const LaplaceOptions& opts = {});
Superoperator numerical_laplace_superop(const std::function<Superoperator(double)>& g, cplx s,
                                        const LaplaceOptions& opts = {});

/// L~_s = s Phi~_s (id + Phi~_s)^{-1}, via an LU solve. Throws if the
/// reciprocal condition number of id + Phi~_s falls below reg.
Superoperator generator_laplace_from_phi(const Superoperator& phi_s, cplx s, double reg = 1e-12);

/// Closed form of L~_s for (1 - p)e^{tL} + p id:
/// (1 - p)L + p(1 - p)L^2 (s - pL)^{-1}.
Superoperator identity_mixture_generator_laplace(const Superoperator& generator, double p, cplx s);

/// lim_{s->0} g(s) by quadratic extrapolation from s in {1e-4, 1e-5, 1e-6}.
Matrix final_value_limit(const std::function<Matrix(double)>& g);

/// lim_{t->inf} e^{tL} = lim_{s->0} s (s - L)^{-1}.
Superoperator semigroup_limit(const Superoperator& generator);

/// (1 - p) lim e^{tL} + p id.
Superoperator asymptotic_identity_mixture(const Superoperator& generator, double p);

/// (1 - p) lim e^{tL} + p P for gamma > 0, reducing to the identity mixture at gamma = 0.
Superoperator asymptotic_projector_mixture(const Superoperator& generator, double p, double gamma,
                                           const Superoperator& projector);

/// Lambda_inf = (1 - f0)(id - f0 B)^{-1}. At f0 = 1 this is B itself for an
/// idempotent B, or the projection onto the unique fixed point otherwise.
Superoperator asymptotic_channel_memory(double f0, const Superoperator& channel, double reg = 1e-12);

/// B rho = sum_a b_a F_a Tr(G_a^dag rho) with Tr(G_a^dag F_b) = delta_ab.
struct DampingBasis {
    std::vector<cplx> eigenvalues;
    std::vector<Matrix> right_ops;
    std::vector<Matrix> left_ops;
    /// Index of the unique eigenvalue-1 mode, normalised to F_0 = rho_0 and
    /// G_0 = 1 and moved to the front; empty if that eigenvalue is absent or
    /// degenerate.
    std::optional<std::size_t> fixed_index;

    std::size_t size() const noexcept { return eigenvalues.size(); }
    Matrix apply(const Matrix& rho) const;
    /// Indices whose eigenvalue lies within tol of 1.
    std::vector<std::size_t> unit_modes(double tol = 1e-8) const;
};

/// Throws NumericalError when B is (numerically) not diagonalizable.
DampingBasis damping_basis(const Superoperator& channel);

/// Lambda_inf rho = sum_a c_a F_a Tr(G_a^dag rho), with c_a = 1 on the
/// eigenvalue-1 sector and (1 - f0)/(1 - f0 b_a) elsewhere.
Matrix asymptotic_via_damping_basis(double f0, const DampingBasis& basis, const Matrix& rho);

/// Lambda_t^M = sum_a e^{gamma (b_a - 1) t} F_a Tr(G_a^dag .), the semigroup of
/// kappa(t) = 2 gamma delta(t).
Superoperator markovian_spectral_propagator(const DampingBasis& basis, double gamma, double t);

/// max |Lambda_{t_large} - predicted| entrywise.
double final_value_check(const std::function<Superoperator(double)>& lambda, double t_large,
                         const Superoperator& predicted);

/// kappa~_mn(s) = (s c~_mn(s) - 1)/c~_mn(s) for the pure-decoherence model.
Matrix decoherence_kernel_laplace(const DecoherenceModel& model, cplx s, const LaplaceOptions& opts = {});

}  // namespace memdyn
