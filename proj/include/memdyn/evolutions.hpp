// evolutions.hpp: closed-form propagators, memory kernels and a Volterra integrator

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "memdyn/qcore.hpp"

namespace memdyn {

using PropagatorFn = std::function<Superoperator(double)>;

// ---------------------------------------------------------------- memory functions

/// Scalar memory function f(t) >= 0 with int_0^inf f <= 1.
class MemoryFn {
public:
    struct Exponential {
        double eps;
        double gamma;
    };
    struct Tabulated {
        std::vector<double> grid;
        std::vector<double> values;
    };

    /// f(t) = eps gamma e^{-gamma t}, eps in (0, 1], gamma > 0.
    static MemoryFn exponential(double eps, double gamma);
    /// Piecewise-linear f on the grid (starting at 0), zero past the last node.
    static MemoryFn tabulated(std::vector<double> grid, std::vector<double> values);

    double value(double t) const;
    /// F(t) = int_0^t f.
    double cumulative(double t) const;
    /// f~(0) = int_0^inf f.
    double laplace0() const;
    /// f~(s) for real s > 0.
    double laplace(double s) const;
    /// Slowest decay rate, used to size Laplace truncation; 0 for tabulated.
    double decay_rate() const;

    const std::variant<Exponential, Tabulated>& kind() const noexcept { return kind_; }

private:
    explicit MemoryFn(std::variant<Exponential, Tabulated> k) : kind_(std::move(k)) {}
    std::variant<Exponential, Tabulated> kind_;
};

// ---------------------------------------------------------------- memory kernels

/// K(t) = 2 delta(t) D + smooth(t). With the delta sitting on the endpoint of
/// int_0^t, the singular part contributes the local term D rho_t.
///
/// When `exponential` is set, smooth(t) = coeff * e^{t rate} and the Volterra
/// solver evaluates the convolution recursively in O(1) per step.
struct MemoryKernel {
    struct ExponentialForm {
        Superoperator coeff;
        Superoperator rate;
    };

    Superoperator delta_weight;
    std::function<Superoperator(double)> smooth;
    std::optional<ExponentialForm> exponential;

    int dim() const noexcept { return delta_weight.dim(); }

    static MemoryKernel zero(int dim);
    static MemoryKernel from_exponential(Superoperator delta_weight, Superoperator coeff, Superoperator rate);
};

/// Scalar kernel kappa(t) = 2 delta(t) delta_weight + amplitude e^{-decay t}.
struct ScalarKernel {
    double delta_weight = 0.0;
    double amplitude = 0.0;
    double decay = 0.0;

    double smooth(double t) const;
    /// kappa~(s), with the delta contributing delta_weight.
    cplx laplace(cplx s) const;
};

/// kappa for f = eps gamma e^{-gamma t}:
/// eps gamma [2 delta(t) - gamma(1 - eps) e^{-gamma (1 - eps) t}].
ScalarKernel kappa_exponential(double eps, double gamma);

/// L_t = kappa(t)(B - id).
MemoryKernel channel_memory_kernel(const ScalarKernel& kappa, const Superoperator& channel);

/// Kernel whose solution is (1 - p)e^{tL} + p id:
/// 2(1 - p) delta(t) L + p(1 - p) L^2 e^{t p L}.
MemoryKernel memory_kernel_identity_mixture(const Superoperator& generator, double p);

// ---------------------------------------------------------------- closed-form propagators

Superoperator semigroup_propagator(const Superoperator& generator, double t);

Superoperator convex_mixture_propagator(std::span<const double> weights,
                                        std::span<const Superoperator> generators, double t);

/// Phi_t = sum_k p_k L_k e^{t L_k}, the derivative of the convex mixture.
Superoperator convex_mixture_phi(std::span<const double> weights,
                                 std::span<const Superoperator> generators, double t);

/// (1 - p)e^{tL} + p id.
Superoperator identity_mixture_propagator(const Superoperator& generator, double p, double t);

/// (1 - p)e^{tL} + p[P + e^{-gamma t}(id - P)].
Superoperator projector_mixture_propagator(const Superoperator& generator, double p, double gamma,
                                           const Superoperator& projector, double t);

/// (1 - F(t)) id + F(t) B. This solves the kernel kappa(t)(B - id) for an
/// idempotent channel B, so non-idempotent channels are rejected.
Superoperator channel_memory_propagator(const MemoryFn& f, const Superoperator& channel, double t);

// ---------------------------------------------------------------- trajectories

struct StepDiagnostics {
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
    std::optional<double> negativity;
};

/// States are kept as raw matrices: integrated states carry O(dt^2)
/// discretisation error and are not forced back onto the state space.
struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> states;
    std::vector<StepDiagnostics> diagnostics;
    std::vector<int> factor_dims;

    std::size_t size() const noexcept { return times.size(); }
    double max_trace_error() const;
    double min_eigenvalue() const;
};

struct VolterraOptions {
    /// Compute per-step negativity when the initial state is bipartite.
    bool negativity = false;
    /// Force the O(N^2) direct convolution even when the kernel has an
    /// exponential form.
    bool direct_convolution = false;
};

/// Integrates d rho/dt = int_0^t K(t - tau) rho_tau dtau on t_n = n dt.
///
/// The convolution uses the trapezoidal rule; each step is one Heun
/// predictor-corrector pass, giving second-order convergence. t_end must be
/// an integer multiple of dt.
Trajectory volterra_solve(const MemoryKernel& kernel, const DensityMatrix& rho0, double t_end, double dt,
                          const VolterraOptions& opts = {});

/// Evaluates a closed-form propagator on the same grid as `reference`.
Trajectory propagate(const PropagatorFn& lambda, const DensityMatrix& rho0, std::span<const double> times,
                     bool with_negativity = false);

/// max_n || a_n - b_n ||_1 over two trajectories on the same grid.
double max_trace_norm_deviation(const Trajectory& a, const Trajectory& b);

// ---------------------------------------------------------------- Phi and invariance

/// dLambda/dt by central difference (one-sided second order near t = 0).
Superoperator phi_from_propagator(const PropagatorFn& lambda, double t, double h);

/// ||Lambda_t omega - omega||_1 at each time.
std::vector<double> invariance_defect(const PropagatorFn& lambda, const DensityMatrix& omega,
                                      std::span<const double> times);

}  // namespace memdyn
