// evolutions.cpp: closed-form propagators, memory kernels and a Volterra integrator

#include "memdyn/evolutions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "memdyn/entanglement.hpp"
#include "memdyn/expm.hpp"

namespace memdyn {

namespace {

void require_time(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and nonnegative");
}

void require_probability(double p, const char* name)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
}

void require_idempotent(const Superoperator& p, const char* what)
{
    if (max_abs(p.matrix() * p.matrix() - p.matrix()) > 1e-10) {
        throw std::invalid_argument(std::string(what) + " is not idempotent");
    }
}

StepDiagnostics diagnose(const Matrix& state, const std::vector<int>& dims, bool with_negativity)
{
    StepDiagnostics d;
    d.trace_error = std::abs(state.trace() - cplx(1.0, 0.0));
    d.min_eigenvalue = min_hermitian_eigenvalue(state);
    if (with_negativity && dims.size() == 2) d.negativity = negativity(state, dims);
    return d;
}

}  // namespace

// ---------------------------------------------------------------- MemoryFn

MemoryFn MemoryFn::exponential(double eps, double gamma)
{
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("memory eps must lie in (0, 1]");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("memory gamma must be positive");
    return MemoryFn(Exponential{eps, gamma});
}

MemoryFn MemoryFn::tabulated(std::vector<double> grid, std::vector<double> values)
{
    if (grid.size() < 2 || grid.size() != values.size()) {
        throw std::invalid_argument("tabulated memory function needs >= 2 matching grid/value entries");
    }
    if (grid.front() != 0.0) throw std::invalid_argument("tabulated grid must start at 0");
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(values[k] >= 0.0) || !std::isfinite(values[k])) {
            throw std::invalid_argument("tabulated memory function must be finite and nonnegative");
        }
        if (k > 0) {
            if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("tabulated grid must be strictly increasing");
            total += 0.5 * (values[k] + values[k - 1]) * (grid[k] - grid[k - 1]);
        }
    }
    if (total > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "tabulated memory function integrates to " << total << " > 1";
        throw std::invalid_argument(os.str());
    }
    return MemoryFn(Tabulated{std::move(grid), std::move(values)});
}

double MemoryFn::value(double t) const
{
    if (t < 0.0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&kind_)) return e->eps * e->gamma * std::exp(-e->gamma * t);
    const auto& tab = std::get<Tabulated>(kind_);
    if (t >= tab.grid.back()) return t == tab.grid.back() ? tab.values.back() : 0.0;
    const auto it = std::upper_bound(tab.grid.begin(), tab.grid.end(), t);
    const auto k = static_cast<std::size_t>(it - tab.grid.begin());
    const double w = (t - tab.grid[k - 1]) / (tab.grid[k] - tab.grid[k - 1]);
    return (1.0 - w) * tab.values[k - 1] + w * tab.values[k];
}

double MemoryFn::cumulative(double t) const
{
    if (t <= 0.0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&kind_)) return e->eps * -std::expm1(-e->gamma * t);
    const auto& tab = std::get<Tabulated>(kind_);
    double acc = 0.0;
    for (std::size_t k = 1; k < tab.grid.size(); ++k) {
        const double a = tab.grid[k - 1];
        if (t <= a) break;
        const double b = std::min(t, tab.grid[k]);
        acc += 0.5 * (tab.values[k - 1] + value(b)) * (b - a);
    }
    return acc;
}

double MemoryFn::laplace0() const
{
    if (const auto* e = std::get_if<Exponential>(&kind_)) return e->eps;
    return cumulative(std::get<Tabulated>(kind_).grid.back());
}

double MemoryFn::laplace(double s) const
{
    if (!(s > 0.0)) throw std::invalid_argument("Laplace variable must be positive");
    if (const auto* e = std::get_if<Exponential>(&kind_)) return e->eps * e->gamma / (s + e->gamma);
    // Exact transform of each linear piece alpha + beta t.
    const auto& tab = std::get<Tabulated>(kind_);
    auto antideriv = [s](double alpha, double beta, double t) {
        return -std::exp(-s * t) * ((alpha + beta * t) / s + beta / (s * s));
    };
    double acc = 0.0;
    for (std::size_t k = 1; k < tab.grid.size(); ++k) {
        const double a = tab.grid[k - 1];
        const double b = tab.grid[k];
        const double beta = (tab.values[k] - tab.values[k - 1]) / (b - a);
        const double alpha = tab.values[k - 1] - beta * a;
        acc += antideriv(alpha, beta, b) - antideriv(alpha, beta, a);
    }
    return acc;
}

double MemoryFn::decay_rate() const
{
    if (const auto* e = std::get_if<Exponential>(&kind_)) return e->gamma;
    return 0.0;
}

// ---------------------------------------------------------------- kernels

MemoryKernel MemoryKernel::zero(int dim)
{
    MemoryKernel k{Superoperator::zero(dim), [dim](double) { return Superoperator::zero(dim); }, std::nullopt};
    k.exponential = ExponentialForm{Superoperator::zero(dim), Superoperator::zero(dim)};
    return k;
}

MemoryKernel MemoryKernel::from_exponential(Superoperator delta_weight, Superoperator coeff, Superoperator rate)
{
    if (coeff.dim() != delta_weight.dim() || rate.dim() != delta_weight.dim()) {
        throw DimensionError("kernel parts have different dimensions");
    }
    auto smooth = [coeff, rate](double t) {
        return Superoperator(coeff.dim(), coeff.matrix() * matrix_exp(t * rate.matrix()));
    };
    return MemoryKernel{std::move(delta_weight), std::move(smooth), ExponentialForm{std::move(coeff), std::move(rate)}};
}

double ScalarKernel::smooth(double t) const
{
    return amplitude * std::exp(-decay * t);
}

cplx ScalarKernel::laplace(cplx s) const
{
    return delta_weight + amplitude / (s + decay);
}

ScalarKernel kappa_exponential(double eps, double gamma)
{
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("kappa eps must lie in (0, 1]");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("kappa gamma must be positive");
    return {eps * gamma, -eps * gamma * gamma * (1.0 - eps), gamma * (1.0 - eps)};
}

MemoryKernel channel_memory_kernel(const ScalarKernel& kappa, const Superoperator& channel)
{
    const int d = channel.dim();
    const Superoperator gen = channel - Superoperator::identity(d);
    return MemoryKernel::from_exponential(kappa.delta_weight * gen, kappa.amplitude * gen,
                                          -kappa.decay * Superoperator::identity(d));
}

MemoryKernel memory_kernel_identity_mixture(const Superoperator& generator, double p)
{
    require_probability(p, "mixing parameter p");
    return MemoryKernel::from_exponential((1.0 - p) * generator, p * (1.0 - p) * (generator * generator),
                                          p * generator);
}

// ---------------------------------------------------------------- propagators

Superoperator semigroup_propagator(const Superoperator& generator, double t)
{
    require_time(t);
    return {generator.dim(), matrix_exp(t * generator.matrix())};
}

namespace {

void check_mixture(std::span<const double> weights, std::span<const Superoperator> generators)
{
    if (weights.empty() || weights.size() != generators.size()) {
        throw std::invalid_argument("mixture needs one weight per generator");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
    for (const auto& g : generators) {
        if (g.dim() != generators.front().dim()) throw DimensionError("mixture generators differ in dimension");
    }
}

}  // namespace

Superoperator convex_mixture_propagator(std::span<const double> weights,
                                        std::span<const Superoperator> generators, double t)
{
    check_mixture(weights, generators);
    require_time(t);
    Superoperator out = Superoperator::zero(generators.front().dim());
    for (std::size_t k = 0; k < weights.size(); ++k) out = out + weights[k] * semigroup_propagator(generators[k], t);
    return out;
}

Superoperator convex_mixture_phi(std::span<const double> weights,
                                 std::span<const Superoperator> generators, double t)
{
    check_mixture(weights, generators);
    require_time(t);
    Superoperator out = Superoperator::zero(generators.front().dim());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        out = out + weights[k] * (generators[k] * semigroup_propagator(generators[k], t));
    }
    return out;
}

Superoperator identity_mixture_propagator(const Superoperator& generator, double p, double t)
{
    require_probability(p, "mixing parameter p");
    require_time(t);
    return (1.0 - p) * semigroup_propagator(generator, t) + p * Superoperator::identity(generator.dim());
}

Superoperator projector_mixture_propagator(const Superoperator& generator, double p, double gamma,
                                           const Superoperator& projector, double t)
{
    require_probability(p, "mixing parameter p");
    require_time(t);
    if (!(gamma >= 0.0)) throw std::invalid_argument("projector gamma must be nonnegative");
    if (projector.dim() != generator.dim()) throw DimensionError("projector and generator dimensions differ");
    require_idempotent(projector, "projector");
    const Superoperator id = Superoperator::identity(generator.dim());
    return (1.0 - p) * semigroup_propagator(generator, t) + p * (projector + std::exp(-gamma * t) * (id - projector));
}

Superoperator channel_memory_propagator(const MemoryFn& f, const Superoperator& channel, double t)
{
    require_time(t);
    const CPTPReport report = is_cptp(channel);
    if (!report.is_cptp()) throw std::invalid_argument("memory channel B is not CPTP");
    require_idempotent(channel, "memory channel B");
    const double big_f = f.cumulative(t);
    return (1.0 - big_f) * Superoperator::identity(channel.dim()) + big_f * channel;
}

// ---------------------------------------------------------------- trajectories

double Trajectory::max_trace_error() const
{
    double m = 0.0;
    for (const auto& d : diagnostics) m = std::max(m, d.trace_error);
    return m;
}

double Trajectory::min_eigenvalue() const
{
    double m = 1.0;
    for (const auto& d : diagnostics) m = std::min(m, d.min_eigenvalue);
    return m;
}

Trajectory volterra_solve(const MemoryKernel& kernel, const DensityMatrix& rho0, double t_end, double dt,
                          const VolterraOptions& opts)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(t_end >= dt)) throw std::invalid_argument("t_end must be at least dt");
    if (kernel.dim() != rho0.dim()) throw DimensionError("kernel and state dimensions differ");
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    if (std::abs(static_cast<double>(steps) * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
        throw std::invalid_argument("t_end must be an integer multiple of dt");
    }

    const int d = rho0.dim();
    const auto n2 = static_cast<Eigen::Index>(d) * d;
    const Matrix& delta = kernel.delta_weight.matrix();
    const bool fast = kernel.exponential.has_value() && !opts.direct_convolution;

    Trajectory traj;
    traj.factor_dims = rho0.factor_dims();
    traj.times.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.reserve(static_cast<std::size_t>(steps + 1));
    traj.diagnostics.reserve(static_cast<std::size_t>(steps + 1));

    auto record = [&](long n, const Vector& y) {
        if (!y.allFinite()) throw NumericalError("Volterra integration produced a non-finite state", n);
        Matrix state = devectorize(y);
        traj.times.push_back(static_cast<double>(n) * dt);
        traj.diagnostics.push_back(diagnose(state, traj.factor_dims, opts.negativity));
        traj.states.push_back(std::move(state));
    };

    // Kernel samples K_j = smooth(j dt); the direct path needs all of them,
    // the recursive path only K_0 = coeff and the one-step propagator.
    Matrix k0;
    Matrix coeff;
    Matrix step_prop;
    std::vector<Matrix> samples;
    if (fast) {
        coeff = kernel.exponential->coeff.matrix();
        k0 = coeff;
        step_prop = matrix_exp(dt * kernel.exponential->rate.matrix());
    } else {
        samples.reserve(static_cast<std::size_t>(steps + 1));
        for (long j = 0; j <= steps; ++j) samples.push_back(kernel.smooth(static_cast<double>(j) * dt).matrix());
        k0 = samples.front();
    }
    const Matrix local = delta + 0.5 * dt * k0;

    std::vector<Vector> history;
    history.reserve(static_cast<std::size_t>(steps + 1));
    history.push_back(vectorize(rho0));
    record(0, history.front());

    Vector decayed_initial = history.front();  // e^{n dt A} y_0
    Vector sum = Vector::Zero(n2);              // sum_{j=1}^{n-1} e^{(n-j) dt A} y_j
    Vector f_n = delta * history.front();

    for (long n = 0; n < steps; ++n) {
        const Vector& y_n = history.back();
        // History part of the trapezoidal convolution at t_{n+1}, excluding y_{n+1}.
        Vector hist(n2);
        if (fast) {
            decayed_initial = step_prop * decayed_initial;
            if (n >= 1) sum = step_prop * (sum + y_n);
            hist = dt * (coeff * (0.5 * decayed_initial + sum));
        } else {
            hist = 0.5 * samples[static_cast<std::size_t>(n + 1)] * history.front();
            for (long j = 1; j <= n; ++j) {
                hist.noalias() += samples[static_cast<std::size_t>(n + 1 - j)] * history[static_cast<std::size_t>(j)];
            }
            hist *= dt;
        }

        const Vector predictor = y_n + dt * f_n;
        const Vector f_pred = local * predictor + hist;
        Vector y_next = y_n + 0.5 * dt * (f_n + f_pred);
        f_n = local * y_next + hist;
        record(n + 1, y_next);
        history.push_back(std::move(y_next));
    }
    return traj;
}

Trajectory propagate(const PropagatorFn& lambda, const DensityMatrix& rho0, std::span<const double> times,
                     bool with_negativity)
{
    Trajectory traj;
    traj.factor_dims = rho0.factor_dims();
    for (double t : times) {
        Matrix state = lambda(t).apply(rho0.matrix());
        traj.times.push_back(t);
        traj.diagnostics.push_back(diagnose(state, traj.factor_dims, with_negativity));
        traj.states.push_back(std::move(state));
    }
    return traj;
}

double max_trace_norm_deviation(const Trajectory& a, const Trajectory& b)
{
    if (a.size() != b.size()) throw DimensionError("trajectories have different lengths");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, trace_norm(a.states[k] - b.states[k]));
    return m;
}

// ---------------------------------------------------------------- Phi and invariance

Superoperator phi_from_propagator(const PropagatorFn& lambda, double t, double h)
{
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    require_time(t);
    if (t >= h) return (1.0 / (2.0 * h)) * (lambda(t + h) - lambda(t - h));
    return (1.0 / (2.0 * h)) * (4.0 * lambda(t + h) - 3.0 * lambda(t) - lambda(t + 2.0 * h));
}

std::vector<double> invariance_defect(const PropagatorFn& lambda, const DensityMatrix& omega,
                                      std::span<const double> times)
{
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(trace_norm(lambda(t).apply(omega.matrix()) - omega.matrix()));
    return out;
}

}  // namespace memdyn
