#include <doctest.h>

#include "memdyn/expm.hpp"
#include "memdyn/evolutions.hpp"
#include "memdyn/generators.hpp"
#include "memdyn/random.hpp"

using namespace memdyn;

namespace {

Matrix qubit_state()
{
    Vector psi(2);
    psi << 0.8, cplx(0.36, 0.48);
    return outer(psi);
}

double max_dev_vs(const Trajectory& traj, const PropagatorFn& lambda, const Matrix& rho0)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        worst = std::max(worst, trace_norm(traj.states[k] - lambda(traj.times[k]).apply(rho0)));
    }
    return worst;
}

}  // namespace

TEST_SUITE("evolutions")
{
    TEST_CASE("exponential memory function")
    {
        const MemoryFn f = MemoryFn::exponential(0.5, 2.0);
        CHECK(f.value(0.3) == doctest::Approx(0.5 * 2.0 * std::exp(-0.6)));
        CHECK(f.cumulative(0.3) == doctest::Approx(0.5 * (1.0 - std::exp(-0.6))));
        CHECK(f.laplace0() == doctest::Approx(0.5));
        CHECK(f.laplace(1.0) == doctest::Approx(0.5 * 2.0 / 3.0));
        CHECK_THROWS_AS(MemoryFn::exponential(1.5, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(MemoryFn::exponential(0.5, 0.0), std::invalid_argument);
    }

    TEST_CASE("tabulated memory function")
    {
        // Triangle of area 0.5 on [0, 1].
        const MemoryFn f = MemoryFn::tabulated({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
        CHECK(f.value(0.25) == doctest::Approx(0.5));
        CHECK(f.value(2.0) == doctest::Approx(0.0));
        CHECK(f.cumulative(0.5) == doctest::Approx(0.25));
        CHECK(f.cumulative(5.0) == doctest::Approx(0.5));
        CHECK(f.laplace0() == doctest::Approx(0.5));
        CHECK_THROWS_AS(MemoryFn::tabulated({0.0, 1.0}, {3.0, 3.0}), std::invalid_argument);
        CHECK_THROWS_AS(MemoryFn::tabulated({0.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(MemoryFn::tabulated({0.0, 1.0}, {-1.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(MemoryFn::tabulated({0.1, 1.0}, {0.0, 0.0}), std::invalid_argument);
    }

    TEST_CASE("semigroup property holds for semigroups and fails for mixtures")
    {
        const Superoperator l = depolarizing_generator(2, 1.0);
        const double s = 0.4, t = 1.1;
        CHECK(max_abs(semigroup_propagator(l, s + t).matrix() -
                      (semigroup_propagator(l, t) * semigroup_propagator(l, s)).matrix()) < 1e-13);
        const Superoperator a = identity_mixture_propagator(l, 0.5, s + t);
        const Superoperator b = identity_mixture_propagator(l, 0.5, t) * identity_mixture_propagator(l, 0.5, s);
        CHECK(max_abs(a.matrix() - b.matrix()) > 1e-2);
    }

    TEST_CASE("mixture propagators against their definitions")
    {
        Rng rng(31);
        const Superoperator l1 = depolarizing_generator(2, 1.0);
        const Superoperator l2 = projector_complement_generator(2.0, dephasing_projector(2));
        const std::vector<double> w{0.3, 0.7};
        const std::vector<Superoperator> gens{l1, l2};
        const double t = 0.9;
        const Matrix ref = 0.3 * matrix_exp(t * l1.matrix()) + 0.7 * matrix_exp(t * l2.matrix());
        CHECK(max_abs(convex_mixture_propagator(w, gens, t).matrix() - ref) < 1e-13);
        const Matrix phi_ref = 0.3 * l1.matrix() * matrix_exp(t * l1.matrix()) +
                               0.7 * l2.matrix() * matrix_exp(t * l2.matrix());
        CHECK(max_abs(convex_mixture_phi(w, gens, t).matrix() - phi_ref) < 1e-13);

        const Matrix id = Matrix::Identity(4, 4);
        CHECK(max_abs(identity_mixture_propagator(l1, 0.25, t).matrix() -
                      (0.75 * matrix_exp(t * l1.matrix()) + 0.25 * id)) < 1e-13);

        const Superoperator p = dephasing_projector(2);
        const Matrix pm_ref = 0.4 * matrix_exp(t * l1.matrix()) +
                              0.6 * (std::exp(-2.0 * t) * id + (1.0 - std::exp(-2.0 * t)) * p.matrix());
        CHECK(max_abs(projector_mixture_propagator(l1, 0.6, 2.0, p, t).matrix() - pm_ref) < 1e-13);

        CHECK_THROWS_AS(identity_mixture_propagator(l1, 1.2, t), std::invalid_argument);
        CHECK_THROWS_AS(convex_mixture_propagator(std::vector<double>{0.5, 0.6}, gens, t), std::invalid_argument);
        CHECK_THROWS_AS(semigroup_propagator(l1, -1.0), std::invalid_argument);
    }

    TEST_CASE("channel memory scales off-diagonal blocks by 1 - F(t)")
    {
        Rng rng(32);
        const MemoryFn f = MemoryFn::exponential(0.5, 1.0);
        const Superoperator b = block_projection_channel(2, 2);
        const Matrix rho = random_state(rng, 4).matrix();
        for (double t : {0.0, 0.3, 1.0, 5.0, 30.0}) {
            const Matrix out = channel_memory_propagator(f, b, t).apply(rho);
            const double keep = 1.0 - f.cumulative(t);
            CHECK(max_abs(out.block(0, 2, 2, 2) - keep * rho.block(0, 2, 2, 2)) <= 1e-10);
            CHECK(max_abs(out.block(2, 0, 2, 2) - keep * rho.block(2, 0, 2, 2)) <= 1e-10);
            const double f_t = f.cumulative(t);
            for (int m : {0, 2}) {
                const Matrix blk = rho.block(m, m, 2, 2);
                const Matrix diag_blk = Matrix(blk.diagonal().asDiagonal());
                CHECK(max_abs(out.block(m, m, 2, 2) - (keep * blk + f_t * diag_blk)) <= 1e-10);
            }
        }
        CHECK_THROWS_AS(channel_memory_propagator(f, amplitude_damping_channel(0.5), 1.0), std::invalid_argument);
    }

    TEST_CASE("volterra reproduces the identity mixture at three mixing weights")
    {
        const Superoperator l = depolarizing_generator(2, 1.0);
        const DensityMatrix rho0(qubit_state());
        for (double p : {0.25, 0.5, 0.75}) {
            const MemoryKernel k = memory_kernel_identity_mixture(l, p);
            const PropagatorFn ref = [&](double t) { return identity_mixture_propagator(l, p, t); };
            const double coarse = max_dev_vs(volterra_solve(k, rho0, 10.0, 1e-3), ref, rho0.matrix());
            const double fine = max_dev_vs(volterra_solve(k, rho0, 10.0, 5e-4), ref, rho0.matrix());
            CAPTURE(p);
            CHECK(coarse <= 1e-6);
            CHECK(coarse / fine >= 3.5);
        }
    }

    TEST_CASE("fast recursion agrees with direct convolution")
    {
        const Superoperator l = depolarizing_generator(2, 1.0);
        const DensityMatrix rho0(qubit_state());
        const MemoryKernel k = memory_kernel_identity_mixture(l, 0.3);
        const Trajectory fast = volterra_solve(k, rho0, 2.0, 0.01);
        const Trajectory direct = volterra_solve(k, rho0, 2.0, 0.01, VolterraOptions{false, true});
        CHECK(max_trace_norm_deviation(fast, direct) < 1e-12);
    }

    TEST_CASE("volterra with idempotent channel memory matches the closed form")
    {
        const Superoperator b = block_projection_channel(2, 2);
        const MemoryKernel k = channel_memory_kernel(kappa_exponential(0.5, 1.0), b);
        const MemoryFn f = MemoryFn::exponential(0.5, 1.0);
        Rng rng(33);
        const DensityMatrix rho0 = random_state(rng, 4, 0, {2, 2});
        const Trajectory traj = volterra_solve(k, rho0, 5.0, 1e-3, VolterraOptions{true, false});
        CHECK(max_dev_vs(traj, [&](double t) { return channel_memory_propagator(f, b, t); }, rho0.matrix()) < 1e-6);
        CHECK(traj.diagnostics.back().negativity.has_value());
        CHECK(traj.max_trace_error() < 1e-12);
    }

    TEST_CASE("zero kernel gives a constant trajectory")
    {
        Rng rng(34);
        const DensityMatrix rho0 = random_state(rng, 3);
        const Trajectory traj = volterra_solve(MemoryKernel::zero(3), rho0, 1.0, 0.1);
        CHECK(traj.size() == 11);
        for (const auto& s : traj.states) CHECK(max_abs(s - rho0.matrix()) == 0.0);
    }

    TEST_CASE("volterra argument checks")
    {
        const DensityMatrix rho0(qubit_state());
        const MemoryKernel k = MemoryKernel::zero(2);
        CHECK_THROWS_AS(volterra_solve(k, rho0, 1.0, 0.3), std::invalid_argument);
        CHECK_THROWS_AS(volterra_solve(k, rho0, 1.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(volterra_solve(MemoryKernel::zero(3), rho0, 1.0, 0.1), DimensionError);
    }

    TEST_CASE("phi from propagator recovers L e^{tL}")
    {
        const Superoperator l = depolarizing_generator(2, 1.3);
        const PropagatorFn lambda = [&](double t) { return semigroup_propagator(l, t); };
        for (double t : {0.0, 0.5, 2.0}) {
            const Matrix ref = l.matrix() * matrix_exp(t * l.matrix());
            CHECK(max_abs(phi_from_propagator(lambda, t, 1e-4).matrix() - ref) < 1e-6);
        }
    }

    TEST_CASE("invariance defect vanishes for a semigroup fixed point")
    {
        const Superoperator l = depolarizing_generator(2, 1.0);
        const PropagatorFn lambda = [&](double t) { return semigroup_propagator(l, t); };
        const std::vector<double> times{0.5, 1.0, 4.0};
        for (double d : invariance_defect(lambda, DensityMatrix::maximally_mixed(2), times)) CHECK(d < 1e-14);
    }
}
