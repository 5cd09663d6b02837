#include <doctest.h>

#include "memdyn/expm.hpp"
#include "memdyn/entanglement.hpp"
#include "memdyn/evolutions.hpp"
#include "memdyn/generators.hpp"
#include "memdyn/random.hpp"
#include "oracles.hpp"

using namespace memdyn;

namespace {

Matrix sigma_minus()
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

}  // namespace

TEST_SUITE("generators")
{
    TEST_CASE("GKSL generator against the explicit master equation")
    {
        Rng rng(21);
        const Matrix h = random_hermitian(rng, 3);
        const std::vector<Matrix> ops{random_ginibre(rng, 3, 3), random_ginibre(rng, 3, 3)};
        const std::vector<double> rates{0.7, 0.2};
        const Superoperator l = gksl_generator(GKSLSpec{h, ops, rates});
        const Matrix rho = random_state(rng, 3).matrix();
        const cplx i(0.0, 1.0);
        Matrix ref = -i * (h * rho - rho * h);
        for (std::size_t k = 0; k < ops.size(); ++k) {
            const Matrix& v = ops[k];
            const Matrix vdv = v.adjoint() * v;
            ref += rates[k] * (v * rho * v.adjoint() - 0.5 * (vdv * rho + rho * vdv));
        }
        CHECK(max_abs(l.apply(rho) - ref) < 1e-12);
        for (double t : {0.1, 1.0, 10.0}) CHECK(is_cptp(semigroup_propagator(l, t)).is_cptp());
    }

    TEST_CASE("GKSL rejects bad input")
    {
        const Matrix h = Matrix::Zero(2, 2);
        CHECK_THROWS_AS(gksl_generator(GKSLSpec{h, {sigma_minus()}, {-1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(gksl_generator(GKSLSpec{h, {sigma_minus()}, {}}), DimensionError);
        CHECK_THROWS_AS(gksl_generator(GKSLSpec{sigma_minus(), {}, {}}), std::invalid_argument);
    }

    TEST_CASE("depolarizing semigroup closed form")
    {
        Rng rng(22);
        const double gamma = 0.8;
        const Superoperator l = depolarizing_generator(3, gamma);
        const Matrix rho = random_state(rng, 3).matrix();
        for (double t : {0.0, 0.5, 3.0}) {
            const double e = std::exp(-gamma * t);
            const Matrix ref = e * rho + (1.0 - e) * Matrix::Identity(3, 3) / 3.0;
            CHECK(max_abs(semigroup_propagator(l, t).apply(rho) - ref) < 1e-13);
        }
    }

    TEST_CASE("dephasing projector")
    {
        const Superoperator p = dephasing_projector(3);
        CHECK(max_abs(p.matrix() * p.matrix() - p.matrix()) < 1e-15);
        Matrix x = Matrix::Constant(3, 3, cplx(1.0, 1.0));
        const Matrix y = p.apply(x);
        CHECK(max_abs(y - Matrix(x.diagonal().asDiagonal())) == 0.0);

        const BellBasis b = bell_basis();
        const Superoperator pb = dephasing_projector(4, std::vector<Vector>(b.states.begin(), b.states.end()));
        CHECK(is_cptp(pb).is_cptp());
        const Matrix phi = outer(b.states[0]);
        CHECK(max_abs(pb.apply(phi) - phi) < 1e-15);
        const Matrix zero = outer(Vector::Unit(4, 0));
        CHECK(max_abs(pb.apply(zero) - 0.5 * (outer(b.states[0]) + outer(b.states[1]))) < 1e-15);

        std::vector<Vector> skew{Vector::Unit(2, 0), (Vector::Unit(2, 0) + Vector::Unit(2, 1)) / std::sqrt(2.0)};
        CHECK_THROWS_AS(dephasing_projector(2, skew), std::invalid_argument);
        CHECK_THROWS_AS(dephasing_projector(2, {Vector::Unit(2, 0)}), std::invalid_argument);
    }

    TEST_CASE("projector complement generator relaxes onto P")
    {
        Rng rng(23);
        const Superoperator p = dephasing_projector(2);
        const Superoperator l = projector_complement_generator(1.5, p);
        const Matrix rho = random_state(rng, 2).matrix();
        const double t = 0.7;
        const double e = std::exp(-1.5 * t);
        CHECK(max_abs(semigroup_propagator(l, t).apply(rho) - (e * rho + (1.0 - e) * p.apply(rho))) < 1e-13);
        const Superoperator not_projector(2, 2.0 * Matrix::Identity(4, 4));
        CHECK_THROWS_AS(projector_complement_generator(1.0, not_projector), std::invalid_argument);
    }

    TEST_CASE("block projection against the block-extraction formula")
    {
        Rng rng(24);
        const int d1 = 2, d2 = 3;
        const Superoperator b = block_projection_channel(d1, d2);
        CHECK(is_cptp(b).is_cptp());
        CHECK(max_abs(b.matrix() * b.matrix() - b.matrix()) < 1e-15);
        const Matrix x = random_ginibre(rng, d1 * d2, d1 * d2);
        const Matrix y = b.apply(x);
        // B rho = sum_{m,n} (rho^_nn)_mm P_m (x) P_n, with rho^_mn the d2 x d2 blocks.
        Matrix ref = Matrix::Zero(d1 * d2, d1 * d2);
        for (int m = 0; m < d1; ++m) {
            const Matrix blk = x.block(m * d2, m * d2, d2, d2);
            for (int n = 0; n < d2; ++n) ref(m * d2 + n, m * d2 + n) = blk(n, n);
        }
        CHECK(max_abs(y - ref) == 0.0);

        const Matrix phi = outer(bell_basis().states[0]);
        Matrix expect = Matrix::Zero(4, 4);
        expect(0, 0) = expect(3, 3) = 0.5;
        CHECK(max_abs(block_projection_channel(2, 2).apply(phi) - expect) < 1e-15);
        CHECK(negativity(block_projection_channel(2, 2).apply(phi), std::vector<int>{2, 2}) == 0.0);
    }

    TEST_CASE("amplitude damping channel")
    {
        const double g = 0.36;
        const Superoperator b = amplitude_damping_channel(g);
        CHECK(is_cptp(b).is_cptp());
        Matrix k0 = Matrix::Zero(2, 2);
        k0(0, 0) = 1.0;
        k0(1, 1) = std::sqrt(1.0 - g);
        const Matrix k1 = std::sqrt(g) * sigma_minus();
        Rng rng(25);
        const Matrix rho = random_state(rng, 2).matrix();
        CHECK(max_abs(b.apply(rho) - oracle::kraus_apply({k0, k1}, rho)) < 1e-15);
        const Matrix ground = outer(Vector::Unit(2, 0));
        CHECK(max_abs(b.apply(ground) - ground) < 1e-15);
        CHECK_THROWS_AS(amplitude_damping_channel(0.0), std::invalid_argument);
        CHECK_THROWS_AS(amplitude_damping_channel(1.5), std::invalid_argument);
    }

    TEST_CASE("pure decoherence matches the unitary dilation")
    {
        Rng rng(26);
        for (int trial = 0; trial < 3; ++trial) {
            const DecoherenceModel m = random_decoherence_model(rng, 2, 2);
            const DensityMatrix rho = random_state(rng, 2);
            for (double t : {0.0, 0.3, 2.0, 7.5, 20.0}) {
                const CoeffMatrix c = pure_decoherence_coeffs(m, t);
                CHECK_NOTHROW(check_coeff_matrix(c));
                const Matrix ref = oracle::unitary_dilation(m.total_hamiltonian(), rho.matrix(), m.reservoir_state, t);
                CHECK(max_abs(pure_decoherence_apply(c, rho).matrix() - ref) < 1e-10);
                CHECK(max_abs(pure_decoherence_superop(c).apply(rho.matrix()) - ref) < 1e-10);
            }
        }
    }

    TEST_CASE("pure decoherence on three levels and bigger reservoir")
    {
        Rng rng(27);
        const DecoherenceModel m = random_decoherence_model(rng, 3, 4, 0.5);
        const DensityMatrix rho = random_state(rng, 3);
        const CoeffMatrix c = pure_decoherence_coeffs(m, 1.7);
        const Matrix ref = oracle::unitary_dilation(m.total_hamiltonian(), rho.matrix(), m.reservoir_state, 1.7);
        CHECK(max_abs(pure_decoherence_apply(c, rho).matrix() - ref) < 1e-10);
        CHECK(min_hermitian_eigenvalue(c.c) > -1e-12);
    }

    TEST_CASE("decoherence phi is traceless")
    {
        Rng rng(28);
        const DecoherenceModel m = random_decoherence_model(rng, 2, 2);
        const DensityMatrix rho = random_state(rng, 2);
        for (double tau : {0.0, 0.5, 3.0}) CHECK(phi_trace_check(m, tau, rho) <= 1e-8);
        // Diagonal states do not move, so phi annihilates them.
        Matrix diag = Matrix::Zero(2, 2);
        diag(0, 0) = 0.3;
        diag(1, 1) = 0.7;
        CHECK(max_abs(decoherence_phi_action(m, 1.0, DensityMatrix(diag))) < 1e-9);
    }

    TEST_CASE("coefficient matrix validation")
    {
        CoeffMatrix bad{0.0, Matrix::Identity(2, 2)};
        bad.c(0, 0) = 0.9;
        CHECK_THROWS_AS(check_coeff_matrix(bad), std::invalid_argument);
        CoeffMatrix not_psd{0.0, Matrix::Constant(2, 2, cplx(1.0))};
        not_psd.c(0, 1) = 2.0;
        not_psd.c(1, 0) = 2.0;
        CHECK_THROWS_AS(check_coeff_matrix(not_psd), std::invalid_argument);
    }

    TEST_CASE("decoherence model validation")
    {
        Rng rng(29);
        DecoherenceModel m = random_decoherence_model(rng, 2, 2);
        CHECK_NOTHROW(m.validate());
        DecoherenceModel short_b = m;
        short_b.couplings.pop_back();
        CHECK_THROWS_AS(short_b.validate(), DimensionError);
        DecoherenceModel bad_h = m;
        bad_h.reservoir_hamiltonian(0, 1) += 1.0;
        CHECK_THROWS_AS(bad_h.validate(), std::invalid_argument);
        DecoherenceModel bad_state = m;
        bad_state.reservoir_state *= 2.0;
        CHECK_THROWS_AS(bad_state.validate(), std::invalid_argument);
    }
}
