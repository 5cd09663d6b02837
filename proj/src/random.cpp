// random.cpp: seeded random states, unitaries and decoherence models

#include "memdyn/random.hpp"

namespace memdyn {

Matrix random_ginibre(Rng& rng, int rows, int cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = cplx(re, im);
        }
    }
    return g;
}

Matrix random_hermitian(Rng& rng, int dim, double scale)
{
    const Matrix g = random_ginibre(rng, dim, dim);
    return scale * 0.5 * (g + g.adjoint());
}

Matrix random_unitary(Rng& rng, int dim)
{
    const Matrix g = random_ginibre(rng, dim, dim);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < dim; ++k) {
        const cplx d = r(k, k);
        if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
    }
    return q;
}

DensityMatrix random_state(Rng& rng, int dim, int rank, std::vector<int> factor_dims)
{
    const Matrix g = random_ginibre(rng, dim, rank <= 0 ? dim : rank);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(rho, std::move(factor_dims));
}

DecoherenceModel random_decoherence_model(Rng& rng, int sys_dim, int reservoir_dim, double scale)
{
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    DecoherenceModel m;
    for (int n = 0; n < sys_dim; ++n) m.eps.push_back(scale * uniform(rng));
    m.reservoir_hamiltonian = random_hermitian(rng, reservoir_dim, scale);
    for (int n = 0; n < sys_dim; ++n) m.couplings.push_back(random_hermitian(rng, reservoir_dim, scale));
    m.reservoir_state = random_state(rng, reservoir_dim).matrix();
    return m;
}

}  // namespace memdyn
