// random.hpp: seeded random states, unitaries and decoherence models

#pragma once

#include <cstdint>
#include <random>

#include "memdyn/generators.hpp"
#include "memdyn/qcore.hpp"

namespace memdyn {

using Rng = std::mt19937_64;

/// Entries with independent standard normal real and imaginary parts.
Matrix random_ginibre(Rng& rng, int rows, int cols);
Matrix random_hermitian(Rng& rng, int dim, double scale = 1.0);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
Matrix random_unitary(Rng& rng, int dim);
/// Normalised G G^dag with G of shape dim x rank (full rank when rank <= 0).
DensityMatrix random_state(Rng& rng, int dim, int rank = 0, std::vector<int> factor_dims = {});
/// Model with Hermitian H_R and B_n of the given scale and a random omega_R.
DecoherenceModel random_decoherence_model(Rng& rng, int sys_dim, int reservoir_dim, double scale = 1.0);

}  // namespace memdyn
