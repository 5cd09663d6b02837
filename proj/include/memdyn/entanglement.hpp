// entanglement.hpp: PPT / negativity diagnostics, Werner and Bell-diagonal checks

#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "memdyn/evolutions.hpp"
#include "memdyn/qcore.hpp"

namespace memdyn {

/// Bell states in the fixed order
/// (|00> + |11>)/sqrt2, (|00> - |11>)/sqrt2, (|01> + |10>)/sqrt2, (|01> - |10>)/sqrt2.
struct BellBasis {
    std::array<Vector, 4> states;
};

BellBasis bell_basis();

enum class Verdict { entangled, separable, undetermined };

std::string to_string(Verdict v);

struct EntanglementReport {
    double negativity = 0.0;
    bool is_ppt = true;
    Verdict verdict = Verdict::undetermined;
};

/// Sum of |negative eigenvalues| of the partial transpose on the second factor.
double negativity(const DensityMatrix& rho);
double negativity(const Matrix& rho, std::span<const int> factor_dims);

/// PPT is decisive for 2x2 and 2x3; larger PPT states are undetermined.
EntanglementReport entanglement_report(const DensityMatrix& rho, double tol = 1e-10);
EntanglementReport entanglement_report(const Matrix& rho, std::span<const int> factor_dims, double tol = 1e-10);

/// Report for (1 - p)/4 1 + p |psi><psi| with psi maximally entangled.
EntanglementReport werner_asymptote_check(double p, const Vector& psi);

/// p_alpha = (1 - p)/4 + p <psi_alpha| rho |psi_alpha>.
std::array<double, 4> bell_diagonal_probs(const DensityMatrix& rho0, double p, const BellBasis& basis = bell_basis());

DensityMatrix bell_diagonal_state(const std::array<double, 4>& probs, const BellBasis& basis = bell_basis());

/// True iff exactly one p_alpha exceeds 1/2.
bool bell_diagonal_entangled(const std::array<double, 4>& probs);

// ---------------------------------------------------------------- asymptotic sweeps

/// Identity mixture (1 - p)e^{tL} + p id; the swept parameter is p.
struct IdentityMixtureFamily {
    Superoperator generator;
};

/// Channel memory with f = eps gamma e^{-gamma t}; the swept parameter is eps.
struct ChannelMemoryFamily {
    Superoperator channel;
};

using AsymptoticFamily = std::variant<IdentityMixtureFamily, ChannelMemoryFamily>;

struct SweepRow {
    double param = 0.0;
    double negativity = 0.0;
    Verdict verdict = Verdict::undetermined;
};

/// Asymptotic state for one parameter value, from Laplace-domain limits.
Matrix asymptotic_state(const AsymptoticFamily& family, double param, const DensityMatrix& rho0);

/// One row per grid value; rows are evaluated concurrently and returned in
/// grid order.
std::vector<SweepRow> asymptotic_entanglement_sweep(const DensityMatrix& rho0, const AsymptoticFamily& family,
                                                    std::span<const double> param_grid);

}  // namespace memdyn
