// generators.hpp: GKSL generators, projections and the pure-decoherence model

#pragma once

#include <vector>

#include "memdyn/qcore.hpp"

namespace memdyn {

struct GKSLSpec {
    Matrix hamiltonian;
    std::vector<Matrix> jump_ops;
    std::vector<double> rates;
};

/// L rho = -i[H, rho] + sum_k rate_k (V_k rho V_k^dag - {V_k^dag V_k, rho}/2).
Superoperator gksl_generator(const GKSLSpec& spec);

/// L rho = gamma (Tr(rho) 1/d - rho). Relaxes every state to 1/d.
Superoperator depolarizing_generator(int dim, double gamma);

/// P rho = sum_n |n><n| rho |n><n| for a complete orthonormal basis.
Superoperator dephasing_projector(int dim, const std::vector<Vector>& basis);
Superoperator dephasing_projector(int dim);  // computational basis

/// -gamma (id - P) for an idempotent P; e^{tL} = P + e^{-gamma t}(id - P).
Superoperator projector_complement_generator(double gamma, const Superoperator& projector);

/// Dephasing onto the product basis |m (x) n> of C^d1 (x) C^d2.
Superoperator block_projection_channel(int d1, int d2);

/// Qubit amplitude damping towards |0> with decay probability g in (0, 1].
/// For g > 0 the channel has the unique fixed point |0><0|.
Superoperator amplitude_damping_channel(double g);

// ---------------------------------------------------------------- pure decoherence

/// System Hamiltonian sum_n eps_n |n><n| coupled to a finite reservoir through
/// sum_n |n><n| (x) B_n; the reservoir starts in omega_R.
struct DecoherenceModel {
    std::vector<double> eps;
    Matrix reservoir_hamiltonian;
    std::vector<Matrix> couplings;
    Matrix reservoir_state;

    int sys_dim() const noexcept { return static_cast<int>(eps.size()); }
    int reservoir_dim() const noexcept { return static_cast<int>(reservoir_hamiltonian.rows()); }

    /// Throws std::invalid_argument describing the first inconsistency.
    void validate(const Tolerances& tol = {}) const;

    /// Z_n = eps_n 1 + H_R + B_n.
    Matrix reservoir_operator(int n) const;

    /// Full system-reservoir Hamiltonian, system factor first.
    Matrix total_hamiltonian() const;
};

/// c_mn(t) = Tr(e^{-i Z_m t} omega_R e^{i Z_n t}).
struct CoeffMatrix {
    double time = 0.0;
    Matrix c;
};

CoeffMatrix pure_decoherence_coeffs(const DecoherenceModel& model, double t);

/// Throws std::invalid_argument if c is not PSD with unit diagonal.
void check_coeff_matrix(const CoeffMatrix& c, const Tolerances& tol = {});

/// rho_t[m, n] = c_mn rho[m, n]. Rejects coefficient matrices that are not PSD.
DensityMatrix pure_decoherence_apply(const CoeffMatrix& c, const DensityMatrix& rho);

/// The same map as a superoperator: diag(vec(c)).
Superoperator pure_decoherence_superop(const CoeffMatrix& c);

/// |Tr sigma_tau| with sigma_tau = sum_mn dc_mn/dt(tau) P_m rho P_n, using a
/// central difference with step 1e-5 max(1, tau).
double phi_trace_check(const DecoherenceModel& model, double tau, const DensityMatrix& rho);

/// sigma_tau itself, for inspection.
Matrix decoherence_phi_action(const DecoherenceModel& model, double tau, const DensityMatrix& rho);

}  // namespace memdyn
