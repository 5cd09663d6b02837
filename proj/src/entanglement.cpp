// entanglement.cpp: PPT / negativity diagnostics, Werner and Bell-diagonal checks

#include "memdyn/entanglement.hpp"

#include <cmath>
#include <future>
#include <numeric>

#include "memdyn/laplace.hpp"

namespace memdyn {

BellBasis bell_basis()
{
    const double r = 1.0 / std::sqrt(2.0);
    BellBasis b;
    for (auto& v : b.states) v = Vector::Zero(4);
    b.states[0](0) = r;
    b.states[0](3) = r;
    b.states[1](0) = r;
    b.states[1](3) = -r;
    b.states[2](1) = r;
    b.states[2](2) = r;
    b.states[3](1) = r;
    b.states[3](2) = -r;
    return b;
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::entangled: return "entangled";
    case Verdict::separable: return "separable";
    case Verdict::undetermined: return "undetermined";
    }
    return "undetermined";
}

double negativity(const Matrix& rho, std::span<const int> factor_dims)
{
    if (factor_dims.size() != 2) throw DimensionError("negativity needs a bipartite factor structure");
    const Eigen::VectorXd ev = hermitian_eigenvalues(partial_transpose(rho, factor_dims, 1));
    double neg = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < 0.0) neg -= ev(k);
    }
    return neg;
}

double negativity(const DensityMatrix& rho)
{
    return negativity(rho.matrix(), rho.factor_dims());
}

EntanglementReport entanglement_report(const Matrix& rho, std::span<const int> factor_dims, double tol)
{
    EntanglementReport r;
    r.negativity = negativity(rho, factor_dims);
    r.is_ppt = r.negativity <= tol;
    if (!r.is_ppt) {
        r.verdict = Verdict::entangled;
    } else {
        const int small = std::min(factor_dims[0], factor_dims[1]);
        const int large = std::max(factor_dims[0], factor_dims[1]);
        r.verdict = (small * large <= 6) ? Verdict::separable : Verdict::undetermined;
    }
    return r;
}

EntanglementReport entanglement_report(const DensityMatrix& rho, double tol)
{
    return entanglement_report(rho.matrix(), rho.factor_dims(), tol);
}

EntanglementReport werner_asymptote_check(double p, const Vector& psi)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Werner p must lie in [0, 1]");
    if (psi.size() != 4) throw DimensionError("Werner check needs a two-qubit vector");
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("psi must be normalised");
    const std::vector<int> dims{2, 2};
    const Matrix reduced = partial_trace(outer(psi), dims, 1);
    if (max_abs(reduced - 0.5 * Matrix::Identity(2, 2)) > 1e-10) {
        throw std::invalid_argument("psi is not maximally entangled");
    }
    const Matrix state = (1.0 - p) / 4.0 * Matrix::Identity(4, 4) + p * outer(psi);
    return entanglement_report(state, dims);
}

std::array<double, 4> bell_diagonal_probs(const DensityMatrix& rho0, double p, const BellBasis& basis)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (rho0.dim() != 4) throw DimensionError("Bell-diagonal probabilities need a two-qubit state");
    std::array<double, 4> out{};
    for (std::size_t a = 0; a < 4; ++a) {
        const cplx overlap = basis.states[a].dot(rho0.matrix() * basis.states[a]);
        out[a] = (1.0 - p) / 4.0 + p * overlap.real();
    }
    return out;
}

DensityMatrix bell_diagonal_state(const std::array<double, 4>& probs, const BellBasis& basis)
{
    Matrix m = Matrix::Zero(4, 4);
    for (std::size_t a = 0; a < 4; ++a) m += probs[a] * outer(basis.states[a]);
    return DensityMatrix(m, {2, 2});
}

bool bell_diagonal_entangled(const std::array<double, 4>& probs)
{
    double total = 0.0;
    for (double q : probs) {
        if (!(q >= -1e-12)) throw std::invalid_argument("Bell-diagonal probabilities must be nonnegative");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("Bell-diagonal probabilities must sum to 1");
    int above = 0;
    for (double q : probs) {
        if (q > 0.5) ++above;
    }
    return above == 1;
}

// ---------------------------------------------------------------- sweeps

Matrix asymptotic_state(const AsymptoticFamily& family, double param, const DensityMatrix& rho0)
{
    const Superoperator limit = std::visit(
        [param](const auto& fam) -> Superoperator {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, IdentityMixtureFamily>) {
                return asymptotic_identity_mixture(fam.generator, param);
            } else {
                return asymptotic_channel_memory(param, fam.channel);
            }
        },
        family);
    return apply_superop(limit, rho0);
}

std::vector<SweepRow> asymptotic_entanglement_sweep(const DensityMatrix& rho0, const AsymptoticFamily& family,
                                                    std::span<const double> param_grid)
{
    if (rho0.factor_dims().size() != 2) throw DimensionError("sweep needs a bipartite initial state");
    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(param_grid.size());
    for (double param : param_grid) {
        jobs.push_back(std::async(std::launch::async, [&rho0, &family, param]() {
            const Matrix state = asymptotic_state(family, param, rho0);
            const EntanglementReport rep = entanglement_report(state, rho0.factor_dims());
            return SweepRow{param, rep.negativity, rep.verdict};
        }));
    }
    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

}  // namespace memdyn
