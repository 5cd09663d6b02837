// Python bindings: numpy arrays in and out, superoperators as d^2 x d^2 arrays.

#include <cmath>
#include <fstream>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "memdyn/entanglement.hpp"
#include "memdyn/evolutions.hpp"
#include "memdyn/expm.hpp"
#include "memdyn/generators.hpp"
#include "memdyn/laplace.hpp"
#include "memdyn/scenario.hpp"

namespace py = pybind11;
using namespace memdyn;

namespace {

Superoperator as_superop(const Matrix& m)
{
    const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.rows()))));
    if (d * d != m.rows() || m.rows() != m.cols()) {
        throw DimensionError("superoperator array must be square with a perfect-square size");
    }
    return Superoperator(d, m);
}

py::dict report_dict(const CPTPReport& r)
{
    py::dict d;
    d["min_choi_eigenvalue"] = r.min_choi_eigenvalue;
    d["trace_preservation_error"] = r.trace_preservation_error;
    d["hermiticity_error"] = r.hermiticity_error;
    d["is_cp"] = r.is_cp;
    d["is_tp"] = r.is_tp;
    d["is_cptp"] = r.is_cptp();
    return d;
}

py::dict entanglement_dict(const EntanglementReport& r)
{
    py::dict d;
    d["negativity"] = r.negativity;
    d["is_ppt"] = r.is_ppt;
    d["verdict"] = to_string(r.verdict);
    return d;
}

std::string read_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Scenario parse_or_throw(const std::string& text, const RunOptions& opts)
{
    ParseResult r = parse_scenario_text(text, opts);
    if (!r.ok()) {
        std::string msg = "invalid scenario:";
        for (const auto& e : r.errors) msg += "\n  " + (e.path.empty() ? std::string("(root)") : e.path) + ": " + e.message;
        throw std::invalid_argument(msg);
    }
    return std::move(*r.scenario);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Non-Markovian quantum dynamical maps: propagators, memory kernels, asymptotics, entanglement";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    // qcore
    m.def("matrix_exp", &matrix_exp, py::arg("m"));
    m.def("vectorize", [](const Matrix& x) { return vectorize(x); }, py::arg("x"));
    m.def("devectorize", &devectorize, py::arg("v"));
    m.def(
        "superop_from_kraus", [](const std::vector<Matrix>& ops) { return superop_from_kraus(ops).matrix(); },
        py::arg("kraus_ops"));
    m.def(
        "choi_matrix", [](const Matrix& s) { return choi_matrix(as_superop(s)).matrix; }, py::arg("superop"));
    m.def(
        "is_cptp", [](const Matrix& s, double tol) { return report_dict(is_cptp(as_superop(s), tol)); },
        py::arg("superop"), py::arg("tol") = 1e-10);
    m.def(
        "partial_trace",
        [](const Matrix& x, const std::vector<int>& dims, int which) { return partial_trace(x, dims, which); },
        py::arg("x"), py::arg("dims"), py::arg("which"));
    m.def(
        "partial_transpose",
        [](const Matrix& x, const std::vector<int>& dims, int which) { return partial_transpose(x, dims, which); },
        py::arg("x"), py::arg("dims"), py::arg("which"));
    m.def(
        "validate_state",
        [](const Matrix& rho) { return DensityMatrix(rho).matrix(); }, py::arg("rho"),
        "Checks a density matrix and returns its symmetrised, trace-normalised copy.");

    // generators
    m.def(
        "gksl_generator",
        [](const Matrix& h, const std::vector<Matrix>& ops, const std::vector<double>& rates) {
            return gksl_generator(GKSLSpec{h, ops, rates}).matrix();
        },
        py::arg("hamiltonian"), py::arg("jump_ops"), py::arg("rates"));
    m.def(
        "depolarizing_generator", [](int d, double g) { return depolarizing_generator(d, g).matrix(); },
        py::arg("dim"), py::arg("gamma"));
    m.def(
        "dephasing_projector", [](int d) { return dephasing_projector(d).matrix(); }, py::arg("dim"));
    m.def(
        "bell_dephasing_projector",
        [] {
            const BellBasis b = bell_basis();
            return dephasing_projector(4, std::vector<Vector>(b.states.begin(), b.states.end())).matrix();
        });
    m.def(
        "block_projection_channel", [](int d1, int d2) { return block_projection_channel(d1, d2).matrix(); },
        py::arg("d1"), py::arg("d2"));
    m.def(
        "amplitude_damping_channel", [](double g) { return amplitude_damping_channel(g).matrix(); }, py::arg("g"));

    // evolutions
    m.def(
        "semigroup_propagator", [](const Matrix& l, double t) { return semigroup_propagator(as_superop(l), t).matrix(); },
        py::arg("generator"), py::arg("t"));
    m.def(
        "identity_mixture_propagator",
        [](const Matrix& l, double p, double t) { return identity_mixture_propagator(as_superop(l), p, t).matrix(); },
        py::arg("generator"), py::arg("p"), py::arg("t"));
    m.def(
        "channel_memory_propagator",
        [](double eps, double gamma, const Matrix& b, double t) {
            return channel_memory_propagator(MemoryFn::exponential(eps, gamma), as_superop(b), t).matrix();
        },
        py::arg("eps"), py::arg("gamma"), py::arg("channel"), py::arg("t"));
    m.def(
        "volterra_identity_mixture",
        [](const Matrix& l, double p, const Matrix& rho0, double t_end, double dt) {
            const Trajectory traj =
                volterra_solve(memory_kernel_identity_mixture(as_superop(l), p), DensityMatrix(rho0), t_end, dt);
            return py::make_tuple(traj.times, traj.states);
        },
        py::arg("generator"), py::arg("p"), py::arg("rho0"), py::arg("t_end"), py::arg("dt"),
        "Integrates the memory kernel of (1 - p)e^{tL} + p id; returns (times, states).");
    m.def(
        "volterra_channel_memory",
        [](double eps, double gamma, const Matrix& b, const Matrix& rho0, double t_end, double dt) {
            const MemoryKernel k = channel_memory_kernel(kappa_exponential(eps, gamma), as_superop(b));
            const Trajectory traj = volterra_solve(k, DensityMatrix(rho0), t_end, dt);
            return py::make_tuple(traj.times, traj.states);
        },
        py::arg("eps"), py::arg("gamma"), py::arg("channel"), py::arg("rho0"), py::arg("t_end"), py::arg("dt"));

    // laplace
    m.def(
        "semigroup_limit", [](const Matrix& l) { return semigroup_limit(as_superop(l)).matrix(); },
        py::arg("generator"));
    m.def(
        "asymptotic_identity_mixture",
        [](const Matrix& l, double p) { return asymptotic_identity_mixture(as_superop(l), p).matrix(); },
        py::arg("generator"), py::arg("p"));
    m.def(
        "asymptotic_channel_memory",
        [](double f0, const Matrix& b) { return asymptotic_channel_memory(f0, as_superop(b)).matrix(); },
        py::arg("f0"), py::arg("channel"));
    m.def(
        "identity_mixture_generator_laplace",
        [](const Matrix& l, double p, cplx s) { return identity_mixture_generator_laplace(as_superop(l), p, s).matrix(); },
        py::arg("generator"), py::arg("p"), py::arg("s"));
    m.def(
        "numerical_laplace",
        [](const std::function<Matrix(double)>& g, cplx s, double tol) {
            LaplaceOptions opts;
            opts.tol = tol;
            return numerical_laplace(g, s, opts).value;
        },
        py::arg("g"), py::arg("s"), py::arg("tol") = 1e-10);

    // entanglement
    m.def(
        "negativity", [](const Matrix& rho, const std::vector<int>& dims) { return negativity(rho, dims); },
        py::arg("rho"), py::arg("dims"));
    m.def(
        "entanglement_report",
        [](const Matrix& rho, const std::vector<int>& dims) { return entanglement_dict(entanglement_report(rho, dims)); },
        py::arg("rho"), py::arg("dims"));
    m.def(
        "bell_basis",
        [] {
            const BellBasis b = bell_basis();
            return std::vector<Vector>(b.states.begin(), b.states.end());
        },
        "Bell vectors in the order phi+, phi-, psi+, psi-.");
    m.def(
        "werner_asymptote_check", [](double p) { return entanglement_dict(werner_asymptote_check(p, bell_basis().states[0])); },
        py::arg("p"));

    // scenarios
    m.def(
        "validate_scenario",
        [](const std::string& text) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& e : parse_scenario_text(text).errors) out.emplace_back(e.path, e.message);
            return out;
        },
        py::arg("text"), "Returns (json_path, message) pairs; empty when the scenario is valid.");
    m.def(
        "run_scenario",
        [](const std::filesystem::path& path, const std::filesystem::path& out_dir, std::uint64_t seed,
           double tol_scale) {
            const RunOptions opts{seed, tol_scale};
            const Scenario sc = parse_or_throw(read_text(path), opts);
            const RunResult r = run_scenario(sc, out_dir, opts);
            py::dict d;
            d["passed"] = r.passed();
            d["metrics"] = r.metrics;
            d["violations"] = r.violations;
            py::list exps;
            for (const auto& e : r.expectations) {
                py::dict x;
                x["name"] = e.expectation.name;
                x["metric"] = e.expectation.metric;
                x["observed"] = e.observed ? py::cast(*e.observed) : py::none();
                x["passed"] = e.passed;
                exps.append(x);
            }
            d["expectations"] = exps;
            d["files"] = r.files;
            return d;
        },
        py::arg("path"), py::arg("out_dir"), py::arg("seed") = 7, py::arg("tol_scale") = 1.0);
    m.def(
        "sweep_scenario",
        [](const std::filesystem::path& path, const std::string& param, const std::vector<double>& values,
           std::uint64_t seed) {
            const RunOptions opts{seed, 1.0};
            const Scenario sc = parse_or_throw(read_text(path), opts);
            std::vector<std::tuple<double, double, std::string>> rows;
            for (const auto& r : sweep_scenario(sc, param, values, opts)) {
                rows.emplace_back(r.param, r.negativity, to_string(r.verdict));
            }
            return rows;
        },
        py::arg("path"), py::arg("param"), py::arg("values"), py::arg("seed") = 7,
        "Rows of (value, asymptotic negativity, verdict).");
}
