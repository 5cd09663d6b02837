// scenario.cpp: scenario files: parsing, validation, runs and sweeps

#include "memdyn/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "memdyn/expm.hpp"
#include "memdyn/io.hpp"
#include "memdyn/laplace.hpp"
#include "memdyn/random.hpp"

namespace memdyn {

using nlohmann::json;

namespace {

// ================================================================ parsing

class Parser {
public:
    explicit Parser(const RunOptions& opts) : rng_(opts.seed) {}

    std::vector<ValidationError> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back({path, msg}); }

    const json* field(const json& obj, const std::string& key, const std::string& path, bool required = true)
    {
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return nullptr;
        }
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(path + "." + key, "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                                 std::optional<double> lo = std::nullopt, std::optional<double> hi = std::nullopt,
                                 bool required = true)
    {
        const json* j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        const std::string p = path + "." + key;
        if (!j->is_number()) {
            fail(p, "expected a number");
            return std::nullopt;
        }
        const double v = j->get<double>();
        if (!std::isfinite(v) || (lo && v < *lo) || (hi && v > *hi)) {
            std::ostringstream os;
            os << "value " << v << " out of range";
            if (lo || hi) {
                os << " [" << (lo ? io::format_double(*lo) : std::string("-inf")) << ", "
                   << (hi ? io::format_double(*hi) : std::string("inf")) << "]";
            }
            fail(p, os.str());
            return std::nullopt;
        }
        return v;
    }

    std::optional<int> integer(const json& obj, const std::string& key, const std::string& path, int lo = 1,
                               bool required = true)
    {
        const json* j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (!j->is_number_integer() || j->get<long>() < lo) {
            fail(path + "." + key, "expected an integer >= " + std::to_string(lo));
            return std::nullopt;
        }
        return static_cast<int>(j->get<long>());
    }

    std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                      bool required = true)
    {
        const json* j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (!j->is_string()) {
            fail(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return j->get<std::string>();
    }

    template <typename F>
    auto guarded(const std::string& path, F&& f) -> std::optional<decltype(f())>
    {
        try {
            return f();
        } catch (const std::exception& e) {
            fail(path, e.what());
            return std::nullopt;
        }
    }

    std::optional<Matrix> matrix(const json& j, const std::string& path)
    {
        return guarded(path, [&] { return io::matrix_from_json(j); });
    }

    std::optional<std::vector<Matrix>> matrix_list(const json& obj, const std::string& key, const std::string& path)
    {
        const json* j = field(obj, key, path);
        if (!j) return std::nullopt;
        if (!j->is_array()) {
            fail(path + "." + key, "expected an array of matrices");
            return std::nullopt;
        }
        std::vector<Matrix> out;
        bool ok = true;
        for (std::size_t k = 0; k < j->size(); ++k) {
            auto m = matrix((*j)[k], path + "." + key + "[" + std::to_string(k) + "]");
            if (m) {
                out.push_back(std::move(*m));
            } else {
                ok = false;
            }
        }
        if (!ok) return std::nullopt;
        return out;
    }

    std::optional<std::vector<double>> number_list(const json& obj, const std::string& key, const std::string& path,
                                                   bool required = true)
    {
        const json* j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (!j->is_array()) {
            fail(path + "." + key, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < j->size(); ++k) {
            if (!(*j)[k].is_number()) {
                fail(path + "." + key + "[" + std::to_string(k) + "]", "expected a number");
                return std::nullopt;
            }
            out.push_back((*j)[k].get<double>());
        }
        return out;
    }

    std::optional<Superoperator> generator(const json& j, const std::string& path)
    {
        const auto type = string(j, "type", path);
        if (!type) return std::nullopt;
        if (*type == "depolarizing") {
            const auto dim = integer(j, "dim", path);
            const auto gamma = number(j, "gamma", path, 0.0);
            if (!dim || !gamma) return std::nullopt;
            return depolarizing_generator(*dim, *gamma);
        }
        if (*type == "zero") {
            const auto dim = integer(j, "dim", path);
            if (!dim) return std::nullopt;
            return Superoperator::zero(*dim);
        }
        if (*type == "gksl") {
            const json* h = field(j, "hamiltonian", path);
            auto ham = h ? matrix(*h, path + ".hamiltonian") : std::nullopt;
            auto ops = matrix_list(j, "jump_ops", path);
            auto rates = number_list(j, "rates", path);
            if (!ham || !ops || !rates) return std::nullopt;
            return guarded(path, [&] { return gksl_generator(GKSLSpec{*ham, *ops, *rates}); });
        }
        if (*type == "projector_complement") {
            const auto gamma = number(j, "gamma", path, 0.0);
            const json* c = field(j, "projector", path);
            auto proj = c ? channel(*c, path + ".projector") : std::nullopt;
            if (!gamma || !proj) return std::nullopt;
            return guarded(path, [&] { return projector_complement_generator(*gamma, *proj); });
        }
        fail(path + ".type", "unknown generator type \"" + *type + "\"");
        return std::nullopt;
    }

    std::optional<Superoperator> channel(const json& j, const std::string& path)
    {
        const auto type = string(j, "type", path);
        if (!type) return std::nullopt;
        if (*type == "block_projection") {
            auto dims = number_list(j, "dims", path);
            if (!dims) return std::nullopt;
            if (dims->size() != 2 || (*dims)[0] < 1 || (*dims)[1] < 1) {
                fail(path + ".dims", "expected two positive dimensions");
                return std::nullopt;
            }
            return block_projection_channel(static_cast<int>((*dims)[0]), static_cast<int>((*dims)[1]));
        }
        if (*type == "identity") {
            const auto dim = integer(j, "dim", path);
            if (!dim) return std::nullopt;
            return Superoperator::identity(*dim);
        }
        if (*type == "amplitude_damping") {
            const auto g = number(j, "g", path, 0.0, 1.0);
            if (!g) return std::nullopt;
            return guarded(path + ".g", [&] { return amplitude_damping_channel(*g); });
        }
        if (*type == "kraus") {
            auto ops = matrix_list(j, "ops", path);
            if (!ops) return std::nullopt;
            return guarded(path, [&] { return superop_from_kraus(*ops); });
        }
        if (*type == "dephasing") {
            const json* basis = field(j, "basis", path, false);
            if (basis && basis->is_string()) {
                if (basis->get<std::string>() != "bell") {
                    fail(path + ".basis", "named basis must be \"bell\"");
                    return std::nullopt;
                }
                const BellBasis b = bell_basis();
                return dephasing_projector(4, std::vector<Vector>(b.states.begin(), b.states.end()));
            }
            if (basis && basis->is_array()) {
                std::vector<Vector> vecs;
                for (std::size_t k = 0; k < basis->size(); ++k) {
                    auto v = guarded(path + ".basis[" + std::to_string(k) + "]",
                                     [&] { return io::vector_from_json((*basis)[k]); });
                    if (!v) return std::nullopt;
                    vecs.push_back(std::move(*v));
                }
                return guarded(path + ".basis",
                               [&] { return dephasing_projector(static_cast<int>(vecs.size()), vecs); });
            }
            const auto dim = integer(j, "dim", path);
            if (!dim) return std::nullopt;
            return dephasing_projector(*dim);
        }
        fail(path + ".type", "unknown channel type \"" + *type + "\"");
        return std::nullopt;
    }

    std::optional<MemoryFn> memory(const json& j, const std::string& path)
    {
        const auto kind = string(j, "kind", path);
        if (!kind) return std::nullopt;
        if (*kind == "exponential") {
            const auto eps = number(j, "eps", path, 0.0, 1.0);
            const auto gamma = number(j, "gamma", path, 0.0);
            if (!eps || !gamma) return std::nullopt;
            if (*eps <= 0.0) {
                fail(path + ".eps", "eps must be > 0");
                return std::nullopt;
            }
            if (*gamma <= 0.0) {
                fail(path + ".gamma", "gamma must be > 0");
                return std::nullopt;
            }
            return MemoryFn::exponential(*eps, *gamma);
        }
        if (*kind == "tabulated") {
            auto grid = number_list(j, "grid", path);
            auto values = number_list(j, "values", path);
            if (!grid || !values) return std::nullopt;
            return guarded(path, [&] { return MemoryFn::tabulated(*grid, *values); });
        }
        fail(path + ".kind", "unknown memory kind \"" + *kind + "\"");
        return std::nullopt;
    }

    std::optional<DecoherenceModel> model(const json& j, const std::string& path)
    {
        if (const json* rnd = field(j, "random", path, false)) {
            const std::string rp = path + ".random";
            const auto d = integer(*rnd, "sys_dim", rp);
            const auto r = integer(*rnd, "reservoir_dim", rp);
            const auto scale = number(*rnd, "scale", rp, 0.0, std::nullopt, false);
            if (!d || !r) return std::nullopt;
            return random_decoherence_model(rng_, *d, *r, scale.value_or(1.0));
        }
        DecoherenceModel m;
        auto eps = number_list(j, "eps", path);
        const json* h = field(j, "reservoir_hamiltonian", path);
        auto ham = h ? matrix(*h, path + ".reservoir_hamiltonian") : std::nullopt;
        auto couplings = matrix_list(j, "couplings", path);
        const json* w = field(j, "reservoir_state", path);
        auto omega = w ? matrix(*w, path + ".reservoir_state") : std::nullopt;
        if (!eps || !ham || !couplings || !omega) return std::nullopt;
        m.eps = *eps;
        m.reservoir_hamiltonian = *ham;
        m.couplings = *couplings;
        m.reservoir_state = *omega;
        if (!guarded(path, [&] {
                m.validate();
                return true;
            })) {
            return std::nullopt;
        }
        return m;
    }

    std::optional<std::vector<int>> factor_dims(const json& j, const std::string& path)
    {
        auto dims = number_list(j, "factor_dims", path, false);
        if (!dims) return std::vector<int>{};
        std::vector<int> out;
        for (double d : *dims) {
            if (d < 1 || d != std::floor(d)) {
                fail(path + ".factor_dims", "factor dimensions must be positive integers");
                return std::nullopt;
            }
            out.push_back(static_cast<int>(d));
        }
        return out;
    }

    std::optional<DensityMatrix> state(const json& j, const std::string& path)
    {
        const auto type = string(j, "type", path);
        auto dims = factor_dims(j, path);
        if (!type || !dims) return std::nullopt;
        if (*type == "bell") {
            const auto which = string(j, "which", path);
            if (!which) return std::nullopt;
            static const std::map<std::string, std::size_t> names{
                {"phi+", 0}, {"phi-", 1}, {"psi+", 2}, {"psi-", 3}};
            const auto it = names.find(*which);
            if (it == names.end()) {
                fail(path + ".which", "expected one of phi+, phi-, psi+, psi-");
                return std::nullopt;
            }
            return DensityMatrix::pure(bell_basis().states[it->second], dims->empty() ? std::vector<int>{2, 2} : *dims);
        }
        if (*type == "basis") {
            const auto dim = integer(j, "dim", path);
            const auto index = integer(j, "index", path, 0);
            if (!dim || !index) return std::nullopt;
            if (*index >= *dim) {
                fail(path + ".index", "basis index must be < dim");
                return std::nullopt;
            }
            return guarded(path, [&] { return DensityMatrix::pure(Vector::Unit(*dim, *index), *dims); });
        }
        if (*type == "pure") {
            auto v = guarded(path, [&] { return io::vector_from_json(j); });
            if (!v) return std::nullopt;
            return guarded(path, [&] { return DensityMatrix::pure(*v, *dims); });
        }
        if (*type == "matrix") {
            const json* m = field(j, "matrix", path);
            auto mat = m ? matrix(*m, path + ".matrix") : std::nullopt;
            if (!mat) return std::nullopt;
            return guarded(path + ".matrix", [&] { return DensityMatrix(*mat, *dims); });
        }
        if (*type == "maximally_mixed") {
            const auto dim = integer(j, "dim", path);
            if (!dim) return std::nullopt;
            return guarded(path, [&] { return DensityMatrix::maximally_mixed(*dim, *dims); });
        }
        if (*type == "random") {
            const auto dim = integer(j, "dim", path);
            const auto rank = integer(j, "rank", path, 1, false);
            if (!dim) return std::nullopt;
            return guarded(path, [&] { return random_state(rng_, *dim, rank.value_or(0), *dims); });
        }
        fail(path + ".type", "unknown state type \"" + *type + "\"");
        return std::nullopt;
    }

    std::optional<Evolution> volterra(const json& j, const std::string& path)
    {
        const json* kj = field(j, "kernel", path);
        if (!kj) return std::nullopt;
        const std::string kp = path + ".kernel";
        const auto type = string(*kj, "type", kp);
        if (!type) return std::nullopt;
        if (*type == "zero") {
            const auto dim = integer(*kj, "dim", kp);
            if (!dim) return std::nullopt;
            const int d = *dim;
            PropagatorFn ref = [d](double) { return Superoperator::identity(d); };
            return evo::Volterra{*type, MemoryKernel::zero(d), ref, Superoperator::identity(d)};
        }
        if (*type == "identity_mixture") {
            const json* g = field(*kj, "generator", kp);
            auto gen = g ? generator(*g, kp + ".generator") : std::nullopt;
            const auto p = number(*kj, "p", kp, 0.0, 1.0);
            if (!gen || !p) return std::nullopt;
            const Superoperator l = *gen;
            const double pv = *p;
            PropagatorFn ref = [l, pv](double t) { return identity_mixture_propagator(l, pv, t); };
            return evo::Volterra{*type, memory_kernel_identity_mixture(l, pv), ref, asymptotic_identity_mixture(l, pv)};
        }
        if (*type == "channel_memory") {
            const auto eps = number(*kj, "eps", kp, 0.0, 1.0);
            const auto gamma = number(*kj, "gamma", kp, 0.0);
            const json* c = field(*kj, "channel", kp);
            auto ch = c ? channel(*c, kp + ".channel") : std::nullopt;
            if (!eps || !gamma || !ch) return std::nullopt;
            if (*eps <= 0.0 || *gamma <= 0.0) {
                fail(kp, "eps and gamma must be > 0");
                return std::nullopt;
            }
            const Superoperator b = *ch;
            if (!is_cptp(b).is_cptp()) {
                fail(kp + ".channel", "channel is not CPTP");
                return std::nullopt;
            }
            const MemoryFn f = MemoryFn::exponential(*eps, *gamma);
            std::optional<PropagatorFn> ref;
            if (max_abs(b.matrix() * b.matrix() - b.matrix()) <= 1e-10) {
                ref = [f, b](double t) { return channel_memory_propagator(f, b, t); };
            }
            auto asym = guarded(kp, [&] { return asymptotic_channel_memory(*eps, b); });
            return evo::Volterra{*type, channel_memory_kernel(kappa_exponential(*eps, *gamma), b), ref, asym};
        }
        fail(kp + ".type", "unknown kernel type \"" + *type + "\"");
        return std::nullopt;
    }

    std::optional<Evolution> evolution(const json& j, const std::string& path)
    {
        const auto type = string(j, "type", path);
        if (!type) return std::nullopt;
        auto gen_at = [&](const char* key) -> std::optional<Superoperator> {
            const json* g = field(j, key, path);
            return g ? generator(*g, path + "." + key) : std::nullopt;
        };
        if (*type == "semigroup") {
            auto g = gen_at("generator");
            if (!g) return std::nullopt;
            return evo::Semigroup{*g};
        }
        if (*type == "convex_mixture") {
            auto weights = number_list(j, "weights", path);
            const json* gs = field(j, "generators", path);
            std::vector<Superoperator> gens;
            bool ok = gs && gs->is_array();
            if (gs && !gs->is_array()) fail(path + ".generators", "expected an array of generators");
            if (ok) {
                for (std::size_t k = 0; k < gs->size(); ++k) {
                    auto g = generator((*gs)[k], path + ".generators[" + std::to_string(k) + "]");
                    if (g) {
                        gens.push_back(*g);
                    } else {
                        ok = false;
                    }
                }
            }
            if (!weights || !ok) return std::nullopt;
            if (weights->size() != gens.size()) {
                fail(path + ".weights", "need one weight per generator");
                return std::nullopt;
            }
            double total = 0.0;
            for (std::size_t k = 0; k < weights->size(); ++k) {
                if ((*weights)[k] < 0.0) fail(path + ".weights[" + std::to_string(k) + "]", "weight must be >= 0");
                total += (*weights)[k];
            }
            if (std::abs(total - 1.0) > 1e-12) {
                fail(path + ".weights", "weights must sum to 1");
                return std::nullopt;
            }
            for (std::size_t k = 1; k < gens.size(); ++k) {
                if (gens[k].dim() != gens[0].dim()) {
                    fail(path + ".generators[" + std::to_string(k) + "]", "generator dimensions differ");
                    return std::nullopt;
                }
            }
            return evo::ConvexMixture{*weights, gens};
        }
        if (*type == "identity_mixture") {
            auto g = gen_at("generator");
            const auto p = number(j, "p", path, 0.0, 1.0);
            if (!g || !p) return std::nullopt;
            return evo::IdentityMixture{*g, *p};
        }
        if (*type == "projector_mixture") {
            auto g = gen_at("generator");
            const auto p = number(j, "p", path, 0.0, 1.0);
            const auto gamma = number(j, "gamma", path, 0.0);
            const json* c = field(j, "projector", path);
            auto proj = c ? channel(*c, path + ".projector") : std::nullopt;
            if (!g || !p || !gamma || !proj) return std::nullopt;
            if (proj->dim() != g->dim()) {
                fail(path + ".projector", "projector and generator dimensions differ");
                return std::nullopt;
            }
            if (max_abs(proj->matrix() * proj->matrix() - proj->matrix()) > 1e-10) {
                fail(path + ".projector", "projector is not idempotent");
                return std::nullopt;
            }
            return evo::ProjectorMixture{*g, *p, *gamma, *proj};
        }
        if (*type == "channel_memory") {
            const json* m = field(j, "memory", path);
            auto mem = m ? memory(*m, path + ".memory") : std::nullopt;
            const json* c = field(j, "channel", path);
            auto ch = c ? channel(*c, path + ".channel") : std::nullopt;
            if (!mem || !ch) return std::nullopt;
            if (!is_cptp(*ch).is_cptp()) {
                fail(path + ".channel", "channel is not CPTP");
                return std::nullopt;
            }
            if (max_abs(ch->matrix() * ch->matrix() - ch->matrix()) > 1e-10) {
                fail(path + ".channel", "closed-form channel memory needs an idempotent channel; use a volterra kernel");
                return std::nullopt;
            }
            return evo::ChannelMemory{*mem, *ch};
        }
        if (*type == "pure_decoherence") {
            const json* m = field(j, "model", path);
            auto mod = m ? model(*m, path + ".model") : std::nullopt;
            if (!mod) return std::nullopt;
            return evo::PureDecoherence{*mod};
        }
        if (*type == "volterra") return volterra(j, path);
        fail(path + ".type", "unknown evolution type \"" + *type + "\"");
        return std::nullopt;
    }

    std::optional<Grid> grid(const json& j, const std::string& path)
    {
        const auto t_end = number(j, "t_end", path, 0.0);
        const auto dt = number(j, "dt", path, 0.0);
        const auto every = integer(j, "output_every", path, 1, false);
        if (!t_end || !dt) return std::nullopt;
        if (*dt <= 0.0 || *t_end < *dt) {
            fail(path, "need 0 < dt <= t_end");
            return std::nullopt;
        }
        const double steps = std::round(*t_end / *dt);
        if (std::abs(steps * *dt - *t_end) > 1e-9 * std::max(1.0, *t_end)) {
            fail(path + ".dt", "t_end must be an integer multiple of dt");
            return std::nullopt;
        }
        return Grid{*t_end, *dt, static_cast<std::size_t>(every.value_or(1))};
    }

    std::vector<Analysis> analyses(const json& j, const std::string& path)
    {
        static const std::vector<std::string> known{"trajectory",       "asymptote",   "entanglement",
                                                    "invariance_defect", "kernel_check", "laplace_generator"};
        std::vector<Analysis> out;
        if (!j.is_array()) {
            fail(path, "expected an array");
            return out;
        }
        for (std::size_t k = 0; k < j.size(); ++k) {
            const std::string p = path + "[" + std::to_string(k) + "]";
            Analysis a;
            if (j[k].is_string()) {
                a.type = j[k].get<std::string>();
                a.options = json::object();
            } else if (j[k].is_object() && j[k].contains("type") && j[k]["type"].is_string()) {
                a.type = j[k]["type"].get<std::string>();
                a.options = j[k];
            } else {
                fail(p, "analysis must be a name or an object with \"type\"");
                continue;
            }
            if (std::find(known.begin(), known.end(), a.type) == known.end()) {
                fail(p, "unknown analysis \"" + a.type + "\"");
                continue;
            }
            out.push_back(std::move(a));
        }
        return out;
    }

    std::vector<Expectation> expectations(const json& j, const std::string& path)
    {
        std::vector<Expectation> out;
        if (!j.is_array()) {
            fail(path, "expected an array");
            return out;
        }
        for (std::size_t k = 0; k < j.size(); ++k) {
            const std::string p = path + "[" + std::to_string(k) + "]";
            const auto name = string(j[k], "name", p);
            const auto metric = string(j[k], "metric", p);
            const auto op = string(j[k], "op", p);
            const auto value = number(j[k], "value", p);
            const auto tol = number(j[k], "tol", p, 0.0, std::nullopt, false);
            if (op && *op != "eq" && *op != "le" && *op != "ge") fail(p + ".op", "op must be eq, le or ge");
            if (name && metric && op && value) out.push_back({*name, *metric, *op, *value, tol.value_or(0.0)});
        }
        return out;
    }

    Rng& rng() { return rng_; }

private:
    Rng rng_;
};

}  // namespace

std::string evolution_type(const Evolution& e)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, evo::Semigroup>) return "semigroup";
            if constexpr (std::is_same_v<T, evo::ConvexMixture>) return "convex_mixture";
            if constexpr (std::is_same_v<T, evo::IdentityMixture>) return "identity_mixture";
            if constexpr (std::is_same_v<T, evo::ProjectorMixture>) return "projector_mixture";
            if constexpr (std::is_same_v<T, evo::ChannelMemory>) return "channel_memory";
            if constexpr (std::is_same_v<T, evo::PureDecoherence>) return "pure_decoherence";
            if constexpr (std::is_same_v<T, evo::Volterra>) return "volterra";
        },
        e);
}

int evolution_dim(const Evolution& e)
{
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, evo::ConvexMixture>) return v.generators.front().dim();
            if constexpr (std::is_same_v<T, evo::ChannelMemory>) return v.channel.dim();
            if constexpr (std::is_same_v<T, evo::PureDecoherence>) return v.model.sys_dim();
            if constexpr (std::is_same_v<T, evo::Volterra>) return v.kernel.dim();
            if constexpr (std::is_same_v<T, evo::Semigroup> || std::is_same_v<T, evo::IdentityMixture> ||
                          std::is_same_v<T, evo::ProjectorMixture>) {
                return v.generator.dim();
            }
        },
        e);
}

ParseResult parse_scenario(const json& doc, const RunOptions& opts)
{
    ParseResult result;
    Parser p(opts);
    if (!doc.is_object()) {
        result.errors.push_back({"", "scenario must be a JSON object"});
        return result;
    }
    if (const auto version = p.integer(doc, "schema_version", "", 0)) {
        if (*version != kScenarioSchemaVersion) {
            p.fail(".schema_version", "unsupported schema version " + std::to_string(*version));
        }
    }
    const auto name = p.string(doc, "name", "");
    if (name && (name->empty() || name->find_first_of("/\\") != std::string::npos)) {
        p.fail(".name", "name must be nonempty and contain no path separators");
    }

    std::optional<Evolution> evolution;
    if (const json* e = p.field(doc, "evolution", "")) evolution = p.evolution(*e, ".evolution");
    std::optional<DensityMatrix> initial;
    if (const json* s = p.field(doc, "initial_state", "")) initial = p.state(*s, ".initial_state");
    std::optional<Grid> grid;
    if (const json* g = p.field(doc, "grid", "")) grid = p.grid(*g, ".grid");
    std::vector<Analysis> analyses;
    if (const json* a = p.field(doc, "analyses", "")) analyses = p.analyses(*a, ".analyses");
    std::vector<Expectation> expectations;
    if (const json* x = p.field(doc, "expectations", "", false)) expectations = p.expectations(*x, ".expectations");

    if (evolution && initial && evolution_dim(*evolution) != initial->dim()) {
        p.fail(".initial_state", "state dimension " + std::to_string(initial->dim()) +
                                     " differs from evolution dimension " + std::to_string(evolution_dim(*evolution)));
    }
    if (initial) {
        for (const auto& a : analyses) {
            if (a.type == "entanglement" && initial->factor_dims().size() != 2) {
                p.fail(".initial_state.factor_dims", "entanglement analysis needs a bipartite initial state");
            }
        }
    }

    result.errors = std::move(p.errors);
    if (!result.errors.empty() || !evolution || !initial || !grid || !name) return result;
    result.scenario = Scenario{*name, std::move(*evolution), std::move(*initial), *grid,
                               std::move(analyses), std::move(expectations), doc};
    return result;
}

ParseResult parse_scenario_text(const std::string& text, const RunOptions& opts)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        ParseResult r;
        r.errors.push_back({"", std::string("malformed JSON: ") + e.what()});
        return r;
    }
    return parse_scenario(doc, opts);
}

// ================================================================ closed forms and limits

std::optional<PropagatorFn> closed_form_propagator(const Evolution& e)
{
    return std::visit(
        [](const auto& v) -> std::optional<PropagatorFn> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, evo::Semigroup>) {
                return PropagatorFn([l = v.generator](double t) { return semigroup_propagator(l, t); });
            } else if constexpr (std::is_same_v<T, evo::ConvexMixture>) {
                return PropagatorFn([v](double t) { return convex_mixture_propagator(v.weights, v.generators, t); });
            } else if constexpr (std::is_same_v<T, evo::IdentityMixture>) {
                return PropagatorFn([v](double t) { return identity_mixture_propagator(v.generator, v.p, t); });
            } else if constexpr (std::is_same_v<T, evo::ProjectorMixture>) {
                return PropagatorFn(
                    [v](double t) { return projector_mixture_propagator(v.generator, v.p, v.gamma, v.projector, t); });
            } else if constexpr (std::is_same_v<T, evo::ChannelMemory>) {
                return PropagatorFn([v](double t) { return channel_memory_propagator(v.memory, v.channel, t); });
            } else if constexpr (std::is_same_v<T, evo::PureDecoherence>) {
                return PropagatorFn(
                    [m = v.model](double t) { return pure_decoherence_superop(pure_decoherence_coeffs(m, t)); });
            } else {
                return v.reference;
            }
        },
        e);
}

std::optional<Superoperator> asymptotic_map(const Evolution& e)
{
    return std::visit(
        [](const auto& v) -> std::optional<Superoperator> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, evo::Semigroup>) {
                return semigroup_limit(v.generator);
            } else if constexpr (std::is_same_v<T, evo::ConvexMixture>) {
                Superoperator out = Superoperator::zero(v.generators.front().dim());
                for (std::size_t k = 0; k < v.weights.size(); ++k) {
                    out = out + v.weights[k] * semigroup_limit(v.generators[k]);
                }
                return out;
            } else if constexpr (std::is_same_v<T, evo::IdentityMixture>) {
                return asymptotic_identity_mixture(v.generator, v.p);
            } else if constexpr (std::is_same_v<T, evo::ProjectorMixture>) {
                return asymptotic_projector_mixture(v.generator, v.p, v.gamma, v.projector);
            } else if constexpr (std::is_same_v<T, evo::ChannelMemory>) {
                return asymptotic_channel_memory(v.memory.laplace0(), v.channel);
            } else if constexpr (std::is_same_v<T, evo::PureDecoherence>) {
                // A finite reservoir gives quasi-periodic c_mn(t): no limit.
                return std::nullopt;
            } else {
                return v.asymptote;
            }
        },
        e);
}

// ================================================================ running

bool RunResult::passed() const
{
    if (!violations.empty()) return false;
    return std::all_of(expectations.begin(), expectations.end(), [](const auto& e) { return e.passed; });
}

namespace {

std::optional<std::pair<std::vector<double>, std::vector<Superoperator>>> phi_family(const Evolution& e)
{
    using Family = std::pair<std::vector<double>, std::vector<Superoperator>>;
    return std::visit(
        [](const auto& v) -> std::optional<Family> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, evo::Semigroup>) {
                return Family{{1.0}, {v.generator}};
            } else if constexpr (std::is_same_v<T, evo::ConvexMixture>) {
                return Family{v.weights, v.generators};
            } else if constexpr (std::is_same_v<T, evo::IdentityMixture>) {
                return Family{{1.0 - v.p, v.p}, {v.generator, Superoperator::zero(v.generator.dim())}};
            } else if constexpr (std::is_same_v<T, evo::ProjectorMixture>) {
                return Family{{1.0 - v.p, v.p}, {v.generator, projector_complement_generator(v.gamma, v.projector)}};
            } else {
                return std::nullopt;
            }
        },
        e);
}

class Runner {
public:
    Runner(const Scenario& sc, std::filesystem::path out, const RunOptions& opts)
        : sc_(sc), out_(std::move(out)), opts_(opts)
    {
    }

    RunResult run()
    {
        std::filesystem::create_directories(out_);
        for (const auto& a : sc_.analyses) {
            try {
                dispatch(a);
            } catch (const NumericalError& e) {
                std::ostringstream os;
                os << a.type << ": " << e.what();
                if (e.step() >= 0) os << " (step " << e.step() << ")";
                result_.violations.push_back(os.str());
            } catch (const std::exception& e) {
                result_.violations.push_back(a.type + ": " + e.what());
            }
        }
        evaluate_expectations();
        write_summary();
        return std::move(result_);
    }

private:
    const Scenario& sc_;
    std::filesystem::path out_;
    RunOptions opts_;
    RunResult result_;
    std::optional<Trajectory> traj_;

    bool bipartite() const { return sc_.initial_state.factor_dims().size() == 2; }

    std::filesystem::path artifact(const std::string& suffix)
    {
        auto p = out_ / (sc_.name + "." + suffix);
        result_.files.push_back(p);
        return p;
    }

    void metric(const std::string& key, double v) { result_.metrics[key] = v; }

    std::vector<double> grid_times() const
    {
        const auto steps = static_cast<long>(std::llround(sc_.grid.t_end / sc_.grid.dt));
        std::vector<double> t;
        for (long n = 0; n <= steps; ++n) t.push_back(static_cast<double>(n) * sc_.grid.dt);
        return t;
    }

    std::vector<double> output_times() const
    {
        const auto all = grid_times();
        std::vector<double> t;
        for (std::size_t k = 0; k < all.size(); k += sc_.grid.output_every) t.push_back(all[k]);
        if (t.back() != all.back()) t.push_back(all.back());
        return t;
    }

    const Trajectory& trajectory()
    {
        if (!traj_) {
            if (const auto* v = std::get_if<evo::Volterra>(&sc_.evolution)) {
                traj_ = volterra_solve(v->kernel, sc_.initial_state, sc_.grid.t_end, sc_.grid.dt,
                                       VolterraOptions{bipartite(), false});
            } else {
                const auto lambda = closed_form_propagator(sc_.evolution);
                traj_ = propagate(*lambda, sc_.initial_state, grid_times(), bipartite());
            }
        }
        return *traj_;
    }

    void dispatch(const Analysis& a)
    {
        if (a.type == "trajectory") return run_trajectory();
        if (a.type == "asymptote") return run_asymptote();
        if (a.type == "entanglement") return run_entanglement();
        if (a.type == "invariance_defect") return run_invariance(a.options);
        if (a.type == "kernel_check") return run_kernel_check(a.options);
        if (a.type == "laplace_generator") return run_laplace_generator(a.options);
    }

    void run_trajectory()
    {
        const Trajectory& traj = trajectory();
        {
            std::ofstream f(artifact("trajectory.csv"), std::ios::binary);
            io::write_trajectory_csv(f, traj, sc_.grid.output_every);
        }
        metric("trajectory.max_trace_error", traj.max_trace_error());
        metric("trajectory.min_eigenvalue", traj.min_eigenvalue());
        if (traj.diagnostics.back().negativity) metric("trajectory.final_negativity", *traj.diagnostics.back().negativity);

        const double tol = 1e-10 * opts_.tol_scale;
        if (std::holds_alternative<evo::Volterra>(sc_.evolution)) {
            if (traj.max_trace_error() > 1e-9 * opts_.tol_scale) {
                result_.violations.push_back("trajectory: trace error exceeds 1e-9");
            }
            return;
        }
        // CPTP at 20 sample times across the grid.
        const auto lambda = closed_form_propagator(sc_.evolution);
        double min_choi = 1.0;
        double max_tp = 0.0;
        for (int k = 0; k < 20; ++k) {
            const CPTPReport r = is_cptp((*lambda)(sc_.grid.t_end * k / 19.0), tol);
            min_choi = std::min(min_choi, r.min_choi_eigenvalue);
            max_tp = std::max(max_tp, r.trace_preservation_error);
        }
        metric("cptp.min_choi_eigenvalue", min_choi);
        metric("cptp.max_tp_error", max_tp);
        if (min_choi < -tol || max_tp > tol) result_.violations.push_back("trajectory: propagator failed the CPTP check");
    }

    void run_asymptote()
    {
        const auto map = asymptotic_map(sc_.evolution);
        if (!map) throw std::invalid_argument("no asymptotic limit is available for " + evolution_type(sc_.evolution));
        const Matrix state = apply_superop(*map, sc_.initial_state);
        json out{{"state", io::matrix_to_json(state)},
                 {"trace", state.trace().real()},
                 {"min_eig", min_hermitian_eigenvalue(state)},
                 {"trace_distance_from_initial", trace_distance(state, sc_.initial_state.matrix())}};
        metric("asymptote.trace_distance_from_initial", out["trace_distance_from_initial"].get<double>());
        metric("asymptote.min_eigenvalue", out["min_eig"].get<double>());
        if (bipartite()) {
            const auto rep = entanglement_report(state, sc_.initial_state.factor_dims());
            out["negativity"] = rep.negativity;
            out["verdict"] = to_string(rep.verdict);
            metric("asymptote.negativity", rep.negativity);
            if (sc_.initial_state.factor_dims() == std::vector<int>{2, 2}) {
                // Bell-basis view: populations, largest coherence, and whether
                // the "one population above 1/2" rule agrees with PPT.
                const BellBasis b = bell_basis();
                std::array<double, 4> probs{};
                double offdiag = 0.0;
                for (std::size_t a = 0; a < 4; ++a) {
                    for (std::size_t c = 0; c < 4; ++c) {
                        const cplx v = b.states[a].dot(state * b.states[c]);
                        if (a == c) {
                            probs[a] = v.real();
                        } else {
                            offdiag = std::max(offdiag, std::abs(v));
                        }
                    }
                }
                out["bell_populations"] = probs;
                metric("asymptote.bell_max_coherence", offdiag);
                if (offdiag <= 1e-8) {
                    const bool rule = bell_diagonal_entangled(probs);
                    metric("asymptote.bell_rule_agrees", rule == (rep.verdict == Verdict::entangled) ? 1.0 : 0.0);
                }
            }
        }
        if (const auto lambda = closed_form_propagator(sc_.evolution)) {
            const double dev = final_value_check(*lambda, sc_.grid.t_end, *map);
            out["final_value_deviation"] = dev;
            metric("asymptote.final_value_deviation", dev);
        }
        if (std::holds_alternative<evo::Volterra>(sc_.evolution)) {
            const double dev = trace_norm(trajectory().states.back() - state);
            out["integration_deviation"] = dev;
            metric("asymptote.integration_deviation", dev);
        }
        std::ofstream(artifact("asymptote.json"), std::ios::binary) << out.dump(2) << "\n";
    }

    void run_entanglement()
    {
        const Trajectory& traj = trajectory();
        const auto& dims = sc_.initial_state.factor_dims();
        std::ofstream f(artifact("entanglement.csv"), std::ios::binary);
        io::CsvWriter csv(f, {"t", "negativity", "verdict"});
        const std::size_t stride = sc_.grid.output_every;
        double last = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            if (k % stride != 0 && k + 1 != traj.size()) continue;
            const auto rep = entanglement_report(traj.states[k], dims);
            csv.row({io::format_double(traj.times[k]), io::format_double(rep.negativity), to_string(rep.verdict)});
            last = rep.negativity;
        }
        metric("entanglement.initial_negativity", negativity(sc_.initial_state));
        metric("entanglement.final_negativity", last);
        if (const auto map = asymptotic_map(sc_.evolution)) {
            const auto rep = entanglement_report(apply_superop(*map, sc_.initial_state), dims);
            csv.row({"inf", io::format_double(rep.negativity), to_string(rep.verdict)});
            metric("entanglement.asymptotic_negativity", rep.negativity);
        }
    }

    void run_invariance(const json& options)
    {
        const auto lambda = closed_form_propagator(sc_.evolution);
        if (!lambda) throw std::invalid_argument("invariance defect needs a closed-form propagator");
        std::optional<DensityMatrix> omega;
        if (options.contains("omega")) {
            Parser p(RunOptions{opts_.seed, opts_.tol_scale});
            omega = p.state(options["omega"], ".omega");
            if (!omega) throw std::invalid_argument("invalid omega: " + p.errors.front().message);
        } else {
            const auto map = asymptotic_map(sc_.evolution);
            if (!map) throw std::invalid_argument("invariance defect needs omega or an asymptotic limit");
            omega = DensityMatrix(apply_superop(*map, sc_.initial_state), sc_.initial_state.factor_dims(),
                                  Tolerances{1e-9, 1e-9, 1e-9});
        }
        std::vector<double> times;
        if (options.contains("times") && options["times"].is_array()) {
            for (const auto& t : options["times"]) times.push_back(t.get<double>());
        } else {
            times = output_times();
        }
        const auto defect = invariance_defect(*lambda, *omega, times);
        std::ofstream f(artifact("invariance_defect.csv"), std::ios::binary);
        io::CsvWriter csv(f, {"t", "defect"});
        for (std::size_t k = 0; k < times.size(); ++k) csv.row({io::format_double(times[k]), io::format_double(defect[k])});
        metric("invariance_defect.max", *std::max_element(defect.begin(), defect.end()));
        metric("invariance_defect.final", defect.back());
    }

    void run_kernel_check(const json& options)
    {
        const auto* v = std::get_if<evo::Volterra>(&sc_.evolution);
        if (!v) throw std::invalid_argument("kernel_check needs a volterra evolution");
        if (!v->reference) throw std::invalid_argument("kernel \"" + v->kernel_type + "\" has no closed-form reference");
        const Trajectory& traj = trajectory();
        const Trajectory ref = propagate(*v->reference, sc_.initial_state, traj.times);
        std::ofstream f(artifact("kernel_check.csv"), std::ios::binary);
        io::CsvWriter csv(f, {"t", "deviation"});
        double worst = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double dev = trace_norm(traj.states[k] - ref.states[k]);
            worst = std::max(worst, dev);
            if (k % sc_.grid.output_every == 0 || k + 1 == traj.size()) {
                csv.row({io::format_double(traj.times[k]), io::format_double(dev)});
            }
        }
        metric("kernel_check.max_deviation", worst);
        if (options.value("convergence", false)) {
            const Trajectory fine = volterra_solve(v->kernel, sc_.initial_state, sc_.grid.t_end, 0.5 * sc_.grid.dt);
            double fine_worst = 0.0;
            for (std::size_t k = 0; k < fine.size(); ++k) {
                fine_worst = std::max(fine_worst, trace_norm(fine.states[k] - (*v->reference)(fine.times[k]).apply(
                                                                                  sc_.initial_state.matrix())));
            }
            metric("kernel_check.max_deviation_half_step", fine_worst);
            metric("kernel_check.convergence_ratio", worst / fine_worst);
        }
    }

    void run_laplace_generator(const json& options)
    {
        const auto family = phi_family(sc_.evolution);
        if (!family) throw std::invalid_argument("laplace_generator needs a mixture of semigroups");
        std::vector<double> s_values{0.5, 1.0, 2.0};
        if (options.contains("s")) s_values = options["s"].get<std::vector<double>>();
        const auto& [weights, gens] = *family;
        auto phi = [&](double t) { return convex_mixture_phi(weights, gens, t); };
        LaplaceOptions lopts;
        lopts.tol = 1e-12;

        json out{{"s", s_values}, {"generators", json::array()}};
        std::vector<Superoperator> lts;
        for (double s : s_values) {
            const Superoperator phi_s = numerical_laplace_superop(phi, s, lopts);
            lts.push_back(generator_laplace_from_phi(phi_s, s));
            out["generators"].push_back(io::matrix_to_json(lts.back().matrix()));
        }
        double spread = 0.0;
        for (const auto& l : lts) spread = std::max(spread, max_abs(l.matrix() - lts.front().matrix()));
        out["spread"] = spread;
        metric("laplace_generator.spread", spread);
        if (const auto* im = std::get_if<evo::IdentityMixture>(&sc_.evolution)) {
            double dev = 0.0;
            for (std::size_t k = 0; k < s_values.size(); ++k) {
                const auto closed = identity_mixture_generator_laplace(im->generator, im->p, s_values[k]);
                dev = std::max(dev, max_abs(closed.matrix() - lts[k].matrix()));
            }
            out["closed_form_deviation"] = dev;
            metric("laplace_generator.closed_form_deviation", dev);
        }
        std::ofstream(artifact("laplace_generator.json"), std::ios::binary) << out.dump(2) << "\n";
    }

    void evaluate_expectations()
    {
        for (const auto& e : sc_.expectations) {
            ExpectationResult r{e, std::nullopt, false};
            const auto it = result_.metrics.find(e.metric);
            if (it != result_.metrics.end()) {
                const double obs = it->second;
                const double tol = e.tol * opts_.tol_scale;
                r.observed = obs;
                if (e.op == "eq") r.passed = std::abs(obs - e.value) <= tol;
                if (e.op == "le") r.passed = obs <= e.value + tol;
                if (e.op == "ge") r.passed = obs >= e.value - tol;
            }
            result_.expectations.push_back(r);
        }
    }

    void write_summary()
    {
        json metrics = json::object();
        for (const auto& [k, v] : result_.metrics) metrics[k] = v;
        json exps = json::array();
        for (const auto& r : result_.expectations) {
            exps.push_back({{"name", r.expectation.name},
                            {"metric", r.expectation.metric},
                            {"op", r.expectation.op},
                            {"value", r.expectation.value},
                            {"tol", r.expectation.tol * opts_.tol_scale},
                            {"observed", r.observed ? json(*r.observed) : json(nullptr)},
                            {"passed", r.passed}});
        }
        const json summary{{"name", sc_.name},
                           {"evolution", evolution_type(sc_.evolution)},
                           {"seed", opts_.seed},
                           {"metrics", metrics},
                           {"expectations", exps},
                           {"violations", result_.violations},
                           {"passed", result_.passed()}};
        std::ofstream(artifact("summary.json"), std::ios::binary) << summary.dump(2) << "\n";
    }
};

struct ParamLocation {
    std::string name;
    json::json_pointer pointer;
};

std::vector<ParamLocation> param_locations(const Scenario& sc)
{
    using ptr = json::json_pointer;
    const std::string type = evolution_type(sc.evolution);
    if (type == "identity_mixture") return {{"p", ptr("/evolution/p")}};
    if (type == "projector_mixture") return {{"p", ptr("/evolution/p")}, {"gamma", ptr("/evolution/gamma")}};
    if (type == "channel_memory") {
        return {{"eps", ptr("/evolution/memory/eps")}, {"gamma", ptr("/evolution/memory/gamma")}};
    }
    if (type == "volterra") {
        const auto& v = std::get<evo::Volterra>(sc.evolution);
        if (v.kernel_type == "identity_mixture") return {{"p", ptr("/evolution/kernel/p")}};
        if (v.kernel_type == "channel_memory") {
            return {{"eps", ptr("/evolution/kernel/eps")}, {"gamma", ptr("/evolution/kernel/gamma")}};
        }
    }
    return {};
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir, const RunOptions& opts)
{
    return Runner(scenario, out_dir, opts).run();
}

std::vector<std::string> sweepable_params(const Scenario& scenario)
{
    std::vector<std::string> out;
    for (const auto& loc : param_locations(scenario)) out.push_back(loc.name);
    return out;
}

std::vector<SweepRow> sweep_scenario(const Scenario& scenario, const std::string& param,
                                     const std::vector<double>& values, const RunOptions& opts)
{
    const auto locs = param_locations(scenario);
    const auto it = std::find_if(locs.begin(), locs.end(), [&](const auto& l) { return l.name == param; });
    if (it == locs.end()) {
        std::string known;
        for (const auto& l : locs) known += (known.empty() ? "" : ", ") + l.name;
        throw std::invalid_argument("unknown sweep parameter \"" + param + "\" (sweepable: " +
                                    (known.empty() ? std::string("none") : known) + ")");
    }
    if (scenario.initial_state.factor_dims().size() != 2) {
        throw std::invalid_argument("sweep needs a bipartite initial state");
    }
    const json::json_pointer pointer = it->pointer;

    std::vector<std::future<SweepRow>> jobs;
    for (double value : values) {
        jobs.push_back(std::async(std::launch::async, [&scenario, &opts, pointer, value]() {
            json doc = scenario.source;
            doc[pointer] = value;
            const ParseResult parsed = parse_scenario(doc, opts);
            if (!parsed.ok()) {
                const auto& e = parsed.errors.front();
                throw std::invalid_argument("value " + io::format_double(value) + ": " + e.path + ": " + e.message);
            }
            const auto map = asymptotic_map(parsed.scenario->evolution);
            if (!map) throw std::invalid_argument("no asymptotic limit for this evolution");
            const Matrix state = apply_superop(*map, parsed.scenario->initial_state);
            const auto rep = entanglement_report(state, parsed.scenario->initial_state.factor_dims());
            return SweepRow{value, rep.negativity, rep.verdict};
        }));
    }
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

}  // namespace memdyn
