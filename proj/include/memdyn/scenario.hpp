// scenario.hpp: scenario files: parsing, validation, runs and sweeps

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "memdyn/entanglement.hpp"
#include "memdyn/evolutions.hpp"
#include "memdyn/generators.hpp"
#include "memdyn/qcore.hpp"

namespace memdyn {

inline constexpr int kScenarioSchemaVersion = 1;

namespace evo {

struct Semigroup {
    Superoperator generator;
};
struct ConvexMixture {
    std::vector<double> weights;
    std::vector<Superoperator> generators;
};
struct IdentityMixture {
    Superoperator generator;
    double p;
};
struct ProjectorMixture {
    Superoperator generator;
    double p;
    double gamma;
    Superoperator projector;
};
struct ChannelMemory {
    MemoryFn memory;
    Superoperator channel;
};
struct PureDecoherence {
    DecoherenceModel model;
};
/// Integrates a memory kernel; `reference` is the matching closed form when
/// the kernel has one, and `asymptote` its Laplace-domain limit.
struct Volterra {
    std::string kernel_type;
    MemoryKernel kernel;
    std::optional<PropagatorFn> reference;
    std::optional<Superoperator> asymptote;
};

}  // namespace evo

using Evolution = std::variant<evo::Semigroup, evo::ConvexMixture, evo::IdentityMixture, evo::ProjectorMixture,
                               evo::ChannelMemory, evo::PureDecoherence, evo::Volterra>;

std::string evolution_type(const Evolution& e);
int evolution_dim(const Evolution& e);

struct Grid {
    double t_end = 1.0;
    double dt = 0.01;
    std::size_t output_every = 1;
};

struct Analysis {
    std::string type;
    nlohmann::json options;
};

/// A named assertion on a metric produced by the analyses.
struct Expectation {
    std::string name;
    std::string metric;
    std::string op;  // "eq", "le" or "ge"
    double value = 0.0;
    double tol = 0.0;
};

struct Scenario {
    std::string name;
    Evolution evolution;
    DensityMatrix initial_state;
    Grid grid;
    std::vector<Analysis> analyses;
    std::vector<Expectation> expectations;
    nlohmann::json source;
};

struct ValidationError {
    std::string path;
    std::string message;
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<ValidationError> errors;

    bool ok() const noexcept { return scenario.has_value(); }
};

struct RunOptions {
    std::uint64_t seed = 7;
    double tol_scale = 1.0;
};

/// Validates the whole document and reports every error found, each with a
/// JSON path such as ".evolution.p".
ParseResult parse_scenario(const nlohmann::json& doc, const RunOptions& opts = {});
ParseResult parse_scenario_text(const std::string& text, const RunOptions& opts = {});

/// Closed-form propagator, when the evolution has one.
std::optional<PropagatorFn> closed_form_propagator(const Evolution& e);
/// Limit map lim_{t->inf} Lambda_t from Laplace-domain formulas, when defined.
std::optional<Superoperator> asymptotic_map(const Evolution& e);

struct ExpectationResult {
    Expectation expectation;
    std::optional<double> observed;
    bool passed = false;
};

struct RunResult {
    std::map<std::string, double> metrics;
    std::vector<ExpectationResult> expectations;
    std::vector<std::string> violations;
    std::vector<std::filesystem::path> files;

    bool passed() const;
};

/// Runs every analysis, writing one artifact per analysis plus
/// `<name>.summary.json` into out_dir.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir, const RunOptions& opts = {});

/// Scalars that `sweep` may vary for this scenario, e.g. "p" or "eps".
std::vector<std::string> sweepable_params(const Scenario& scenario);

/// Re-parses the scenario with `param` set to each value and reports the
/// asymptotic negativity. Throws std::invalid_argument for unknown names.
std::vector<SweepRow> sweep_scenario(const Scenario& scenario, const std::string& param,
                                     const std::vector<double>& values, const RunOptions& opts = {});

}  // namespace memdyn
