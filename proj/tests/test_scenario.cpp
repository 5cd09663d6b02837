#include <doctest.h>

#include <fstream>
#include <sstream>

#include "memdyn/scenario.hpp"

using namespace memdyn;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = MEMDYN_SCENARIO_DIR;

json load(const std::string& name)
{
    std::ifstream in(kScenarios / (name + ".json"));
    return json::parse(in);
}

std::filesystem::path scratch(const std::string& tag)
{
    auto p = std::filesystem::temp_directory_path() / ("memdyn_test_" + tag);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool has_error(const ParseResult& r, const std::string& path)
{
    return std::any_of(r.errors.begin(), r.errors.end(), [&](const auto& e) { return e.path == path; });
}

}  // namespace

TEST_SUITE("scenario")
{
    TEST_CASE("bundled werner scenario parses")
    {
        const ParseResult r = parse_scenario(load("werner_asymptote"));
        REQUIRE(r.ok());
        CHECK(evolution_type(r.scenario->evolution) == "identity_mixture");
        CHECK(evolution_dim(r.scenario->evolution) == 4);
        CHECK(std::get<evo::IdentityMixture>(r.scenario->evolution).p == 0.4);
        CHECK(r.scenario->initial_state.factor_dims() == std::vector<int>{2, 2});
        CHECK(sweepable_params(*r.scenario) == std::vector<std::string>{"p"});
    }

    TEST_CASE("every error is reported with its path")
    {
        json doc = load("werner_asymptote");
        doc["evolution"]["p"] = 1.5;
        doc["grid"]["dt"] = 0.3;
        doc["initial_state"]["which"] = "chi";
        doc["analyses"].push_back("plot");
        const ParseResult r = parse_scenario(doc);
        CHECK_FALSE(r.ok());
        CHECK(has_error(r, ".evolution.p"));
        CHECK(has_error(r, ".grid.dt"));
        CHECK(has_error(r, ".initial_state.which"));
        CHECK(has_error(r, ".analyses[4]"));
        CHECK(r.errors.size() == 4);
    }

    TEST_CASE("structural errors")
    {
        CHECK(has_error(parse_scenario_text("{\"schema_version\": 2}"), ".schema_version"));
        CHECK(has_error(parse_scenario_text("{}"), ".evolution"));
        CHECK(has_error(parse_scenario_text("{}"), ".name"));
        const ParseResult bad = parse_scenario_text("{ not json");
        CHECK_FALSE(bad.ok());
        CHECK(bad.errors.front().message.find("malformed JSON") != std::string::npos);

        json doc = load("werner_asymptote");
        doc["initial_state"] = {{"type", "basis"}, {"dim", 2}, {"index", 0}};
        CHECK(has_error(parse_scenario(doc), ".initial_state"));

        json mem = load("block_projection_sweep");
        mem["evolution"]["channel"] = {{"type", "amplitude_damping"}, {"g", 0.5}};
        CHECK(has_error(parse_scenario(mem), ".evolution.channel"));
        mem["evolution"]["memory"]["eps"] = -1;
        CHECK(has_error(parse_scenario(mem), ".evolution.memory.eps"));
    }

    TEST_CASE("empty analyses run nothing")
    {
        json doc = load("werner_asymptote");
        doc["analyses"] = json::array();
        doc["expectations"] = json::array();
        const ParseResult r = parse_scenario(doc);
        REQUIRE(r.ok());
        const auto dir = scratch("empty");
        const RunResult res = run_scenario(*r.scenario, dir);
        CHECK(res.passed());
        CHECK(res.metrics.empty());
        CHECK(res.files.size() == 1);  // summary only
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("failed expectation and tolerance scaling")
    {
        json doc = load("werner_asymptote");
        doc["analyses"] = json::array({"asymptote"});
        doc["expectations"] = json::array(
            {{{"name", "off"}, {"metric", "asymptote.negativity"}, {"op", "eq"}, {"value", 0.06}, {"tol", 1e-3}},
             {{"name", "absent"}, {"metric", "no.such.metric"}, {"op", "le"}, {"value", 1.0}}});
        const ParseResult r = parse_scenario(doc);
        REQUIRE(r.ok());
        const auto dir = scratch("fail");
        RunResult res = run_scenario(*r.scenario, dir);
        CHECK_FALSE(res.passed());
        CHECK_FALSE(res.expectations[0].passed);
        CHECK_FALSE(res.expectations[1].observed.has_value());
        res = run_scenario(*r.scenario, dir, RunOptions{7, 100.0});
        CHECK(res.expectations[0].passed);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("analysis failures become violations")
    {
        json doc = load("pure_decoherence");
        doc["analyses"] = json::array({"asymptote"});
        doc["expectations"] = json::array();
        const ParseResult r = parse_scenario(doc);
        REQUIRE(r.ok());
        const auto dir = scratch("violation");
        const RunResult res = run_scenario(*r.scenario, dir);
        REQUIRE(res.violations.size() == 1);
        CHECK(res.violations[0].find("asymptote") == 0);
        CHECK_FALSE(res.passed());
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("runs are byte-identical for a fixed seed")
    {
        const ParseResult r = parse_scenario(load("bell_diagonal_asymptote"), RunOptions{11, 1.0});
        REQUIRE(r.ok());
        const auto a = scratch("det_a");
        const auto b = scratch("det_b");
        const RunResult ra = run_scenario(*r.scenario, a, RunOptions{11, 1.0});
        const ParseResult r2 = parse_scenario(load("bell_diagonal_asymptote"), RunOptions{11, 1.0});
        const RunResult rb = run_scenario(*r2.scenario, b, RunOptions{11, 1.0});
        REQUIRE(ra.files.size() == rb.files.size());
        for (std::size_t k = 0; k < ra.files.size(); ++k) {
            CHECK(ra.files[k].filename() == rb.files[k].filename());
            CHECK(slurp(ra.files[k]) == slurp(rb.files[k]));
        }
        // A different seed draws a different state.
        const ParseResult r3 = parse_scenario(load("bell_diagonal_asymptote"), RunOptions{12, 1.0});
        CHECK(max_abs(r3.scenario->initial_state.matrix() - r.scenario->initial_state.matrix()) > 1e-3);
        std::filesystem::remove_all(a);
        std::filesystem::remove_all(b);
    }

    TEST_CASE("sweeps")
    {
        const ParseResult w = parse_scenario(load("werner_asymptote"));
        REQUIRE(w.ok());
        std::vector<double> grid;
        for (int k = 1; k <= 9; ++k) grid.push_back(0.1 * k);
        const auto rows = sweep_scenario(*w.scenario, "p", grid);
        for (const auto& row : rows) {
            CHECK((row.verdict == Verdict::entangled) == (row.param > 1.0 / 3.0));
        }
        CHECK_THROWS_AS(sweep_scenario(*w.scenario, "eps", grid), std::invalid_argument);
        CHECK_THROWS_AS(sweep_scenario(*w.scenario, "p", std::vector<double>{2.0}), std::invalid_argument);

        // A single-value sweep reproduces the run.
        const auto one = sweep_scenario(*w.scenario, "p", std::vector<double>{0.4});
        const auto dir = scratch("sweep1");
        const RunResult res = run_scenario(*w.scenario, dir);
        CHECK(one[0].negativity == res.metrics.at("asymptote.negativity"));
        std::filesystem::remove_all(dir);

        const ParseResult blk = parse_scenario(load("block_projection_sweep"));
        REQUIRE(blk.ok());
        const auto death = sweep_scenario(*blk.scenario, "eps", std::vector<double>{0.25, 0.5, 1.0});
        CHECK(death[0].negativity > death[1].negativity);
        CHECK(death[1].negativity > death[2].negativity);
        CHECK(death[2].negativity < 1e-12);
    }

    TEST_CASE("every bundled scenario passes its expectations")
    {
        for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
            if (entry.path().extension() != ".json") continue;
            CAPTURE(entry.path().string());
            const ParseResult r = parse_scenario(load(entry.path().stem().string()));
            REQUIRE(r.ok());
            CHECK_FALSE(r.scenario->expectations.empty());
            const auto dir = scratch("bundled");
            const RunResult res = run_scenario(*r.scenario, dir);
            for (const auto& v : res.violations) MESSAGE(v);
            for (const auto& e : res.expectations) {
                CAPTURE(e.expectation.name);
                CHECK(e.passed);
            }
            CHECK(res.passed());
            std::filesystem::remove_all(dir);
        }
    }
}
