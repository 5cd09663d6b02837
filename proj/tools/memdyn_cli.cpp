// memdyn command-line tool: run, sweep and validate scenario files

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "memdyn/io.hpp"
#include "memdyn/scenario.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::optional<memdyn::Scenario> load(const std::string& path, const memdyn::RunOptions& opts)
{
    const memdyn::ParseResult r = memdyn::parse_scenario_text(read_file(path), opts);
    for (const auto& e : r.errors) {
        std::cerr << path << ": " << (e.path.empty() ? "(root)" : e.path) << ": " << e.message << "\n";
    }
    return r.scenario;
}

// "0.1,0.2,0.3" or "start:stop:count" (inclusive, evenly spaced).
std::vector<double> parse_values(const std::string& spec)
{
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a = 0, b = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(spec);
        if (!(is >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || !is.eof()) {
            throw std::invalid_argument("range must look like start:stop:count");
        }
        for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
        return out;
    }
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad value \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("no sweep values given");
    return out;
}

int cmd_validate(const std::vector<std::string>& files, const memdyn::RunOptions& opts)
{
    int status = 0;
    for (const auto& f : files) {
        if (const auto sc = load(f, opts)) {
            std::cout << f << ": ok (" << sc->name << ", " << memdyn::evolution_type(sc->evolution) << ", "
                      << sc->analyses.size() << " analyses)\n";
        } else {
            status = kExitInvalid;
        }
    }
    return status;
}

int cmd_run(const std::string& file, const std::string& out, const memdyn::RunOptions& opts)
{
    const auto sc = load(file, opts);
    if (!sc) return kExitInvalid;
    const memdyn::RunResult r = memdyn::run_scenario(*sc, out, opts);
    for (const auto& [k, v] : r.metrics) std::cout << k << " = " << memdyn::io::format_double(v) << "\n";
    for (const auto& e : r.expectations) {
        std::cout << (e.passed ? "PASS " : "FAIL ") << e.expectation.name << " (" << e.expectation.metric << " "
                  << e.expectation.op << " " << memdyn::io::format_double(e.expectation.value) << ", observed "
                  << (e.observed ? memdyn::io::format_double(*e.observed) : std::string("missing")) << ")\n";
    }
    for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
    for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
    return r.passed() ? 0 : kExitFail;
}

int cmd_sweep(const std::string& file, const std::string& param, const std::string& values, const std::string& out,
              const memdyn::RunOptions& opts)
{
    const auto sc = load(file, opts);
    if (!sc) return kExitInvalid;
    std::vector<memdyn::SweepRow> rows;
    try {
        rows = memdyn::sweep_scenario(*sc, param, parse_values(values), opts);
    } catch (const std::invalid_argument& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return kExitInvalid;
    }
    std::filesystem::create_directories(out);
    const auto path = std::filesystem::path(out) / (sc->name + ".sweep_" + param + ".csv");
    {
        std::ofstream f(path, std::ios::binary);
        memdyn::io::write_sweep_csv(f, rows);
    }
    memdyn::io::write_sweep_csv(std::cout, rows);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"memdyn: non-Markovian quantum dynamical maps"};
    app.require_subcommand(1);
    app.fallthrough();

    memdyn::RunOptions opts;
    std::string out = "out";
    app.add_option("--seed", opts.seed, "Seed for randomized states and models")->capture_default_str();
    app.add_option("--tol-scale", opts.tol_scale, "Multiplier for expectation and invariant tolerances")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();

    auto* run = app.add_subcommand("run", "Run every analysis of a scenario and check its expectations");
    std::string run_file;
    run->add_option("scenario", run_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "Tabulate asymptotic negativity over a scenario parameter");
    std::string sweep_file, param, values;
    sweep->add_option("scenario", sweep_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", param, "Parameter name, e.g. p or eps")->required();
    sweep->add_option("--values", values, "Comma list or start:stop:count")->required();

    auto* validate = app.add_subcommand("validate", "Check scenario files without running them");
    std::vector<std::string> files;
    validate->add_option("scenarios", files, "Scenario JSON files")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_file, out, opts);
        if (*sweep) return cmd_sweep(sweep_file, param, values, out, opts);
        return cmd_validate(files, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}
