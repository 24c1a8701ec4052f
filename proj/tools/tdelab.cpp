// tdelab — run delay-estimation control scenarios and claim suites.
//
// Exit codes: 0 success, 1 bound-check failure, 2 divergence, 3 config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tdelab/catalog.hpp"
#include "tdelab/claims.hpp"
#include "tdelab/config.hpp"
#include "tdelab/runner.hpp"

namespace fs = std::filesystem;
using namespace tdelab;

namespace {

enum ExitCode : int { kOk = 0, kBoundFailure = 1, kDivergence = 2, kConfigError = 3 };

struct RunOptions {
    std::string scenario;
    std::string out_dir = "out";
    bool dry_run = false;
    std::optional<double> dt, rho, horizon;
};

/// A path to a scenario file, or the name of a built-in scenario.
Scenario resolve_scenario(const std::string& ref) {
    if (fs::exists(ref)) return load_scenario(ref);
    for (const auto& name : builtin_scenario_names()) {
        if (name == ref) return builtin_scenario(ref);
    }
    throw ConfigError(ref, "no such scenario file or built-in scenario");
}

void apply_overrides(Scenario& scenario, const RunOptions& opt) {
    std::visit(
        [&](auto& sc) {
            if (opt.dt) sc.dt = *opt.dt;
            if (opt.rho) sc.rho = *opt.rho;
            if (opt.horizon) sc.horizon = *opt.horizon;
            validate(sc);
        },
        scenario);
}

int cmd_run(const RunOptions& opt) {
    Scenario scenario = resolve_scenario(opt.scenario);
    apply_overrides(scenario, opt);
    const std::string id = scenario_id(scenario);
    if (opt.dry_run) {
        std::cout << scenario_to_json(scenario).dump(2) << "\n";
        std::cerr << id << ": configuration valid (dry run, nothing simulated)\n";
        return kOk;
    }

    const RunOutcome outcome = run_scenario(scenario);
    fs::create_directories(opt.out_dir);
    const std::string csv_path = (fs::path(opt.out_dir) / (id + ".csv")).string();
    const std::string report_path = (fs::path(opt.out_dir) / (id + ".report.json")).string();
    write_trajectory_csv(outcome, csv_path);
    {
        std::ofstream out(report_path);
        if (!out) throw Error("cannot write " + report_path);
        out << report_json(outcome.report, outcome.config).dump(2) << "\n";
    }

    const RunReport& r = outcome.report;
    std::cout << id << ": " << (r.diverged ? "DIVERGED" : r.satisfied ? "PASS" : "FAIL") << " (" << r.check << ")";
    if (r.bound) {
        std::cout << " observed " << r.bound->observed_steady_max << " vs bound " << r.bound->theoretical_bound;
    }
    std::cout << "\n  trajectory: " << csv_path << "\n  report:     " << report_path << "\n";
    if (r.diverged) {
        std::cerr << id << ": " << r.diagnostic << "\n";
        return kDivergence;
    }
    return r.satisfied ? kOk : kBoundFailure;
}

int cmd_suite(const std::string& name, bool list, unsigned jobs, const std::string& out_dir) {
    if (list) {
        for (const Suite& s : suites()) {
            std::cout << s.name << " (" << s.items.size() << " items): " << s.description << "\n";
        }
        return kOk;
    }
    if (name.empty()) throw ConfigError("suite", "missing suite name (use --list to see available suites)");
    const Suite suite = find_suite(name);
    const std::vector<SuiteRow> rows = run_suite(suite, jobs);

    std::size_t width = 4;
    for (const auto& row : rows) width = std::max(width, row.id.size());
    int failed = 0;
    for (const auto& row : rows) {
        std::printf("%-*s  %s  %6.2fs  %s\n", static_cast<int>(width), row.id.c_str(), row.pass ? "PASS" : "FAIL",
                    row.seconds, row.detail.c_str());
        failed += row.pass ? 0 : 1;
    }
    std::printf("%s: %zu/%zu passed\n", suite.name.c_str(), rows.size() - static_cast<std::size_t>(failed), rows.size());

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        json j{{"tool", "tdelab"}, {"version", kToolVersion}, {"suite", suite.name}, {"rows", json::array()}};
        for (const auto& row : rows) {
            j["rows"].push_back({{"id", row.id}, {"title", row.title}, {"pass", row.pass}, {"detail", row.detail},
                                 {"seconds", row.seconds}});
        }
        std::ofstream(fs::path(out_dir) / (suite.name + ".suite.json")) << j.dump(2) << "\n";
    }
    return failed == 0 ? kOk : kBoundFailure;
}

int cmd_list() {
    for (const auto& e : catalog::entries()) std::printf("%-36s %s\n", e.name, e.description);
    return kOk;
}

int cmd_export(const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& e : catalog::entries()) {
        const fs::path path = fs::path(dir) / (std::string(e.name) + ".json");
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        out << scenario_to_json(e.make()).dump(2) << "\n";
        std::cout << path.string() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tdelab: time-delay estimation control experiments"};
    app.set_version_flag("--version", std::string("tdelab ") + kToolVersion);
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Simulate one scenario, write trajectory CSV and report JSON");
    run->add_option("scenario", run_opt.scenario, "Scenario JSON file or built-in scenario name")->required();
    run->add_option("-o,--out", run_opt.out_dir, "Output directory")->capture_default_str();
    run->add_flag("--dry-run", run_opt.dry_run, "Validate and print the resolved configuration only");
    run->add_option("--dt", run_opt.dt, "Override integration step [s]");
    run->add_option("--rho", run_opt.rho, "Override estimation delay [s]");
    run->add_option("--horizon", run_opt.horizon, "Override simulated horizon [s]");

    std::string suite_name, suite_out;
    bool suite_list = false;
    unsigned jobs = 0;
    auto* suite = app.add_subcommand("suite", "Run a named suite and print a verdict table");
    suite->add_option("name", suite_name, "Suite name (paper-claims, numerics, demos)");
    suite->add_flag("--list", suite_list, "List available suites");
    suite->add_option("-j,--jobs", jobs, "Parallel workers (0 = hardware concurrency)");
    suite->add_option("-o,--out", suite_out, "Also write <suite>.suite.json into this directory");

    auto* list = app.add_subcommand("list-scenarios", "List built-in scenarios");

    std::string export_dir;
    auto* exp = app.add_subcommand("export-scenarios", "Write every built-in scenario as JSON into a directory");
    exp->add_option("dir", export_dir, "Destination directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(run_opt);
        if (*suite) return cmd_suite(suite_name, suite_list, jobs, suite_out);
        if (*list) return cmd_list();
        if (*exp) return cmd_export(export_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
