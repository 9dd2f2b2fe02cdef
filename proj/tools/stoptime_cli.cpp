#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "stoptime/suite.hpp"

namespace {

int run_command(const std::string& path, std::uint64_t seed, int seeds, double tol_override,
                double horizon, bool horizon_set, const std::string& checks_csv,
                const std::string& report_path) {
    using namespace stoptime;
    LoadedFixture fixture = load_fixture(path);
    if (tol_override > 0.0) {
        FixtureConfig cfg = fixture.config;
        cfg.tol.eq_tol = tol_override;
        cfg.tol.rank_tol = 10.0 * tol_override;
        fixture = build_fixture(cfg);
    }

    SuiteOptions opt;
    opt.seed = seed;
    opt.seeds = seeds;
    if (horizon_set)
        opt.horizon_index = fixture.filtration->grid().index_of(horizon);
    if (!checks_csv.empty()) {
        std::stringstream ss(checks_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) opt.checks.push_back(item);
    }

    const VerificationReport report = run_suite(fixture, opt);
    std::cout << report.summary_table();
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
            std::cerr << "cannot write report to " << report_path << "\n";
            return 2;
        }
        out << report.to_json().dump(2) << "\n";
    }
    return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification harness for quantum stopping times and their time projections"};
    app.require_subcommand(1);

    std::string fixture_path;
    std::string report_path;
    std::string checks_csv;
    std::string check_name;
    std::uint64_t seed = 0;
    int seeds = 200;
    double tol_override = 0.0;
    double horizon = 0.0;

    auto* validate = app.add_subcommand("validate", "Load a fixture and run invariant gates only");
    validate->add_option("fixture", fixture_path, "fixture file")->required();

    auto* run = app.add_subcommand("run", "Run the verification suite against a fixture");
    run->add_option("fixture", fixture_path, "fixture file")->required();
    run->add_option("--seed", seed, "base RNG seed for randomized checks");
    run->add_option("--seeds", seeds, "seeded repetitions for randomized checks");
    run->add_option("--tol", tol_override,
                    "override equality tolerance (rank tolerance becomes 10x this)");
    auto* horizon_opt = run->add_option("--horizon", horizon,
                                        "grid point for the finite-horizon check");
    run->add_option("--checks", checks_csv, "comma-separated subset of checks");
    run->add_option("--report", report_path, "write a JSON report to this path");

    auto* explain = app.add_subcommand("explain", "Describe what a named check verifies");
    explain->add_option("check", check_name, "check name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) {
            stoptime::load_fixture(fixture_path);
            std::cout << "fixture OK\n";
            return 0;
        }
        if (app.got_subcommand(run)) {
            return run_command(fixture_path, seed, seeds, tol_override, horizon,
                               horizon_opt->count() > 0, checks_csv, report_path);
        }
        if (app.got_subcommand(explain)) {
            std::cout << stoptime::explain_check(check_name) << "\n";
            return 0;
        }
    } catch (const stoptime::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const stoptime::Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
