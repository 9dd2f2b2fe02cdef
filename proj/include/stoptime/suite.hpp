#ifndef STOPTIME_SUITE_HPP
#define STOPTIME_SUITE_HPP

#include "stoptime/fixture.hpp"
#include "stoptime/tau_expectation.hpp"

namespace stoptime {

struct SuiteOptions {
    std::vector<std::string> checks;  // empty = all
    int seeds = 200;                  // seeded repetitions for randomized checks
    std::uint64_t seed = 0;           // base RNG seed
    std::optional<std::size_t> horizon_index;  // restrict per-horizon checks
};

struct ReportRow {
    std::string check;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    double wall_ms = 0.0;
};

struct VerificationReport {
    std::string fixture_name;
    std::string fingerprint;
    std::vector<ReportRow> rows;

    bool all_pass() const;
    nlohmann::json to_json() const;
    std::string summary_table() const;
};

/// Names of all suite checks, in execution order.
const std::vector<std::string>& all_check_names();

/// One-paragraph description of what a check verifies; throws ParseError for
/// an unknown name.
std::string explain_check(const std::string& name);

/// Runs the selected checks against a loaded fixture and collects residuals.
VerificationReport run_suite(const LoadedFixture& fixture, const SuiteOptions& options = {});

} // namespace stoptime

#endif
