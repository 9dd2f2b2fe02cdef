#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "stoptime/suite.hpp"

using namespace stoptime;

namespace {

CMatrix unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

} // namespace

TEST_CASE("fixture config JSON round-trip") {
    const FixtureConfig c = f1_config();
    const nlohmann::json j = c.to_json();
    const FixtureConfig back = FixtureConfig::from_json(j);
    CHECK(back.name == c.name);
    CHECK(back.tensor_chain == c.tensor_chain);
    CHECK(back.product_diagonals == c.product_diagonals);
    CHECK(back.grid == c.grid);
    REQUIRE(back.q_explicit.count(1) == 1);
    CHECK(op_norm(back.q_explicit.at(1) - c.q_explicit.at(1)) == doctest::Approx(0.0));
    CHECK(fingerprint(back) == fingerprint(c));

    // The round-tripped config builds the same fixture.
    const LoadedFixture fx = build_fixture(back);
    CHECK(fx.filtration->gns().dim() == 16);
    CHECK(fx.fingerprint == fingerprint(c));
}

TEST_CASE("load_fixture from disk") {
    const std::string path = "harness_roundtrip_fixture.json";
    {
        std::ofstream out(path);
        out << f1_config().to_json().dump(2);
    }
    const LoadedFixture fx = load_fixture(path);
    CHECK(fx.config.name == f1_config().name);
    CHECK(fx.filtration->gns().dim() == 16);
    CHECK(fx.stopping_time.has_value());
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_fixture("does_not_exist.json"), ParseError);

    const std::string bad = "harness_bad_fixture.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_fixture(bad), ParseError);
    std::remove(bad.c_str());
}

TEST_CASE("malformed configs are rejected with ParseError") {
    nlohmann::json j = f1_config().to_json();
    j["schema_version"] = 99;
    CHECK_THROWS_AS(FixtureConfig::from_json(j), ParseError);

    nlohmann::json j2 = f1_config().to_json();
    j2.erase("grid");
    CHECK_THROWS_AS(FixtureConfig::from_json(j2), ParseError);
}

TEST_CASE("invalid stopping-time data surfaces as ValidationError") {
    FixtureConfig c = f1_config();
    c.q_explicit[0] = CMatrix::Identity(4, 4);  // q_0 ≠ 0
    CHECK_THROWS_AS(build_fixture(c), ValidationError);

    FixtureConfig c2 = f1_config();
    c2.q_explicit[1] = kron(unit(2, 0, 0), unit(2, 0, 0));  // not adapted
    CHECK_THROWS_AS(build_fixture(c2), ValidationError);
}

TEST_CASE("random adapted generator is deterministic in the seed") {
    const auto fx = build_fixture(f1_config());
    const StoppingTime a = random_adapted_stopping_time(fx.filtration, 17);
    const StoppingTime b = random_adapted_stopping_time(fx.filtration, 17);
    const StoppingTime c = random_adapted_stopping_time(fx.filtration, 18);
    double max_diff_same = 0.0, max_diff_other = 0.0;
    for (std::size_t t = 0; t < a.steps(); ++t) {
        max_diff_same = std::max(max_diff_same, op_norm(a.q(t) - b.q(t)));
        max_diff_other = std::max(max_diff_other, op_norm(a.q(t) - c.q(t)));
    }
    CHECK(max_diff_same == doctest::Approx(0.0));
    CHECK(max_diff_other > 1e-3);
}

TEST_CASE("trivial filtration forces interior q to vanish") {
    // A_t = C·1 until the terminal time: the only adapted projections below
    // the end are 0, so every seed produces the jump-at-the-end time.
    FixtureConfig c;
    c.name = "trivial-until-end";
    c.ambient_dim = 2;
    c.algebra_generators = {{}, {}, {unit(2, 0, 1)}};
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.5;
    c.rho = rho;
    c.grid = {0.0, 1.0, 2.0};
    c.random_seed = 23;
    const LoadedFixture fx = build_fixture(c);
    CHECK(op_norm(fx.tau().q(1)) <= 1e-12);
    CHECK(op_norm(fx.tau().q(2) - CMatrix::Identity(2, 2)) <= 1e-12);
}

TEST_CASE("run_suite passes on the shipped example and reports deterministically") {
    const LoadedFixture fx = build_fixture(f1_config());
    SuiteOptions opt;
    opt.seeds = 40;
    const VerificationReport r1 = run_suite(fx, opt);
    CHECK(r1.all_pass());
    // Every suite check contributes at least one row, named with the check as
    // a prefix, in execution order.
    CHECK(r1.rows.size() >= all_check_names().size());
    std::size_t row = 0;
    for (const auto& name : all_check_names()) {
        REQUIRE(row < r1.rows.size());
        CHECK(r1.rows[row].check.rfind(name, 0) == 0);
        while (row < r1.rows.size() && r1.rows[row].check.rfind(name, 0) == 0) ++row;
    }
    CHECK(row == r1.rows.size());

    const VerificationReport r2 = run_suite(fx, opt);
    REQUIRE(r2.rows.size() == r1.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(r1.rows[i].pass == r2.rows[i].pass);
        CHECK(r1.rows[i].residual == doctest::Approx(r2.rows[i].residual));
    }

    // JSON report carries every row and the fingerprint.
    const nlohmann::json j = r1.to_json();
    CHECK(j.at("fingerprint").get<std::string>() == fx.fingerprint);
    CHECK(j.at("checks").size() == r1.rows.size());
    CHECK_FALSE(r1.summary_table().empty());
}

TEST_CASE("check selection and explanations") {
    const LoadedFixture fx = build_fixture(f1_config());
    SuiteOptions opt;
    opt.checks = {"theorem1", "complement"};
    opt.seeds = 10;
    const VerificationReport r = run_suite(fx, opt);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].check == "theorem1_net_vs_meet");
    CHECK(r.rows[1].check == "complement_identity");
    CHECK(r.all_pass());

    for (const auto& name : all_check_names()) CHECK_FALSE(explain_check(name).empty());
    CHECK_THROWS_AS(explain_check("no_such_check"), ParseError);
}
