#include <doctest.h>

#include <random>

#include "stoptime/fixture.hpp"
#include "stoptime/tau_expectation.hpp"

using namespace stoptime;

namespace {

CMatrix unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

LoadedFixture f1() { return build_fixture(f1_config()); }

CMatrix random_in(const MatrixAlgebra& alg, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMatrix x = CMatrix::Zero(alg.ambient_dim(), alg.ambient_dim());
    for (const auto& b : alg.basis()) x += Complex(dist(rng), dist(rng)) * b;
    return x;
}

// Ambient M₂ with filtration C1 ⊂ diag ⊂ M₂ and a rank-1 jump at t = 1.
LoadedFixture rank_one_fixture() {
    FixtureConfig c;
    c.name = "rank-one";
    c.ambient_dim = 2;
    c.algebra_generators = {{}, {unit(2, 0, 0)}, {unit(2, 0, 1)}};
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = 2.0 / 3.0;
    rho(1, 1) = 1.0 / 3.0;
    c.rho = rho;
    c.grid = {0.0, 1.0, 2.0};
    c.q_explicit[1] = unit(2, 0, 0);
    return build_fixture(c);
}

} // namespace

TEST_CASE("F1 commutant of the stopping time has dimension 8") {
    const auto fx = f1();
    const TauCommutant b = compute_b_tau(fx.tau());
    CHECK(b.algebra.dim() == 8);
    CHECK_FALSE(b.horizon_index.has_value());
    // The commutant of q₁ = e₁₁⊗1 is exactly the 2+2 block-diagonal algebra.
    CHECK(b.algebra.contains(kron(unit(2, 0, 0), unit(2, 0, 1))));
    CHECK(b.algebra.contains(kron(unit(2, 1, 1), unit(2, 1, 0))));
    CHECK_FALSE(b.algebra.contains(kron(unit(2, 0, 1), CMatrix::Identity(2, 2))));
    // Every basis element commutes with every q_t.
    for (const auto& x : b.algebra.basis())
        for (std::size_t t = 0; t < fx.tau().steps(); ++t)
            CHECK(op_norm(x * fx.tau().q(t) - fx.tau().q(t) * x) <= 1e-9);
}

TEST_CASE("F1 algebra at the stopping time has dimension 5") {
    const auto fx = f1();
    const TauAlgebra a = compute_a_tau(fx.tau());
    // e₁₁⊗C1 ⊕ e₂₂⊗M₂: one scalar block plus a full 2×2 block.
    CHECK(a.algebra.dim() == 5);
    CHECK(a.algebra.contains(kron(unit(2, 0, 0), CMatrix::Identity(2, 2))));
    CHECK(a.algebra.contains(kron(unit(2, 1, 1), unit(2, 0, 1))));
    // In B_τ but fails the membership condition q₁x ∈ A₁.
    CHECK_FALSE(a.algebra.contains(kron(unit(2, 0, 0), unit(2, 0, 1))));
    // A_τ ⊆ B_τ.
    const TauCommutant b = compute_b_tau(fx.tau());
    for (const auto& x : a.algebra.basis()) CHECK(b.algebra.contains(x));
}

TEST_CASE("rank-one fixture: commutant is the diagonal algebra") {
    const auto fx = rank_one_fixture();
    const TauCommutant b = compute_b_tau(fx.tau());
    CHECK(b.algebra.dim() == 2);
    CHECK(b.algebra.contains(unit(2, 0, 0)));
    CHECK_FALSE(b.algebra.contains(unit(2, 0, 1)));
    // Membership conditions add nothing here: diagonal compressions stay
    // diagonal.
    CHECK(compute_a_tau(fx.tau()).algebra.dim() == 2);
}

TEST_CASE("deterministic stopping time: expectation collapses to E_s") {
    const auto fx = f1();
    const auto& f = *fx.filtration;
    std::mt19937_64 rng(51);
    for (std::size_t s = 1; s < f.steps(); ++s) {
        const StoppingTime det = deterministic_stopping_time(fx.filtration, s);
        // Everything commutes with 0 and 1.
        CHECK(compute_b_tau(det).algebra.dim() == f.gns().algebra().dim());
        // The algebra at the stopping time is A_s itself.
        const TauAlgebra a = compute_a_tau(det);
        CHECK(a.algebra.same_subspace_as(f.algebra_at(s)));
        for (int rep = 0; rep < 5; ++rep) {
            const CMatrix x = random_in(f.gns().algebra(), rng);
            const CMatrix expected = f.conditional_expectation_at(s).apply(x);
            CHECK(op_norm(tau_expectation_limit(det, x) - expected) <= 1e-8);
        }
    }
}

TEST_CASE("F1 hand-computed stopped expectation") {
    const auto fx = f1();
    const StoppingTime& st = fx.tau();
    // x = 1⊗diag(1,−1) commutes with q₁; E₁x = ω₂(diag(1,−1))·1 = (1/3)·1.
    const CMatrix x = kron(CMatrix::Identity(2, 2), unit(2, 0, 0) - unit(2, 1, 1));
    const CMatrix q1 = st.q(1);
    const CMatrix expected =
        q1 * (1.0 / 3.0) + (CMatrix::Identity(4, 4) - q1) * x;
    const std::size_t last = st.steps() - 1;
    CHECK(op_norm(partition_expectation(st, Partition::finest(last), x) - expected) <= 1e-9);
    CHECK(op_norm(tau_expectation_limit(st, x) - expected) <= 1e-9);

    // The three algebraic forms agree for elements of the commutant.
    const auto forms = partition_expectation_forms(st, Partition::finest(last), x);
    CHECK(op_norm(forms.left - forms.inside) <= 1e-9);
    CHECK(op_norm(forms.left - forms.right) <= 1e-9);

    // The result lands in the algebra at the stopping time.
    CHECK(compute_a_tau(st).algebra.contains(expected));
}

TEST_CASE("elements outside the commutant are rejected") {
    const auto fx = f1();
    const std::size_t last = fx.tau().steps() - 1;
    const CMatrix x = kron(unit(2, 0, 1), CMatrix::Identity(2, 2));
    CHECK_THROWS_AS(partition_expectation(fx.tau(), Partition::finest(last), x), NotInBTau);
    CHECK_THROWS_AS(tau_expectation_limit(fx.tau(), x), NotInBTau);
}

TEST_CASE("limit value equals the finest-partition value on random commutant elements") {
    const auto fx = f1();
    const StoppingTime& st = fx.tau();
    const std::size_t last = st.steps() - 1;
    const TauCommutant b = compute_b_tau(st);
    std::mt19937_64 rng(52);
    for (int rep = 0; rep < 20; ++rep) {
        const CMatrix x = random_in(b.algebra, rng);
        const CMatrix lim = tau_expectation_limit(st, x);
        CHECK(op_norm(lim - partition_expectation(st, Partition::finest(last), x)) <= 1e-9);
        // Coarser partitions containing the jump point give the same value
        // here, since q is constant between partition points.
        CHECK(op_norm(lim - partition_expectation(st, Partition{{0, 1, last}}, x)) <= 1e-8);
    }
}

TEST_CASE("axiom report passes for F1 and random adapted stopping times") {
    const auto fx = f1();
    {
        const CheckReport r = verify_tau_expectation(fx.tau());
        CHECK(r.checks.size() >= 10);
        for (const auto& c : r.checks) {
            INFO(c.name, " residual=", c.residual, " tol=", c.tolerance);
            CHECK(c.pass);
        }
    }
    for (std::uint64_t seed : {3ull, 5ull}) {
        const StoppingTime st = random_adapted_stopping_time(fx.filtration, seed);
        const CheckReport r = verify_tau_expectation(st);
        INFO("seed ", seed);
        CHECK(r.all_pass());
    }
}

TEST_CASE("axiom report passes for the rank-one fixture") {
    const auto fx = rank_one_fixture();
    CHECK(verify_tau_expectation(fx.tau()).all_pass());
}

TEST_CASE("finite-horizon expectation") {
    const auto fx = f1();
    const std::size_t last = fx.tau().steps() - 1;
    for (std::size_t u = 1; u <= last; ++u) {
        const CheckReport r = finite_horizon_expectation(fx.tau(), u);
        INFO("horizon ", u);
        for (const auto& c : r.checks) {
            INFO(c.name, " residual=", c.residual, " tol=", c.tolerance);
            CHECK(c.pass);
        }
    }
    const CheckReport r = finite_horizon_expectation(rank_one_fixture().tau(), 1);
    CHECK(r.all_pass());
}
