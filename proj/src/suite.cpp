#include "stoptime/suite.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace stoptime {

namespace {

double min_eigenvalue(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es((h + h.adjoint()) / 2.0);
    return es.eigenvalues()(0);
}

CVector random_vector(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CVector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(dist(rng), dist(rng));
    return v / std::max(v.norm(), 1e-300);
}

struct Collector {
    std::vector<ReportRow>& rows;

    void add(std::string name, double residual, double tolerance, double ms) {
        rows.push_back({std::move(name), residual <= tolerance, residual, tolerance, ms});
    }
    void add_bool(std::string name, bool pass, double ms) {
        rows.push_back({std::move(name), pass, pass ? 0.0 : 1.0, 0.5, ms});
    }
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_theorem1(const StoppingTime& st, const SuiteOptions&, Collector& out) {
    const auto t0 = Clock::now();
    double res = 0.0;
    for (std::size_t u = 1; u < st.steps(); ++u)
        res = std::max(res,
                       op_norm(time_projection_net(st, u) - time_projection_meet(st, u)));
    out.add("theorem1_net_vs_meet", res, st.tol().eq_tol, ms_since(t0));
}

void check_corollary(const StoppingTime& st, const SuiteOptions&, Collector& out) {
    const auto t0 = Clock::now();
    const double res =
        op_norm(time_projection_closed(st) - time_projection_meet(st, st.steps() - 1));
    out.add("corollary_closed_form", res, st.tol().eq_tol, ms_since(t0));
}

void check_complement(const StoppingTime& st, const SuiteOptions&, Collector& out) {
    const auto t0 = Clock::now();
    const auto& f = st.filtration();
    const Eigen::Index d = f.gns().dim();
    double res = 0.0;
    for (std::size_t u = 1; u < st.steps(); ++u) {
        const CMatrix m = time_projection_meet(st, u);
        std::vector<CMatrix> pieces;
        for (std::size_t t = 0; t <= u; ++t)
            pieces.push_back(st.q_op(t) *
                             (CMatrix::Identity(d, d) - f.hilbert_projection_at(t)));
        res = std::max(res, op_norm((st.q_op(u) - m) - join(pieces, st.tol())));
    }
    out.add("complement_identity", res, 10 * st.tol().eq_tol, ms_since(t0));
}

void check_monotonicity(const StoppingTime& st, const SuiteOptions&, Collector& out) {
    const auto t0 = Clock::now();
    double res = 0.0;
    for (std::size_t u = 1; u < st.steps(); ++u) {
        Partition theta = Partition::coarsest(u);
        CMatrix current = partition_projection(st, theta);
        for (std::size_t i = 1; i < u; ++i) {
            theta.indices.insert(theta.indices.end() - 1, i);
            std::sort(theta.indices.begin(), theta.indices.end());
            const CMatrix refined = partition_projection(st, theta);
            res = std::max(res, std::max(0.0, -min_eigenvalue(current - refined)));
            current = refined;
        }
    }
    out.add("monotonicity_refinement", res, st.tol().rank_tol, ms_since(t0));
}

void check_fixed_vector(const StoppingTime& st, const SuiteOptions& opt, Collector& out) {
    const auto t0 = Clock::now();
    const auto& f = st.filtration();
    const Eigen::Index d = f.gns().dim();
    std::mt19937_64 rng(opt.seed + 0x5f1d);
    int exceptions = 0;
    const int per_horizon = std::max(1, opt.seeds / static_cast<int>(st.steps() - 1));
    for (std::size_t u = 1; u < st.steps(); ++u) {
        const CMatrix m = time_projection_meet(st, u);
        const auto check_one = [&](const CVector& xi) {
            const double lim = st.tol().eq_tol * std::max(1.0, xi.norm());
            const bool lhs = (m * xi - st.q_op(u) * xi).norm() <= lim;
            bool rhs = true;
            for (std::size_t t = 0; t <= u && rhs; ++t)
                rhs = (st.q_op(t) * (f.hilbert_projection_at(t) * xi) - st.q_op(t) * xi)
                          .norm() <= lim;
            if (lhs != rhs) ++exceptions;
        };
        for (int k = 0; k < per_horizon; ++k) check_one(random_vector(d, rng));
        // Vectors from the range of ∨ q_tP_t^⊥ must fail both conditions;
        // they exercise the (false, false) branch.
        std::vector<CMatrix> pieces;
        for (std::size_t t = 0; t <= u; ++t)
            pieces.push_back(st.q_op(t) *
                             (CMatrix::Identity(d, d) - f.hilbert_projection_at(t)));
        const CMatrix j = join(pieces, st.tol());
        for (int k = 0; k < 5; ++k) {
            const CVector xi = j * random_vector(d, rng);
            if (xi.norm() > 1e-6) check_one(xi / xi.norm());
        }
    }
    out.add_bool("fixed_vector_equivalence", exceptions == 0, ms_since(t0));
}

void check_deterministic_oracle(const LoadedFixture& fixture, Collector& out) {
    const auto t0 = Clock::now();
    const auto& f = *fixture.filtration;
    const Eigen::Index d = f.gns().dim();
    double res = 0.0;
    for (std::size_t s = 1; s < f.steps(); ++s) {
        const StoppingTime det = deterministic_stopping_time(fixture.filtration, s);
        for (std::size_t u = 1; u < f.steps(); ++u) {
            // Analytic value: P_s once the jump has happened, 0 before.
            const CMatrix expected =
                (u >= s) ? f.hilbert_projection_at(s) : CMatrix::Zero(d, d).eval();
            res = std::max(res, op_norm(time_projection_net(det, u) - expected));
            res = std::max(res, op_norm(time_projection_meet(det, u) - expected));
        }
    }
    out.add("deterministic_oracle_value", res, f.tol().eq_tol, ms_since(t0));
}

void check_theorem2(const StoppingTime& st, const SuiteOptions& opt, Collector& out) {
    const auto t0 = Clock::now();
    const auto& f = st.filtration();
    const std::size_t last = st.steps() - 1;
    const CMatrix m = time_projection_meet(st, last);
    std::mt19937_64 rng(opt.seed + 0x7e2);
    const int count = std::max(1, opt.seeds / 4);

    double mart_res = 0.0;
    double stop_res = 0.0;
    for (int k = 0; k < count; ++k) {
        const CVector xi = random_vector(f.gns().dim(), rng);
        MartingaleVec mv{last, {}};
        for (std::size_t t = 0; t <= last; ++t)
            mv.values.push_back(f.hilbert_projection_at(t) * xi);
        std::vector<CVector> eta;
        for (std::size_t t = 0; t <= last; ++t) eta.push_back(m * mv.values[t]);
        for (std::size_t t = 0; t <= last; ++t)
            for (std::size_t s = 0; s < t; ++s)
                mart_res = std::max(
                    mart_res, (f.hilbert_projection_at(s) * eta[t] - eta[s]).norm());
        stop_res =
            std::max(stop_res, (stop_open_martingale(st, mv) - m * mv.values[last]).norm());
    }
    out.add("theorem2_stopped_martingale", mart_res, st.tol().eq_tol, ms_since(t0));
    out.add("theorem2_stopped_value", stop_res, st.tol().eq_tol, 0.0);

    double comm_res = 0.0;
    for (std::size_t s = 0; s < st.steps(); ++s) {
        const CMatrix& p = f.hilbert_projection_at(s);
        comm_res = std::max(comm_res, op_norm(p * m - m * p));
    }
    out.add("theorem2_commutation", comm_res, 10 * st.tol().eq_tol, 0.0);
}

void check_theorem3(const StoppingTime& st, Collector& out) {
    const auto t0 = Clock::now();
    const CheckReport report = verify_tau_expectation(st);
    const double ms = ms_since(t0);
    for (const auto& c : report.checks)
        out.rows.push_back({"theorem3_" + c.name, c.pass, c.residual, c.tolerance,
                            &c == &report.checks.front() ? ms : 0.0});
}

void check_finite_horizon(const StoppingTime& st, const SuiteOptions& opt, Collector& out) {
    const auto t0 = Clock::now();
    const std::size_t u = opt.horizon_index.value_or(1);
    const CheckReport report = finite_horizon_expectation(st, u);
    const double ms = ms_since(t0);
    for (const auto& c : report.checks)
        out.rows.push_back({"finite_horizon_" + c.name, c.pass, c.residual, c.tolerance,
                            &c == &report.checks.front() ? ms : 0.0});
}

void check_structural(const StoppingTime& st, Collector& out) {
    const auto t0 = Clock::now();
    const auto& f = st.filtration();
    const Eigen::Index d = f.gns().dim();
    const std::size_t last = st.steps() - 1;
    double res = 0.0;
    const auto proj_residual = [&](const CMatrix& p) {
        const auto [idem, herm] = projection_residuals(p);
        res = std::max({res, idem, herm});
    };
    for (std::size_t t = 0; t <= last; ++t) {
        proj_residual(st.q_op(t));
        const CMatrix pt_perp = CMatrix::Identity(d, d) - f.hilbert_projection_at(t);
        proj_residual(st.q_op(last) - st.q_op(t) * pt_perp);
        proj_residual((CMatrix::Identity(d, d) - st.q_op(t)) +
                      st.q_op(t) * f.hilbert_projection_at(t));
    }
    for (std::size_t u = 1; u <= last; ++u) {
        Partition theta = Partition::coarsest(u);
        proj_residual(partition_projection(st, theta));
        for (std::size_t i = 1; i < u; ++i) {
            theta.indices.insert(theta.indices.end() - 1, i);
            std::sort(theta.indices.begin(), theta.indices.end());
            proj_residual(partition_projection(st, theta));
        }
    }
    out.add("structural_projection_gates", res, st.tol().eq_tol, ms_since(t0));

    const auto t1 = Clock::now();
    double dc_res = 0.0;
    for (std::size_t i = 0; i < f.steps(); ++i) {
        const MatrixAlgebra& a = f.algebra_at(i);
        const MatrixAlgebra dc = a.commutant().commutant();
        for (const auto& b : a.basis())
            dc_res = std::max(dc_res, op_norm(b - dc.project(b)));
        for (const auto& b : dc.basis())
            dc_res = std::max(dc_res, op_norm(b - a.project(b)));
    }
    out.add("structural_double_commutant", dc_res, 10 * st.tol().eq_tol, ms_since(t1));
}

} // namespace

const std::vector<std::string>& all_check_names() {
    static const std::vector<std::string> names = {
        "theorem1",  "corollary", "complement",     "monotonicity", "fixed_vector",
        "deterministic_oracle", "theorem2", "theorem3", "finite_horizon", "structural"};
    return names;
}

std::string explain_check(const std::string& name) {
    if (name == "theorem1")
        return "The refining-net value of the time projection (finest-partition value of "
               "sum (q_i - q_{i-1}) P_i) equals the lattice meet over t <= u of "
               "(q_u - q_t P_t_perp).";
    if (name == "corollary")
        return "At the terminal horizon the time projection also equals the meet over all t "
               "of (q_t_perp + q_t P_t).";
    if (name == "complement")
        return "q_u - M_tau(u) equals the join of the projections q_t P_t_perp for t <= u "
               "(equal null spaces).";
    if (name == "monotonicity")
        return "Refining a partition can only decrease the partition projection: along a "
               "maximal refinement chain the eigenvalues of successive differences stay "
               "nonnegative.";
    if (name == "fixed_vector")
        return "For every vector xi, M_tau(u) xi = q_u xi holds exactly when "
               "q_t P_t xi = q_t xi holds for all t <= u; the two conditions are checked "
               "independently and must agree.";
    if (name == "deterministic_oracle")
        return "For a stopping time that jumps from 0 to 1 at a fixed grid point s, the time "
               "projection is P_s (analytically, with no meet computation); both computed "
               "routes must reproduce it.";
    if (name == "theorem2")
        return "eta(t) = M_tau xi(t) is again a martingale, the stopped element equals "
               "M_tau xi(t_N), and P_s commutes with M_tau for every s.";
    if (name == "theorem3")
        return "The map x -> pullback of M_tau(x Omega), restricted to the commutant of the "
               "stopping time, is a normal faithful state-preserving conditional expectation "
               "onto {x : x q_t = q_t x in A_t for all t}; includes the three algebraic "
               "forms of the partition expectation and the absorption law.";
    if (name == "finite_horizon")
        return "At a finite horizon u the analogous map on {x : x q_t = q_t x, t <= u} is a "
               "conditional expectation onto the compression q_u A_tau(u) q_u.";
    if (name == "structural")
        return "Every stopping-time value, every meet operand, and every partition "
               "projection passes the projection gate; each filtration subalgebra equals "
               "its double commutant.";
    throw ParseError("unknown check: " + name);
}

bool VerificationReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["fixture"] = fixture_name;
    j["fingerprint"] = fingerprint;
    j["all_pass"] = all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& r : rows)
        j["checks"].push_back({{"check", r.check},
                               {"pass", r.pass},
                               {"residual", r.residual},
                               {"tolerance", r.tolerance},
                               {"wall_ms", r.wall_ms}});
    return j;
}

std::string VerificationReport::summary_table() const {
    std::ostringstream os;
    os << "fixture " << fixture_name << " (" << fingerprint << ")\n";
    for (const auto& r : rows) {
        os.setf(std::ios::scientific);
        os.precision(3);
        os << (r.pass ? "  PASS  " : "  FAIL  ") << r.check;
        for (std::size_t i = r.check.size(); i < 42; ++i) os << ' ';
        os << " residual " << r.residual << "  tol " << r.tolerance << "\n";
    }
    os << (all_pass() ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
    return os.str();
}

VerificationReport run_suite(const LoadedFixture& fixture, const SuiteOptions& options) {
    const StoppingTime& st = fixture.tau();
    std::vector<std::string> selected =
        options.checks.empty() ? all_check_names() : options.checks;
    for (const auto& name : selected) explain_check(name);  // reject unknown names early

    VerificationReport report{fixture.config.name, fixture.fingerprint, {}};
    Collector out{report.rows};
    for (const auto& name : selected) {
        if (name == "theorem1") check_theorem1(st, options, out);
        else if (name == "corollary") check_corollary(st, options, out);
        else if (name == "complement") check_complement(st, options, out);
        else if (name == "monotonicity") check_monotonicity(st, options, out);
        else if (name == "fixed_vector") check_fixed_vector(st, options, out);
        else if (name == "deterministic_oracle") check_deterministic_oracle(fixture, out);
        else if (name == "theorem2") check_theorem2(st, options, out);
        else if (name == "theorem3") check_theorem3(st, out);
        else if (name == "finite_horizon") check_finite_horizon(st, options, out);
        else if (name == "structural") check_structural(st, out);
    }
    return report;
}

} // namespace stoptime
