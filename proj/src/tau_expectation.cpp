#include "stoptime/tau_expectation.hpp"

#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace stoptime {

namespace {

// Stacks the coordinate-space constraint rows for x ↦ xq − qx, x = Σ c_j b_j.
CMatrix commutation_block(const MatrixAlgebra& alg, const CMatrix& q) {
    const Eigen::Index n = alg.ambient_dim();
    const Eigen::Index d = alg.dim();
    CMatrix block(n * n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const CMatrix& b = alg.basis()[static_cast<std::size_t>(j)];
        block.col(j) = vec(b * q - q * b);
    }
    return block;
}

// Constraint rows for (I − Π_{A_t}) (q x) = 0.
CMatrix membership_block(const MatrixAlgebra& ambient, const MatrixAlgebra& target,
                         const CMatrix& q) {
    const Eigen::Index n = ambient.ambient_dim();
    const Eigen::Index d = ambient.dim();
    CMatrix block(n * n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const CMatrix qb = q * ambient.basis()[static_cast<std::size_t>(j)];
        block.col(j) = vec(qb - target.project(qb));
    }
    return block;
}

// Orthonormal coordinate vectors spanning the joint kernel of the stacked
// constraints, converted back to matrices.
std::vector<CMatrix> joint_kernel_elements(const MatrixAlgebra& alg, const CMatrix& stacked,
                                           const Tolerance& tol) {
    // JacobiSVD: BDCSVD miscomputes V for complex inputs in Eigen 3.4.0.
    Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    std::vector<CMatrix> out;
    const Eigen::Index n = alg.ambient_dim();
    for (Eigen::Index k = rank; k < svd.matrixV().cols(); ++k) {
        CMatrix x = CMatrix::Zero(n, n);
        for (Eigen::Index j = 0; j < alg.dim(); ++j)
            x += svd.matrixV()(j, k) * alg.basis()[static_cast<std::size_t>(j)];
        out.push_back(std::move(x));
    }
    return out;
}

void require_in_b_tau(const StoppingTime& st, const CMatrix& x,
                      std::optional<std::size_t> horizon_index) {
    const std::size_t last = horizon_index.value_or(st.steps() - 1);
    for (std::size_t t = 0; t <= last; ++t)
        if (op_norm(x * st.q(t) - st.q(t) * x) > 10 * st.tol().eq_tol)
            throw NotInBTau("element does not commute with the stopping time at index " +
                            std::to_string(t));
}

CMatrix random_combination(const std::vector<CMatrix>& basis, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMatrix x = CMatrix::Zero(basis.front().rows(), basis.front().cols());
    for (const auto& b : basis) x += Complex(dist(rng), dist(rng)) * b;
    return x;
}

double min_eigenvalue(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es((h + h.adjoint()) / 2.0);
    return es.eigenvalues()(0);
}

} // namespace

TauCommutant compute_b_tau(const StoppingTime& st, std::optional<std::size_t> horizon_index) {
    const auto& alg = st.filtration().gns().algebra();
    const std::size_t last = horizon_index.value_or(st.steps() - 1);
    const Eigen::Index n = alg.ambient_dim();
    CMatrix stacked(static_cast<Eigen::Index>(last + 1) * n * n, alg.dim());
    for (std::size_t t = 0; t <= last; ++t)
        stacked.middleRows(static_cast<Eigen::Index>(t) * n * n, n * n) =
            commutation_block(alg, st.q(t));
    auto kernel = joint_kernel_elements(alg, stacked, st.tol());
    return TauCommutant{MatrixAlgebra::from_span(n, kernel, st.tol()), horizon_index};
}

TauAlgebra compute_a_tau(const StoppingTime& st, std::optional<Partition> theta) {
    const auto& f = st.filtration();
    const auto& alg = f.gns().algebra();
    Partition part = theta.value_or(Partition::finest(st.steps() - 1));
    part.validate(st.steps());
    const Eigen::Index n = alg.ambient_dim();
    const Eigen::Index rows_per = n * n;
    CMatrix stacked(2 * static_cast<Eigen::Index>(part.indices.size()) * rows_per, alg.dim());
    Eigen::Index row = 0;
    for (std::size_t i : part.indices) {
        stacked.middleRows(row, rows_per) = commutation_block(alg, st.q(i));
        row += rows_per;
        stacked.middleRows(row, rows_per) = membership_block(alg, f.algebra_at(i), st.q(i));
        row += rows_per;
    }
    auto kernel = joint_kernel_elements(alg, stacked, st.tol());
    return TauAlgebra{MatrixAlgebra::from_span(n, kernel, st.tol()), std::move(part)};
}

PartitionExpectationForms partition_expectation_forms(const StoppingTime& st,
                                                      const Partition& theta,
                                                      const CMatrix& x) {
    const auto& f = st.filtration();
    theta.validate(st.steps());
    require_in_b_tau(st, x, theta.indices.back());
    const Eigen::Index n = f.gns().algebra().ambient_dim();
    PartitionExpectationForms forms{CMatrix::Zero(n, n), CMatrix::Zero(n, n),
                                    CMatrix::Zero(n, n)};
    for (std::size_t k = 1; k < theta.indices.size(); ++k) {
        const std::size_t i = theta.indices[k];
        const CMatrix dq = st.q(i) - st.q(theta.indices[k - 1]);
        const auto& e = f.conditional_expectation_at(i);
        const CMatrix ex = e.apply(x);
        forms.left += dq * ex;
        forms.inside += e.apply(dq * x);
        forms.right += ex * dq;
    }
    return forms;
}

CMatrix partition_expectation(const StoppingTime& st, const Partition& theta,
                              const CMatrix& x) {
    const auto forms = partition_expectation_forms(st, theta, x);
    const double lim = 10 * st.tol().eq_tol * std::max(1.0, op_norm(x));
    if (op_norm(forms.left - forms.inside) > lim || op_norm(forms.left - forms.right) > lim)
        throw Error("partition_expectation: algebraic forms disagree");
    return forms.left;
}

CMatrix tau_expectation_limit(const StoppingTime& st, const CMatrix& x) {
    const auto& f = st.filtration();
    const std::size_t last = st.steps() - 1;
    require_in_b_tau(st, x, std::nullopt);
    const CMatrix y = partition_expectation(st, Partition::finest(last), x);
    const CMatrix m = time_projection_meet(st, last);
    const double scale = std::max(1.0, op_norm(x));
    if ((f.gns().embed(y) - m * f.gns().embed(x)).norm() > st.tol().eq_tol * scale)
        throw GnsMismatch("tau_expectation_limit: (E_τx)Ω != M_τ(xΩ)");
    // Absorption along a refinement chain.
    Partition theta = Partition::coarsest(last);
    for (std::size_t i = 0; i < last; ++i) {
        if (i > 0) theta.indices.insert(theta.indices.end() - 1, i);
        const CMatrix absorbed = partition_expectation(st, theta, y);
        if (op_norm(absorbed - y) > 10 * st.tol().eq_tol * scale)
            throw Error("tau_expectation_limit: absorption law fails");
    }
    return y;
}

CheckReport verify_tau_expectation(const StoppingTime& st) {
    const auto& f = st.filtration();
    const auto& gns = f.gns();
    const Tolerance tol = st.tol();
    const std::size_t last = st.steps() - 1;
    const Eigen::Index n = gns.algebra().ambient_dim();

    const TauCommutant b_tau = compute_b_tau(st);
    const TauAlgebra a_tau = compute_a_tau(st);
    const CMatrix m = time_projection_meet(st, last);
    const auto expect = [&](const CMatrix& x) { return gns.unembed(m * gns.embed(x)); };

    CheckReport report;
    auto add = [&](std::string name, double residual, double limit) {
        report.checks.push_back({std::move(name), residual <= limit, residual, limit});
    };

    const auto& bb = b_tau.algebra.basis();
    std::mt19937_64 rng(0x7a0);

    // Linearity of the pullback map on random combinations.
    double res = 0.0;
    for (int k = 0; k < 10; ++k) {
        const CMatrix x = random_combination(bb, rng);
        const CMatrix y = random_combination(bb, rng);
        const Complex a(0.3, -0.4), b(1.1, 0.2);
        res = std::max(res, op_norm(expect(a * x + b * y) - a * expect(x) - b * expect(y)) /
                                std::max(1.0, op_norm(x) + op_norm(y)));
    }
    add("linearity", res, 10 * tol.eq_tol);

    add("unitality", op_norm(expect(CMatrix::Identity(n, n)) - CMatrix::Identity(n, n)),
        10 * tol.eq_tol);

    res = 0.0;
    for (int k = 0; k < 50; ++k) {
        const CMatrix x = random_combination(bb, rng);
        const CMatrix y = expect(x.adjoint() * x);
        res = std::max(res, std::max(0.0, -min_eigenvalue(y)) / std::max(1.0, op_norm(y)));
    }
    add("positivity", res, tol.rank_tol);

    res = 0.0;
    double range_res = 0.0;
    double fix_res = 0.0;
    double omega_res = 0.0;
    double gns_res = 0.0;
    double forms_res = 0.0;
    double absorb_res = 0.0;
    const Partition finest = Partition::finest(last);
    for (const auto& x : bb) {
        const CMatrix ex = expect(x);
        res = std::max(res, op_norm(expect(ex) - ex));
        range_res = std::max(range_res, op_norm(ex - a_tau.algebra.project(ex)));
        omega_res = std::max(omega_res,
                             std::abs(gns.state_value(ex) - gns.state_value(x)));
        const auto forms = partition_expectation_forms(st, finest, x);
        forms_res = std::max({forms_res, op_norm(forms.left - forms.inside),
                              op_norm(forms.left - forms.right)});
        gns_res = std::max(gns_res, (gns.embed(forms.left) - m * gns.embed(x)).norm());
        Partition theta = Partition::coarsest(last);
        for (std::size_t i = 0; i < last; ++i) {
            if (i > 0) theta.indices.insert(theta.indices.end() - 1, i);
            absorb_res = std::max(
                absorb_res, op_norm(partition_expectation(st, theta, forms.left) - forms.left));
        }
    }
    for (const auto& y : a_tau.algebra.basis())
        fix_res = std::max(fix_res, op_norm(expect(y) - y));
    add("idempotence", res, 10 * tol.eq_tol);
    add("range_in_a_tau", range_res, 10 * tol.eq_tol);
    add("a_tau_fixed", fix_res, 10 * tol.eq_tol);
    add("state_invariance", omega_res, tol.eq_tol);
    add("gns_identity", gns_res, tol.eq_tol);
    add("three_forms", forms_res, 10 * tol.eq_tol);
    add("absorption", absorb_res, 10 * tol.eq_tol);

    // Faithfulness reduces to faithfulness of ω: full spectrum of ρ. The
    // residual is the shortfall of ρ's smallest eigenvalue below rank_tol.
    const double rho_min = min_eigenvalue(gns.state().rho);
    const double shortfall = std::max(0.0, tol.rank_tol - rho_min);
    report.checks.push_back({"faithfulness", shortfall == 0.0, shortfall, 0.0});

    // Norm of the map on the embedded image of B_τ.
    CMatrix cols(gns.dim(), b_tau.algebra.dim());
    for (Eigen::Index j = 0; j < b_tau.algebra.dim(); ++j)
        cols.col(j) = gns.embed(bb[static_cast<std::size_t>(j)]);
    const CMatrix q = orthonormal_columns(cols, tol);
    add("norm_one", std::max(0.0, op_norm(q.adjoint() * m * q) - 1.0), tol.eq_tol);

    // Finite dimension: every bounded map is automatically normal.
    report.checks.push_back({"normality_automatic", true, 0.0, 0.0});
    return report;
}

CheckReport finite_horizon_expectation(const StoppingTime& st, std::size_t horizon_index) {
    const auto& f = st.filtration();
    const auto& gns = f.gns();
    const Tolerance tol = st.tol();
    if (horizon_index >= st.steps() || horizon_index == 0)
        throw UnknownTimePoint("finite_horizon_expectation: bad horizon");

    const TauCommutant b_u = compute_b_tau(st, horizon_index);
    const TauAlgebra a_u = compute_a_tau(st, Partition::finest(horizon_index));
    const CMatrix m = time_projection_meet(st, horizon_index);
    const CMatrix& qu = st.q(horizon_index);
    const auto expect = [&](const CMatrix& x) {
        const CVector v = m * gns.embed(x);
        const CMatrix y = gns.unembed(v);
        if ((gns.embed(y) - v).norm() > tol.eq_tol * std::max(1.0, v.norm()))
            throw PullbackFailed("finite_horizon_expectation: image escapes the embedded algebra");
        return y;
    };

    CheckReport report;
    auto add = [&](std::string name, double residual, double limit) {
        report.checks.push_back({std::move(name), residual <= limit, residual, limit});
    };

    // Span of the compressed range q_u A_τ(u) q_u.
    const Eigen::Index n = gns.algebra().ambient_dim();
    CMatrix span(n * n, a_u.algebra.dim());
    for (Eigen::Index j = 0; j < a_u.algebra.dim(); ++j)
        span.col(j) = vec(qu * a_u.algebra.basis()[static_cast<std::size_t>(j)] * qu);
    const CMatrix range_q = orthonormal_columns(span, tol);

    double comp_res = 0.0, idem_res = 0.0, range_res = 0.0;
    for (const auto& x : b_u.algebra.basis()) {
        const CMatrix ex = expect(x);
        comp_res = std::max(comp_res, op_norm(ex - qu * ex * qu));
        idem_res = std::max(idem_res, op_norm(expect(ex) - ex));
        const CVector v = vec(ex);
        range_res = std::max(range_res, (v - range_q * (range_q.adjoint() * v)).norm());
    }
    add("compression", comp_res, 10 * tol.eq_tol);
    add("idempotence", idem_res, 10 * tol.eq_tol);
    add("range_in_compressed_a_tau", range_res, 10 * tol.eq_tol);

    double pos_res = 0.0;
    std::mt19937_64 rng(0xf1);
    for (int k = 0; k < 50; ++k) {
        const CMatrix x = random_combination(b_u.algebra.basis(), rng);
        const CMatrix y = expect(x.adjoint() * x);
        pos_res = std::max(pos_res, std::max(0.0, -min_eigenvalue(y)) / std::max(1.0, op_norm(y)));
    }
    add("positivity", pos_res, tol.rank_tol);
    return report;
}

} // namespace stoptime
