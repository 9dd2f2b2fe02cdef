#include "stoptime/filtration.hpp"

#include <random>

#include <Eigen/Eigenvalues>

namespace stoptime {

void TimeGrid::validate() const {
    if (points.size() < 2)
        throw ValidationError("TimeGrid: at least two points required");
    if (points.front() != 0.0)
        throw ValidationError("TimeGrid: grid must start at 0");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1]))
            throw ValidationError("TimeGrid: points not strictly increasing");
}

std::size_t TimeGrid::index_of(double t) const {
    for (std::size_t i = 0; i < points.size(); ++i)
        if (points[i] == t) return i;
    throw UnknownTimePoint("TimeGrid: unknown time point " + std::to_string(t));
}

CMatrix ConditionalExpectation::apply(const CMatrix& x) const {
    return gns_->unembed(map_ * gns_->embed(x));
}

namespace {

// Seeded random element of the algebra span, for the positivity sample.
CMatrix random_element(const MatrixAlgebra& alg, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMatrix x = CMatrix::Zero(alg.ambient_dim(), alg.ambient_dim());
    for (const auto& b : alg.basis()) x += Complex(dist(rng), dist(rng)) * b;
    return x;
}

void check_expectation_axioms(const GnsSpace& gns, const ConditionalExpectation& e,
                              const MatrixAlgebra& target, const Tolerance& tol) {
    const Eigen::Index n = gns.algebra().ambient_dim();
    const CMatrix id = CMatrix::Identity(n, n);
    if (op_norm(e.apply(id) - id) > 10 * tol.eq_tol)
        throw ExpectationDoesNotExist("conditional expectation not unital");
    for (const auto& b : gns.algebra().basis()) {
        const CMatrix ex = e.apply(b);
        if (!target.contains(ex))
            throw ExpectationDoesNotExist("conditional expectation range escapes the subalgebra");
        if (op_norm(e.apply(ex) - ex) > 10 * tol.eq_tol)
            throw ExpectationDoesNotExist("conditional expectation not idempotent");
        if (std::abs(gns.state_value(ex) - gns.state_value(b)) > 10 * tol.eq_tol)
            throw ExpectationDoesNotExist("conditional expectation does not preserve the state");
    }
    for (const auto& b : gns.algebra().basis())
        if (op_norm(e.apply(b.adjoint()) - e.apply(b).adjoint()) > 10 * tol.eq_tol)
            throw ExpectationDoesNotExist("conditional expectation not adjoint-preserving");
    // For a unital idempotent map positivity is equivalent to complete
    // positivity, so on a full matrix algebra the Choi matrix decides it.
    if (gns.algebra().dim() == n * n) {
        CMatrix choi(n * n, n * n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                CMatrix eij = CMatrix::Zero(n, n);
                eij(i, j) = 1.0;
                choi.block(i * n, j * n, n, n) = e.apply(eij);
            }
        Eigen::SelfAdjointEigenSolver<CMatrix> es((choi + choi.adjoint()) / 2.0);
        if (es.eigenvalues()(0) < -tol.rank_tol * std::max(1.0, op_norm(choi)))
            throw ExpectationDoesNotExist("conditional expectation not positive");
    }
    // Positivity sample: all basis elements plus seeded random elements.
    std::mt19937_64 rng(0x5eed);
    std::vector<CMatrix> sample = gns.algebra().basis();
    for (int k = 0; k < 50; ++k) sample.push_back(random_element(gns.algebra(), rng));
    for (const auto& x : sample) {
        const CMatrix y = e.apply(x.adjoint() * x);
        Eigen::SelfAdjointEigenSolver<CMatrix> es((y + y.adjoint()) / 2.0);
        const double scale = std::max(1.0, op_norm(y));
        if (es.eigenvalues()(0) < -tol.rank_tol * scale)
            throw ExpectationDoesNotExist("conditional expectation not positive");
    }
}

} // namespace

std::shared_ptr<const Filtration> Filtration::build(std::shared_ptr<const GnsSpace> gns,
                                                    TimeGrid grid,
                                                    std::vector<MatrixAlgebra> algebras) {
    grid.validate();
    if (algebras.size() != grid.size())
        throw ValidationError("Filtration: one subalgebra required per grid point");
    const Tolerance tol = gns->tol();
    for (std::size_t i = 0; i + 1 < algebras.size(); ++i)
        for (const auto& b : algebras[i].basis())
            if (!algebras[i + 1].contains(b))
                throw ValidationError("Filtration: subalgebras not increasing at step " +
                                      std::to_string(i));
    if (!algebras.back().same_subspace_as(gns->algebra()))
        throw ValidationError("Filtration: terminal algebra must equal the ambient algebra");

    auto f = std::shared_ptr<Filtration>(
        new Filtration(std::move(gns), std::move(grid), std::move(algebras)));

    const Eigen::Index d = f->gns_->dim();
    for (std::size_t i = 0; i < f->grid_.size(); ++i) {
        const auto& alg = f->algebras_[i];
        CMatrix cols(d, alg.dim());
        for (Eigen::Index j = 0; j < alg.dim(); ++j)
            cols.col(j) = f->gns_->embed(alg.basis()[static_cast<std::size_t>(j)]);
        const CMatrix q = orthonormal_columns(cols, tol);
        if (q.cols() != alg.dim())
            throw ValidationError("Filtration: embedding not injective on subalgebra");
        f->proj_.push_back(q * q.adjoint());
    }

    for (std::size_t i = 0; i < f->grid_.size(); ++i) {
        ConditionalExpectation e(f->grid_.points[i], f->proj_[i], &f->algebras_[i],
                                 f->gns_.get());
        check_expectation_axioms(*f->gns_, e, f->algebras_[i], tol);
        f->expectations_.push_back(std::move(e));
    }
    return f;
}

const CMatrix& Filtration::hilbert_projection(double t) const {
    return proj_[grid_.index_of(t)];
}

const ConditionalExpectation& Filtration::conditional_expectation(double t) const {
    return expectations_[grid_.index_of(t)];
}

bool Filtration::check_tower(double s, double t) const {
    const std::size_t i = grid_.index_of(s);
    const std::size_t j = grid_.index_of(t);
    const CMatrix& es = proj_[i];
    const CMatrix& et = proj_[j];
    const CMatrix& emin = proj_[std::min(i, j)];
    const double lim = 10 * tol().eq_tol;
    return op_norm(et * es - emin) <= lim && op_norm(es * et - emin) <= lim;
}

} // namespace stoptime
