#include "stoptime/gns.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace stoptime {

FaithfulState FaithfulState::make(CMatrix rho, const Tolerance& tol) {
    if (rho.rows() != rho.cols())
        throw DimensionMismatch("FaithfulState: rho not square");
    if (!entries_finite(rho))
        throw ValidationError("FaithfulState: non-finite entries");
    if (op_norm(rho - rho.adjoint()) > tol.eq_tol)
        throw NotHermitian("FaithfulState: rho not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0)) > tol.eq_tol)
        throw StateNotNormalized("FaithfulState: trace(rho) != 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es((rho + rho.adjoint()) / 2.0);
    if (es.eigenvalues()(0) <= tol.rank_tol)
        throw NotFaithful("FaithfulState: eigenvalue " + std::to_string(es.eigenvalues()(0)) +
                          " below faithfulness threshold");
    return FaithfulState{std::move(rho)};
}

GnsSpace GnsSpace::build(MatrixAlgebra algebra, FaithfulState state, const Tolerance& tol) {
    if (state.rho.rows() != algebra.ambient_dim())
        throw DimensionMismatch("build_gns: state dimension mismatch");
    GnsSpace g(std::move(algebra), std::move(state), tol);
    const auto& basis = g.algebra_.basis();
    const Eigen::Index d = g.algebra_.dim();
    g.dim_ = d;

    // Gram matrix of the HS-orthonormal basis under ⟨x,y⟩_ω = ω(x*y).
    CMatrix gram(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            gram(i, j) = g.state_.value(basis[static_cast<std::size_t>(i)].adjoint() *
                                        basis[static_cast<std::size_t>(j)]);
    gram = ((gram + gram.adjoint()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    if (es.eigenvalues()(0) <= tol.rank_tol)
        throw NotFaithful("build_gns: state not faithful on the algebra (Gram eigenvalue " +
                          std::to_string(es.eigenvalues()(0)) + ")");

    // Triangular re-orthonormalization: f = b·(L*)⁻¹ gives an ω-ONB,
    // and GNS coordinates of Σ c_j b_j are L*·c.
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NoConvergence("build_gns: Cholesky factorization failed");
    const CMatrix lstar = llt.matrixL().adjoint();
    g.chol_factor_ = lstar;
    const CMatrix c = lstar.inverse();
    const Eigen::Index n = g.algebra_.ambient_dim();
    g.onb_mat_ = g.algebra_.basis_mat() * c;
    g.onb_.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) g.onb_.push_back(unvec(g.onb_mat_.col(k), n, n));
    g.omega_vec_ = g.embed(CMatrix::Identity(g.algebra_.ambient_dim(), g.algebra_.ambient_dim()));
    if (std::abs(g.omega_vec_.squaredNorm() - 1.0) > 1e2 * tol.eq_tol)
        throw ValidationError("build_gns: ⟨Ω,Ω⟩ != 1");
    return g;
}

CVector GnsSpace::embed(const CMatrix& x) const {
    const auto [c, residual] = algebra_.hs_coords(x);
    if (residual > tol_.eq_tol * std::max(1.0, vec(x).norm()))
        throw NotInAlgebra("embed: element not in the algebra");
    return chol_factor_ * c;
}

CMatrix GnsSpace::unembed(const CVector& v) const {
    if (v.size() != dim_)
        throw DimensionMismatch("unembed: coordinate size mismatch");
    return unvec(onb_mat_ * v, algebra_.ambient_dim(), algebra_.ambient_dim());
}

CMatrix GnsSpace::left_mult(const CMatrix& a) const {
    if (!algebra_.contains(a))
        throw NotInAlgebra("left_mult: element not in the algebra");
    CMatrix l(dim_, dim_);
    for (Eigen::Index k = 0; k < dim_; ++k)
        l.col(k) = embed(a * onb_[static_cast<std::size_t>(k)]);
    return l;
}

Complex GnsSpace::state_value(const CMatrix& x) const {
    if (!algebra_.contains(x))
        throw NotInAlgebra("state_value: element not in the algebra");
    return state_.value(x);
}

} // namespace stoptime
