#ifndef STOPTIME_ALGEBRA_HPP
#define STOPTIME_ALGEBRA_HPP

#include <vector>

#include "stoptime/matrix_kernel.hpp"

namespace stoptime {

/// A unital *-closed subalgebra of the n×n complex matrices, represented by
/// an explicit basis orthonormal under the Hilbert-Schmidt inner product.
class MatrixAlgebra {
public:
    /// Smallest unital *-algebra containing the generators. The closure loop
    /// adjoins adjoints and pairwise products and re-spans until the
    /// dimension stabilizes (capped at 2n² rounds).
    static MatrixAlgebra generate(Eigen::Index ambient_dim,
                                  const std::vector<CMatrix>& generators,
                                  const Tolerance& tol = {});

    /// Wraps a spanning set that is already known to span a unital *-closed
    /// multiplicatively closed subspace; orthonormalizes and verifies the
    /// algebra invariants.
    static MatrixAlgebra from_span(Eigen::Index ambient_dim,
                                   const std::vector<CMatrix>& span,
                                   const Tolerance& tol = {});

    /// Full matrix algebra M_n.
    static MatrixAlgebra full(Eigen::Index ambient_dim, const Tolerance& tol = {});

    Eigen::Index ambient_dim() const { return ambient_dim_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
    const std::vector<CMatrix>& basis() const { return basis_; }
    /// Stacked vectorized basis, one column per basis element.
    const CMatrix& basis_mat() const { return basis_mat_; }
    const Tolerance& tol() const { return tol_; }

    /// Hilbert-Schmidt coordinates of x with respect to the basis, plus the
    /// Frobenius residual of the projection.
    std::pair<CVector, double> hs_coords(const CMatrix& x) const;

    /// Hilbert-Schmidt-orthogonal projection of x onto span(basis).
    CMatrix project(const CMatrix& x) const;

    /// true iff ‖x − Π(x)‖ ≤ eq_tol in operator norm.
    bool contains(const CMatrix& x) const;

    /// {y : yb = by for every basis element b}, computed as the joint kernel
    /// of the maps y ↦ yb − by over the ambient matrix space.
    MatrixAlgebra commutant() const;

    /// Subspace equality with another algebra in the same ambient space.
    bool same_subspace_as(const MatrixAlgebra& other) const;

    /// Checks the representation invariants (identity in span, *-closure,
    /// multiplicative closure, orthonormality). Throws ValidationError.
    void validate() const;

private:
    MatrixAlgebra(Eigen::Index n, std::vector<CMatrix> basis, Tolerance tol);

    Eigen::Index ambient_dim_;
    std::vector<CMatrix> basis_;
    CMatrix basis_mat_;  // n² × dim, columns vec(basis[j])
    Tolerance tol_;
};

/// A validated projection: idempotent, self-adjoint, spectrum in {0,1}.
struct ProjectionElement {
    CMatrix p;
};

/// Gate every stopping-time value must pass. Throws NotProjection with the
/// violated residual reported.
ProjectionElement validate_projection(const CMatrix& p, const Tolerance& tol = {});

} // namespace stoptime

#endif
