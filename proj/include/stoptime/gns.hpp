#ifndef STOPTIME_GNS_HPP
#define STOPTIME_GNS_HPP

#include <memory>

#include "stoptime/algebra.hpp"

namespace stoptime {

/// Density matrix ρ with full spectrum: ω(x) = trace(ρx) is then a faithful
/// state on the ambient matrices.
struct FaithfulState {
    CMatrix rho;

    static FaithfulState make(CMatrix rho, const Tolerance& tol = {});

    Complex value(const CMatrix& x) const { return (rho * x).trace(); }
};

/// The representation space built from (algebra, ω): coordinates are chosen
/// so that the inner product ⟨xΩ, yΩ⟩ = ω(x*y) becomes the standard one and
/// adjoints of left multiplications are literal conjugate transposes. Ω is
/// the image of the identity.
class GnsSpace {
public:
    static GnsSpace build(MatrixAlgebra algebra, FaithfulState state,
                          const Tolerance& tol = {});

    const MatrixAlgebra& algebra() const { return algebra_; }
    const FaithfulState& state() const { return state_; }
    const Tolerance& tol() const { return tol_; }
    Eigen::Index dim() const { return dim_; }

    /// Coordinates of Ω = 1Ω.
    const CVector& omega() const { return omega_vec_; }

    /// ω-orthonormal basis of the algebra; embed maps f_k to e_k.
    const std::vector<CMatrix>& onb() const { return onb_; }

    /// Coordinates of xΩ. Throws NotInAlgebra.
    CVector embed(const CMatrix& x) const;

    /// Inverse of embed: the unique algebra element whose embedding is v.
    CMatrix unembed(const CVector& v) const;

    /// The d×d matrix of left multiplication by a on coordinates.
    CMatrix left_mult(const CMatrix& a) const;

    /// ω(x) = trace(ρx).
    Complex state_value(const CMatrix& x) const;

private:
    GnsSpace(MatrixAlgebra algebra, FaithfulState state, Tolerance tol)
        : algebra_(std::move(algebra)), state_(std::move(state)), tol_(tol) {}

    MatrixAlgebra algebra_;
    FaithfulState state_;
    Tolerance tol_;
    Eigen::Index dim_ = 0;
    std::vector<CMatrix> onb_;
    CMatrix onb_mat_;      // n² × d, columns vec(onb_[k])
    CMatrix chol_factor_;  // maps HS coordinates to GNS coordinates
    CVector omega_vec_;
};

} // namespace stoptime

#endif
