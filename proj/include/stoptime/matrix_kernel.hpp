#ifndef STOPTIME_MATRIX_KERNEL_HPP
#define STOPTIME_MATRIX_KERNEL_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "stoptime/errors.hpp"

namespace stoptime {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Numerical thresholds used throughout: eq_tol for operator-norm equality
/// decisions, rank_tol for eigenvalue / numerical-rank cutoffs.
struct Tolerance {
    double eq_tol = 1e-9;
    double rank_tol = 1e-8;

    void validate() const {
        if (!(eq_tol > 0.0 && eq_tol < 1.0) || !(rank_tol > 0.0 && rank_tol < 1.0))
            throw ValidationError("Tolerance: eq_tol and rank_tol must lie in (0,1)");
    }
};

struct HermitianEig {
    RVector eigenvalues;   // ascending
    CMatrix eigenvectors;  // orthonormal columns
};

/// Largest singular value of M (0 for an empty matrix).
double op_norm(const CMatrix& m);

bool entries_finite(const CMatrix& m);

/// Eigendecomposition of a Hermitian matrix. Throws NotHermitian if the
/// anti-Hermitian part exceeds eq_tol, NoConvergence on solver failure.
HermitianEig eig_hermitian(const CMatrix& m, const Tolerance& tol = {});

/// Orthonormal columns spanning the numerical kernel of a PSD Hermitian
/// matrix (eigenvalues below rank_tol). Throws NotPSD if an eigenvalue
/// drops below -rank_tol.
CMatrix kernel_basis(const CMatrix& m, const Tolerance& tol = {});

/// ‖p² − p‖ and ‖p − p*‖, the two projection residuals.
std::pair<double, double> projection_residuals(const CMatrix& p);

/// Checks idempotence, self-adjointness and the {0,1} spectrum guard:
/// any eigenvalue inside (rank_tol, 1 − rank_tol) is a modeling bug, not
/// a rounding issue. Throws NotProjection.
void require_projection(const CMatrix& p, const Tolerance& tol = {},
                        const char* what = "matrix");

/// Hilbert-Schmidt inner product trace(x* y).
Complex hs_inner(const CMatrix& x, const CMatrix& y);

/// Column-major vectorization and its inverse.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product a ⊗ b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Deterministic column-pivoted orthonormalization: returns an orthonormal
/// basis of the column space of m, rank decided by rank_tol relative to the
/// largest column norm.
CMatrix orthonormal_columns(const CMatrix& m, const Tolerance& tol = {});

} // namespace stoptime

#endif
