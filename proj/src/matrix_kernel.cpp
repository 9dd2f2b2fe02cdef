#include "stoptime/matrix_kernel.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace stoptime {

double op_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

bool entries_finite(const CMatrix& m) {
    return m.allFinite();
}

HermitianEig eig_hermitian(const CMatrix& m, const Tolerance& tol) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("eig_hermitian: matrix not square");
    const double herm_res = op_norm(m - m.adjoint());
    if (herm_res > tol.eq_tol)
        throw NotHermitian("eig_hermitian: ‖M − M*‖ = " + std::to_string(herm_res));
    Eigen::SelfAdjointEigenSolver<CMatrix> solver((m + m.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success)
        throw NoConvergence("eig_hermitian: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix kernel_basis(const CMatrix& m, const Tolerance& tol) {
    const auto eig = eig_hermitian(m, tol);
    if (eig.eigenvalues.size() > 0 && eig.eigenvalues(0) < -tol.rank_tol)
        throw NotPSD("kernel_basis: eigenvalue " + std::to_string(eig.eigenvalues(0)));
    Eigen::Index k = 0;
    while (k < eig.eigenvalues.size() && eig.eigenvalues(k) < tol.rank_tol) ++k;
    return eig.eigenvectors.leftCols(k);
}

std::pair<double, double> projection_residuals(const CMatrix& p) {
    return {op_norm(p * p - p), op_norm(p - p.adjoint())};
}

void require_projection(const CMatrix& p, const Tolerance& tol, const char* what) {
    if (p.rows() != p.cols())
        throw NotProjection(std::string(what) + ": not square");
    const auto [idem, herm] = projection_residuals(p);
    if (herm > tol.eq_tol)
        throw NotProjection(std::string(what) + ": ‖p − p*‖ = " + std::to_string(herm));
    if (idem > tol.eq_tol)
        throw NotProjection(std::string(what) + ": ‖p² − p‖ = " + std::to_string(idem));
    // Spectrum guard: a projection has eigenvalues in {0,1}.
    const auto eig = eig_hermitian((p + p.adjoint()) / 2.0, tol);
    for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
        const double lam = eig.eigenvalues(i);
        if (lam > tol.rank_tol && lam < 1.0 - tol.rank_tol)
            throw NotProjection(std::string(what) + ": eigenvalue " + std::to_string(lam) +
                                " far from {0,1}");
    }
}

Complex hs_inner(const CMatrix& x, const CMatrix& y) {
    return (x.adjoint() * y).trace();
}

CVector vec(const CMatrix& m) {
    return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix orthonormal_columns(const CMatrix& m, const Tolerance& tol) {
    if (m.cols() == 0) return CMatrix(m.rows(), 0);
    Eigen::ColPivHouseholderQR<CMatrix> qr;
    qr.setThreshold(tol.rank_tol);
    qr.compute(m);
    const Eigen::Index rank = qr.rank();
    CMatrix q = qr.householderQ() * CMatrix::Identity(m.rows(), rank);
    return q;
}

} // namespace stoptime
