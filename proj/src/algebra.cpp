#include "stoptime/algebra.hpp"

#include <Eigen/SVD>

namespace stoptime {

namespace {

// Orthonormalize a list of matrices under the Hilbert-Schmidt inner product
// via column-pivoted QR on their vectorizations.
std::vector<CMatrix> hs_orthonormalize(Eigen::Index n, const std::vector<CMatrix>& mats,
                                       const Tolerance& tol) {
    if (mats.empty()) return {};
    CMatrix cols(n * n, static_cast<Eigen::Index>(mats.size()));
    for (std::size_t j = 0; j < mats.size(); ++j)
        cols.col(static_cast<Eigen::Index>(j)) = vec(mats[j]);
    const CMatrix q = orthonormal_columns(cols, tol);
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(q.cols()));
    for (Eigen::Index j = 0; j < q.cols(); ++j) out.push_back(unvec(q.col(j), n, n));
    return out;
}

} // namespace

MatrixAlgebra::MatrixAlgebra(Eigen::Index n, std::vector<CMatrix> basis, Tolerance tol)
    : ambient_dim_(n), basis_(std::move(basis)), tol_(tol) {
    basis_mat_.resize(n * n, static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t j = 0; j < basis_.size(); ++j)
        basis_mat_.col(static_cast<Eigen::Index>(j)) = vec(basis_[j]);
}

MatrixAlgebra MatrixAlgebra::generate(Eigen::Index n, const std::vector<CMatrix>& generators,
                                      const Tolerance& tol) {
    for (const auto& g : generators)
        if (g.rows() != n || g.cols() != n)
            throw DimensionMismatch("generate_subalgebra: generator shape mismatch");

    std::vector<CMatrix> span = generators;
    span.push_back(CMatrix::Identity(n, n));
    std::vector<CMatrix> basis = hs_orthonormalize(n, span, tol);

    const Eigen::Index cap = 2 * n * n;
    for (Eigen::Index round = 0;; ++round) {
        if (round > cap)
            throw Error("generate_subalgebra: closure loop failed to stabilize");
        std::vector<CMatrix> candidates = basis;
        for (const auto& b : basis) candidates.push_back(b.adjoint());
        for (const auto& a : basis)
            for (const auto& b : basis) candidates.push_back(a * b);
        std::vector<CMatrix> next = hs_orthonormalize(n, candidates, tol);
        const bool stable = next.size() == basis.size();
        basis = std::move(next);
        if (stable) break;
    }
    MatrixAlgebra out(n, std::move(basis), tol);
    out.validate();
    return out;
}

MatrixAlgebra MatrixAlgebra::from_span(Eigen::Index n, const std::vector<CMatrix>& span,
                                       const Tolerance& tol) {
    for (const auto& g : span)
        if (g.rows() != n || g.cols() != n)
            throw DimensionMismatch("from_span: element shape mismatch");
    std::vector<CMatrix> with_id = span;
    with_id.push_back(CMatrix::Identity(n, n));
    MatrixAlgebra out(n, hs_orthonormalize(n, with_id, tol), tol);
    out.validate();
    return out;
}

MatrixAlgebra MatrixAlgebra::full(Eigen::Index n, const Tolerance& tol) {
    std::vector<CMatrix> units;
    units.reserve(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            CMatrix e = CMatrix::Zero(n, n);
            e(i, j) = 1.0;
            units.push_back(e);
        }
    return MatrixAlgebra(n, std::move(units), tol);
}

std::pair<CVector, double> MatrixAlgebra::hs_coords(const CMatrix& x) const {
    const CVector v = vec(x);
    const CVector c = basis_mat_.adjoint() * v;
    return {c, (v - basis_mat_ * c).norm()};
}

CMatrix MatrixAlgebra::project(const CMatrix& x) const {
    const CVector c = basis_mat_.adjoint() * vec(x);
    return unvec(basis_mat_ * c, ambient_dim_, ambient_dim_);
}

bool MatrixAlgebra::contains(const CMatrix& x) const {
    if (x.rows() != ambient_dim_ || x.cols() != ambient_dim_)
        throw DimensionMismatch("contains: ambient dimension mismatch");
    // Frobenius residual dominates the operator norm; fall back to the
    // operator norm only for borderline values.
    const auto [c, frob] = hs_coords(x);
    if (frob <= tol_.eq_tol) return true;
    return op_norm(x - unvec(basis_mat_ * c, ambient_dim_, ambient_dim_)) <= tol_.eq_tol;
}

MatrixAlgebra MatrixAlgebra::commutant() const {
    const Eigen::Index n = ambient_dim_;
    const Eigen::Index n2 = n * n;
    const Eigen::Index m = dim();
    // vec(yb − by) = (bᵀ ⊗ I − I ⊗ b) vec(y)
    CMatrix constraints(m * n2, n2);
    const CMatrix id = CMatrix::Identity(n, n);
    for (Eigen::Index k = 0; k < m; ++k) {
        const CMatrix& b = basis_[static_cast<std::size_t>(k)];
        constraints.middleRows(k * n2, n2) = kron(b.transpose(), id) - kron(id, b);
    }
    // JacobiSVD: BDCSVD miscomputes V for complex inputs in Eigen 3.4.0.
    Eigen::JacobiSVD<CMatrix> svd(constraints, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = tol_.rank_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    std::vector<CMatrix> kernel;
    for (Eigen::Index j = rank; j < svd.matrixV().cols(); ++j)
        kernel.push_back(unvec(svd.matrixV().col(j), n, n));
    // Kernel vectors are HS-orthonormal already; re-span for a deterministic
    // pivot order.
    MatrixAlgebra out(n, hs_orthonormalize(n, kernel, tol_), tol_);
    out.validate();
    return out;
}

bool MatrixAlgebra::same_subspace_as(const MatrixAlgebra& other) const {
    if (ambient_dim_ != other.ambient_dim_ || dim() != other.dim()) return false;
    for (const auto& b : basis_)
        if (!other.contains(b)) return false;
    for (const auto& b : other.basis_)
        if (!contains(b)) return false;
    return true;
}

void MatrixAlgebra::validate() const {
    tol_.validate();
    const Eigen::Index n = ambient_dim_;
    const Eigen::Index d = dim();
    if (!basis_mat_.allFinite())
        throw ValidationError("MatrixAlgebra: non-finite basis entry");
    const double lim = 1e3 * tol_.eq_tol;
    if ((basis_mat_.adjoint() * basis_mat_ - CMatrix::Identity(d, d)).norm() > lim)
        throw ValidationError("MatrixAlgebra: basis not HS-orthonormal");

    const auto span_residual = [&](const CMatrix& cols) {
        return (cols - basis_mat_ * (basis_mat_.adjoint() * cols)).colwise().norm().maxCoeff();
    };
    if (span_residual(vec(CMatrix::Identity(n, n))) > lim)
        throw ValidationError("MatrixAlgebra: identity not in span");
    CMatrix adjoints(n * n, d);
    for (Eigen::Index j = 0; j < d; ++j)
        adjoints.col(j) = vec(basis_[static_cast<std::size_t>(j)].adjoint());
    if (span_residual(adjoints) > lim)
        throw ValidationError("MatrixAlgebra: not *-closed");
    CMatrix products(n * n, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            products.col(i * d + j) =
                vec(basis_[static_cast<std::size_t>(i)] * basis_[static_cast<std::size_t>(j)]);
    if (d > 0 && span_residual(products) > lim)
        throw ValidationError("MatrixAlgebra: not multiplicatively closed");
}

ProjectionElement validate_projection(const CMatrix& p, const Tolerance& tol) {
    require_projection(p, tol, "projection");
    return ProjectionElement{p};
}

} // namespace stoptime
