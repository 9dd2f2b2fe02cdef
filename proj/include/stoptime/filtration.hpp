#ifndef STOPTIME_FILTRATION_HPP
#define STOPTIME_FILTRATION_HPP

#include <memory>
#include <vector>

#include "stoptime/gns.hpp"

namespace stoptime {

/// Strictly increasing finite time grid starting at 0. The last point plays
/// the role of the horizon u, or of +infinity when the horizon is closed.
struct TimeGrid {
    std::vector<double> points;

    void validate() const;
    std::size_t index_of(double t) const;  // throws UnknownTimePoint
    std::size_t size() const { return points.size(); }
    double terminal() const { return points.back(); }
};

/// ω-preserving conditional expectation onto A_t, realized by pulling the
/// Hilbert-space projection P_t back through the embedding.
class ConditionalExpectation {
public:
    double time() const { return t_; }
    /// P_t acting on algebra coordinates (GNS coordinates).
    const CMatrix& map_matrix() const { return map_; }
    const MatrixAlgebra& target() const { return *target_; }

    CMatrix apply(const CMatrix& x) const;

private:
    friend class Filtration;
    ConditionalExpectation(double t, CMatrix map, const MatrixAlgebra* target,
                           const GnsSpace* gns)
        : t_(t), map_(std::move(map)), target_(target), gns_(gns) {}

    double t_;
    CMatrix map_;
    const MatrixAlgebra* target_;
    const GnsSpace* gns_;
};

/// An increasing family of subalgebras over a time grid, with the projections
/// P_t onto closure(A_t Ω) and the conditional expectations E_t.
class Filtration {
public:
    /// Validates monotonicity of the algebra chain and that the terminal
    /// algebra is the ambient one; precomputes every P_t and E_t. Throws
    /// ExpectationDoesNotExist if some pulled-back E_t fails the
    /// conditional-expectation axioms.
    static std::shared_ptr<const Filtration> build(std::shared_ptr<const GnsSpace> gns,
                                                   TimeGrid grid,
                                                   std::vector<MatrixAlgebra> algebras);

    const GnsSpace& gns() const { return *gns_; }
    const TimeGrid& grid() const { return grid_; }
    const Tolerance& tol() const { return gns_->tol(); }
    const MatrixAlgebra& algebra_at(std::size_t i) const { return algebras_[i]; }
    std::size_t steps() const { return grid_.size(); }

    /// Orthogonal projection onto span{xΩ : x ∈ A_t} in GNS coordinates.
    const CMatrix& hilbert_projection(double t) const;
    const CMatrix& hilbert_projection_at(std::size_t i) const { return proj_[i]; }

    const ConditionalExpectation& conditional_expectation(double t) const;
    const ConditionalExpectation& conditional_expectation_at(std::size_t i) const {
        return expectations_[i];
    }

    /// ‖E_tE_s − E_{s∧t}‖ ≤ 10·eq_tol and symmetrically.
    bool check_tower(double s, double t) const;

private:
    Filtration(std::shared_ptr<const GnsSpace> gns, TimeGrid grid,
               std::vector<MatrixAlgebra> algebras)
        : gns_(std::move(gns)), grid_(std::move(grid)), algebras_(std::move(algebras)) {}

    std::shared_ptr<const GnsSpace> gns_;
    TimeGrid grid_;
    std::vector<MatrixAlgebra> algebras_;
    std::vector<CMatrix> proj_;
    std::vector<ConditionalExpectation> expectations_;
};

} // namespace stoptime

#endif
