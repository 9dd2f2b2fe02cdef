#ifndef STOPTIME_STOPPING_TIME_HPP
#define STOPTIME_STOPPING_TIME_HPP

#include <memory>
#include <utility>
#include <vector>

#include "stoptime/filtration.hpp"

namespace stoptime {

/// A sub-grid θ = {0 = t_0 < … < t_n = u}, given as indices into the
/// filtration grid; first index is 0, last is the horizon index.
struct Partition {
    std::vector<std::size_t> indices;

    void validate(std::size_t grid_size) const;
    static Partition finest(std::size_t horizon_index);
    static Partition coarsest(std::size_t horizon_index);
};

/// An increasing adapted family of projections q_t with q_0 = 0 and terminal
/// value 1.
class StoppingTime {
public:
    /// Validates every stopping-time invariant (projection gates, q_0 = 0,
    /// monotonicity, adaptedness, terminal identity).
    static StoppingTime build(std::shared_ptr<const Filtration> filtration,
                              std::vector<CMatrix> q);

    const Filtration& filtration() const { return *filt_; }
    const Tolerance& tol() const { return filt_->tol(); }
    std::size_t steps() const { return q_.size(); }
    const CMatrix& q(std::size_t i) const { return q_[i]; }
    /// Left multiplication by q_{t_i} on the representation space.
    const CMatrix& q_op(std::size_t i) const { return q_op_[i]; }

    bool deterministic() const;  // every q_t is 0 or 1

private:
    StoppingTime(std::shared_ptr<const Filtration> f, std::vector<CMatrix> q,
                 std::vector<CMatrix> q_op)
        : filt_(std::move(f)), q_(std::move(q)), q_op_(std::move(q_op)) {}

    std::shared_ptr<const Filtration> filt_;
    std::vector<CMatrix> q_;
    std::vector<CMatrix> q_op_;
};

/// Projection onto the intersection of the ranges, computed as the
/// projection onto ker(Σ (I − P_i)).
CMatrix meet(const std::vector<CMatrix>& projections, const Tolerance& tol = {});

/// Projection onto the closed span of the union of the ranges.
CMatrix join(const std::vector<CMatrix>& projections, const Tolerance& tol = {});

/// Σ (q_{t_i} − q_{t_{i-1}}) P_{t_i} over the partition; verified to be a
/// projection.
CMatrix partition_projection(const StoppingTime& st, const Partition& theta);

/// The refining-net value of the time projection at horizon u: the finest
/// partition attains the decreasing limit; monotone decrease is verified
/// along a maximal refinement chain.
CMatrix time_projection_net(const StoppingTime& st, std::size_t horizon_index);

/// Closed-form value: meet over t ≤ u of (q_u − q_t P_t^⊥), each operand
/// validated as a projection first.
CMatrix time_projection_meet(const StoppingTime& st, std::size_t horizon_index);

/// Closed-horizon form: meet over all t of (q_t^⊥ + q_t P_t).
CMatrix time_projection_closed(const StoppingTime& st);

/// ‖(q_u − M_τ(u)) − ∨{q_t P_t^⊥ : t ≤ u}‖ ≤ 10·eq_tol.
bool complement_identity(const StoppingTime& st, std::size_t horizon_index);

/// (M_τ(u)ξ = q_uξ, q_tP_tξ = q_tξ for all t ≤ u); the two booleans must
/// agree on every input.
std::pair<bool, bool> fixed_vector_check(const StoppingTime& st, std::size_t horizon_index,
                                         const CVector& xi);

/// ‖P_s M_τ − M_τ P_s‖ ≤ 10·eq_tol (closed horizon).
bool commutation_check(const StoppingTime& st, std::size_t s_index);

/// Vectors ξ(t) ∈ range(P_t) with P_sξ(t) = ξ(s) for s ≤ t, defined up to a
/// horizon index.
struct MartingaleVec {
    std::size_t horizon_index;
    std::vector<CVector> values;  // one per grid index ≤ horizon_index

    void validate(const Filtration& f) const;  // throws NotAMartingale
};

/// Stopped element ξ_τ(u) = M_τ(u)ξ(u); the direct partition sum on the
/// finest grid is computed as well and must agree.
CVector stop_martingale(const StoppingTime& st, const MartingaleVec& xi,
                        std::size_t horizon_index);

/// Closed-horizon stopping: η(t) = M_τ ξ(t) is verified to be a martingale
/// and η(t_N) is returned.
CVector stop_open_martingale(const StoppingTime& st, const MartingaleVec& xi);

} // namespace stoptime

#endif
