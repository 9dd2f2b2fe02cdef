#include "stoptime/stopping_time.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace stoptime {

void Partition::validate(std::size_t grid_size) const {
    if (indices.size() < 2)
        throw InvalidPartition("Partition: endpoints required");
    if (indices.front() != 0)
        throw InvalidPartition("Partition: must start at 0");
    for (std::size_t k = 1; k < indices.size(); ++k)
        if (!(indices[k] > indices[k - 1]))
            throw InvalidPartition("Partition: indices not strictly increasing");
    if (indices.back() >= grid_size)
        throw InvalidPartition("Partition: index beyond grid");
}

Partition Partition::finest(std::size_t horizon_index) {
    Partition theta;
    for (std::size_t i = 0; i <= horizon_index; ++i) theta.indices.push_back(i);
    return theta;
}

Partition Partition::coarsest(std::size_t horizon_index) {
    return Partition{{0, horizon_index}};
}

StoppingTime StoppingTime::build(std::shared_ptr<const Filtration> filtration,
                                 std::vector<CMatrix> q) {
    const auto& f = *filtration;
    const Tolerance tol = f.tol();
    if (q.size() != f.steps())
        throw ValidationError("StoppingTime: one projection required per grid point");
    const Eigen::Index n = f.gns().algebra().ambient_dim();
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i].rows() != n || q[i].cols() != n)
            throw ValidationError("StoppingTime: q dimension mismatch");
        try {
            validate_projection(q[i], tol);
        } catch (const NotProjection& e) {
            throw ValidationError("StoppingTime: q at index " + std::to_string(i) +
                                  " is not a projection (" + e.what() + ")");
        }
        if (!f.algebra_at(i).contains(q[i]))
            throw ValidationError("adaptedness violated: q at index " + std::to_string(i) +
                                  " not in its subalgebra");
    }
    if (op_norm(q.front()) > tol.eq_tol)
        throw ValidationError("q_0 = 0 violated");
    if (op_norm(q.back() - CMatrix::Identity(n, n)) > tol.eq_tol)
        throw ValidationError("terminal q must be the identity");
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(
            ((q[i + 1] - q[i]) + (q[i + 1] - q[i]).adjoint()) / 2.0);
        if (es.eigenvalues()(0) < -tol.rank_tol)
            throw ValidationError("q not increasing at index " + std::to_string(i + 1));
    }
    std::vector<CMatrix> q_op;
    q_op.reserve(q.size());
    for (const auto& qi : q) q_op.push_back(f.gns().left_mult(qi));
    return StoppingTime(std::move(filtration), std::move(q), std::move(q_op));
}

bool StoppingTime::deterministic() const {
    const Eigen::Index n = q_.front().rows();
    for (const auto& qi : q_) {
        const double nz = op_norm(qi);
        const double ni = op_norm(qi - CMatrix::Identity(n, n));
        const double t = tol().eq_tol;
        if (nz > t && ni > t) return false;
    }
    return true;
}

CMatrix meet(const std::vector<CMatrix>& projections, const Tolerance& tol) {
    if (projections.empty())
        throw InvalidPartition("meet: empty projection list");
    const Eigen::Index d = projections.front().rows();
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& p : projections) {
        require_projection(p, tol, "meet operand");
        sum += CMatrix::Identity(d, d) - p;
    }
    const CMatrix k = kernel_basis(sum, tol);
    return k * k.adjoint();
}

CMatrix join(const std::vector<CMatrix>& projections, const Tolerance& tol) {
    if (projections.empty())
        throw InvalidPartition("join: empty projection list");
    const Eigen::Index d = projections.front().rows();
    std::vector<CMatrix> complements;
    complements.reserve(projections.size());
    for (const auto& p : projections) {
        require_projection(p, tol, "join operand");
        complements.push_back(CMatrix::Identity(d, d) - p);
    }
    return CMatrix::Identity(d, d) - meet(complements, tol);
}

CMatrix partition_projection(const StoppingTime& st, const Partition& theta) {
    const auto& f = st.filtration();
    theta.validate(f.steps());
    const Eigen::Index d = f.gns().dim();
    CMatrix m = CMatrix::Zero(d, d);
    for (std::size_t k = 1; k < theta.indices.size(); ++k) {
        const std::size_t i = theta.indices[k];
        const std::size_t j = theta.indices[k - 1];
        m += (st.q_op(i) - st.q_op(j)) * f.hilbert_projection_at(i);
    }
    require_projection(m, st.tol(), "partition projection");
    return m;
}

CMatrix time_projection_net(const StoppingTime& st, std::size_t horizon_index) {
    const auto& f = st.filtration();
    if (horizon_index >= f.steps())
        throw UnknownTimePoint("time_projection_net: horizon beyond grid");
    if (horizon_index == 0)
        throw InvalidPartition("time_projection_net: horizon must be positive");
    // Maximal refinement chain: insert interior points one at a time and
    // check that the net decreases at each step.
    Partition theta = Partition::coarsest(horizon_index);
    CMatrix current = partition_projection(st, theta);
    for (std::size_t i = 1; i < horizon_index; ++i) {
        theta.indices.insert(theta.indices.end() - 1, i);
        std::sort(theta.indices.begin(), theta.indices.end());
        const CMatrix refined = partition_projection(st, theta);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(
            ((current - refined) + (current - refined).adjoint()) / 2.0);
        if (es.eigenvalues()(0) < -st.tol().rank_tol)
            throw MonotonicityViolation("time_projection_net: refinement increased the operator");
        current = refined;
    }
    return current;
}

namespace {

// Eq.-style operand q_u − q_t P_t^⊥ on the representation space.
CMatrix meet_operand(const StoppingTime& st, std::size_t u, std::size_t t) {
    const auto& f = st.filtration();
    const Eigen::Index d = f.gns().dim();
    const CMatrix pt_perp = CMatrix::Identity(d, d) - f.hilbert_projection_at(t);
    CMatrix op = st.q_op(u) - st.q_op(t) * pt_perp;
    try {
        require_projection(op, st.tol(), "meet operand");
    } catch (const NotProjection& e) {
        throw OperandNotProjection(e.what());
    }
    return op;
}

} // namespace

CMatrix time_projection_meet(const StoppingTime& st, std::size_t horizon_index) {
    const auto& f = st.filtration();
    if (horizon_index >= f.steps() || horizon_index == 0)
        throw UnknownTimePoint("time_projection_meet: bad horizon");
    std::vector<CMatrix> operands;
    for (std::size_t t = 0; t <= horizon_index; ++t)
        operands.push_back(meet_operand(st, horizon_index, t));
    return meet(operands, st.tol());
}

CMatrix time_projection_closed(const StoppingTime& st) {
    const auto& f = st.filtration();
    const std::size_t last = f.steps() - 1;
    const Eigen::Index d = f.gns().dim();
    const CMatrix id = CMatrix::Identity(d, d);
    std::vector<CMatrix> operands;
    for (std::size_t t = 0; t <= last; ++t) {
        CMatrix op = (id - st.q_op(t)) + st.q_op(t) * f.hilbert_projection_at(t);
        try {
            require_projection(op, st.tol(), "closed-form operand");
        } catch (const NotProjection& e) {
            throw OperandNotProjection(e.what());
        }
        operands.push_back(std::move(op));
    }
    return meet(operands, st.tol());
}

bool complement_identity(const StoppingTime& st, std::size_t horizon_index) {
    const auto& f = st.filtration();
    const Eigen::Index d = f.gns().dim();
    const CMatrix m = time_projection_meet(st, horizon_index);
    const CMatrix lhs = st.q_op(horizon_index) - m;
    std::vector<CMatrix> pieces;
    for (std::size_t t = 0; t <= horizon_index; ++t) {
        CMatrix qp = st.q_op(t) * (CMatrix::Identity(d, d) - f.hilbert_projection_at(t));
        require_projection(qp, st.tol(), "complement piece");
        pieces.push_back(std::move(qp));
    }
    return op_norm(lhs - join(pieces, st.tol())) <= 10 * st.tol().eq_tol;
}

std::pair<bool, bool> fixed_vector_check(const StoppingTime& st, std::size_t horizon_index,
                                         const CVector& xi) {
    const auto& f = st.filtration();
    const CMatrix m = time_projection_meet(st, horizon_index);
    const double scale = std::max(1.0, xi.norm());
    const double lim = st.tol().eq_tol * scale;
    const bool lhs = (m * xi - st.q_op(horizon_index) * xi).norm() <= lim;
    bool rhs = true;
    for (std::size_t t = 0; t <= horizon_index; ++t) {
        const CVector diff =
            st.q_op(t) * (f.hilbert_projection_at(t) * xi) - st.q_op(t) * xi;
        if (diff.norm() > lim) {
            rhs = false;
            break;
        }
    }
    return {lhs, rhs};
}

bool commutation_check(const StoppingTime& st, std::size_t s_index) {
    const auto& f = st.filtration();
    const CMatrix m = time_projection_meet(st, f.steps() - 1);
    const CMatrix& p = f.hilbert_projection_at(s_index);
    return op_norm(p * m - m * p) <= 10 * st.tol().eq_tol;
}

void MartingaleVec::validate(const Filtration& f) const {
    if (horizon_index >= f.steps() || values.size() != horizon_index + 1)
        throw NotAMartingale("MartingaleVec: value count does not match horizon");
    const Tolerance tol = f.tol();
    for (std::size_t t = 0; t <= horizon_index; ++t) {
        const double scale = std::max(1.0, values[t].norm());
        if ((f.hilbert_projection_at(t) * values[t] - values[t]).norm() > tol.eq_tol * scale)
            throw NotAMartingale("MartingaleVec: value at index " + std::to_string(t) +
                                 " escapes range(P_t)");
        for (std::size_t s = 0; s < t; ++s)
            if ((f.hilbert_projection_at(s) * values[t] - values[s]).norm() >
                tol.eq_tol * scale)
                throw NotAMartingale("MartingaleVec: martingale relation fails at (" +
                                     std::to_string(s) + "," + std::to_string(t) + ")");
    }
}

CVector stop_martingale(const StoppingTime& st, const MartingaleVec& xi,
                        std::size_t horizon_index) {
    const auto& f = st.filtration();
    xi.validate(f);
    if (horizon_index > xi.horizon_index)
        throw NotAMartingale("stop_martingale: martingale not defined up to the horizon");
    const CVector stopped = time_projection_net(st, horizon_index) * xi.values[horizon_index];
    // Direct partition sum on the finest grid must reproduce the same value.
    CVector direct = CVector::Zero(f.gns().dim());
    for (std::size_t i = 1; i <= horizon_index; ++i)
        direct += (st.q_op(i) - st.q_op(i - 1)) * xi.values[i];
    const double scale = std::max(1.0, xi.values[horizon_index].norm());
    if ((stopped - direct).norm() > st.tol().eq_tol * scale)
        throw GnsMismatch("stop_martingale: partition sum disagrees with the time projection");
    return stopped;
}

CVector stop_open_martingale(const StoppingTime& st, const MartingaleVec& xi) {
    const auto& f = st.filtration();
    xi.validate(f);
    const std::size_t last = f.steps() - 1;
    if (xi.horizon_index != last)
        throw NotAMartingale("stop_open_martingale: martingale must reach the terminal point");
    const CMatrix m = time_projection_meet(st, last);
    std::vector<CVector> eta;
    for (std::size_t t = 0; t <= last; ++t) eta.push_back(m * xi.values[t]);
    // (η(t)) must itself be a martingale.
    for (std::size_t t = 0; t <= last; ++t) {
        const double scale = std::max(1.0, eta[t].norm());
        for (std::size_t s = 0; s < t; ++s)
            if ((f.hilbert_projection_at(s) * eta[t] - eta[s]).norm() >
                10 * st.tol().eq_tol * scale)
                throw NotAMartingale("stop_open_martingale: stopped process not a martingale");
    }
    return eta[last];
}

} // namespace stoptime
