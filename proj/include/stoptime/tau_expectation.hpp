#ifndef STOPTIME_TAU_EXPECTATION_HPP
#define STOPTIME_TAU_EXPECTATION_HPP

#include <optional>
#include <string>

#include "stoptime/stopping_time.hpp"

namespace stoptime {

/// {x ∈ A : xq_t = q_tx for every relevant t}; a *-subalgebra of A.
struct TauCommutant {
    MatrixAlgebra algebra;
    std::optional<std::size_t> horizon_index;  // empty = all grid points
};

/// {x ∈ A : xq_t = q_tx ∈ A_t}; per-partition variants restrict the
/// constraints to the partition points.
struct TauAlgebra {
    MatrixAlgebra algebra;
    Partition partition;
};

struct CheckResult {
    std::string name;
    bool pass;
    double residual;
    double tolerance;
};

struct CheckReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Joint kernel of x ↦ xq_t − q_tx over the algebra, orthonormalized.
TauCommutant compute_b_tau(const StoppingTime& st,
                           std::optional<std::size_t> horizon_index = std::nullopt);

/// Subspace of B_τ cut down by the membership conditions q_t x ∈ A_t at the
/// partition points (finest partition when none given).
TauAlgebra compute_a_tau(const StoppingTime& st,
                         std::optional<Partition> theta = std::nullopt);

/// The three algebraic forms of the partition expectation, which must agree
/// for x in the commutant of the stopping time.
struct PartitionExpectationForms {
    CMatrix left;    // Σ (q_i − q_{i-1}) E_i x
    CMatrix inside;  // Σ E_i((q_i − q_{i-1}) x)
    CMatrix right;   // Σ (E_i x)(q_i − q_{i-1})
};

PartitionExpectationForms partition_expectation_forms(const StoppingTime& st,
                                                      const Partition& theta,
                                                      const CMatrix& x);

/// Σ (q_{t_i} − q_{t_{i-1}}) E_{t_i} x; throws NotInBTau when x does not
/// commute with the stopping time, Error when the three forms disagree.
CMatrix partition_expectation(const StoppingTime& st, const Partition& theta,
                              const CMatrix& x);

/// Finest-partition value of the stopped expectation; asserts the
/// representation-space identity (E_τ x)Ω = M_τ(xΩ) and the absorption law
/// along a refinement chain.
CMatrix tau_expectation_limit(const StoppingTime& st, const CMatrix& x);

/// Full axiom report for the stopped conditional expectation on a closed
/// horizon: linearity, unitality, positivity, idempotence, range, state
/// invariance, faithfulness, norm one.
CheckReport verify_tau_expectation(const StoppingTime& st);

/// Finite-horizon variant: the map x ↦ pullback of M_τ(u)(xΩ) on B_τ(u) is
/// a conditional expectation onto the compression q_u A_τ(u) q_u.
CheckReport finite_horizon_expectation(const StoppingTime& st, std::size_t horizon_index);

} // namespace stoptime

#endif
