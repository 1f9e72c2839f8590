#pragma once

// Exact offline solvers for the scheduling MDP and numerical verifiers of the
// structural claims about its post-decision value function.

#include "ehsched/model.hpp"
#include "ehsched/value_table.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace ehs {

// ---------------------------------------------------------------------------
// Greedy action selection against a post-decision value source.
// A source is any callable prec_t(int b, int e, int h).
// ---------------------------------------------------------------------------

/// b + sum_f P^f(f|a,h) * Vpds(b - f, e - a*e_TX, h)
template <typename PdsSource>
prec_t pds_action_score(const PdsSource& pds_value, int b, int e, int h, Action a,
                        const ModelParams& p) {
    const auto pf = goodput_dist(a, h, p);
    const int e_after = e - as_int(a) * p.e_TX;
    prec_t score = static_cast<prec_t>(b);
    if (pf[0] != 0.0) score += pf[0] * pds_value(b, e_after, h);
    if (pf[1] != 0.0) score += pf[1] * pds_value(b - 1, e_after, h);
    return score;
}

/// Greedy action; transmits only when that is strictly better than idling.
template <typename PdsSource>
Action greedy_action(const PdsSource& pds_value, const SystemState& s, const ModelParams& p) {
    const auto actions = feasible_actions(s.b, s.e, p);
    if (actions.size() == 1) return Action::idle;
    const prec_t idle = pds_action_score(pds_value, s.b, s.e, s.h, Action::idle, p);
    const prec_t tx = pds_action_score(pds_value, s.b, s.e, s.h, Action::transmit, p);
    return tx < idle ? Action::transmit : Action::idle;
}

/// min over feasible actions of pds_action_score: the state value implied by
/// a post-decision value source.
template <typename PdsSource>
prec_t lookahead_value(const PdsSource& pds_value, const SystemState& s, const ModelParams& p) {
    prec_t best = pds_action_score(pds_value, s.b, s.e, s.h, Action::idle, p);
    if (feasible_actions(s.b, s.e, p).size() == 2)
        best = std::min(best, pds_action_score(pds_value, s.b, s.e, s.h, Action::transmit, p));
    return best;
}

inline auto table_source(const ValueTable& t) {
    return [&t](int b, int e, int h) { return t(b, e, h); };
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

enum class SweepOrder { gauss_seidel, jacobi };

struct SolverOptions {
    prec_t tol = 1e-8;
    int max_iters = 5000;
    SweepOrder order = SweepOrder::gauss_seidel;
};

enum class SolveStatus { converged, max_iters_reached };

struct SolveResult {
    ValueTable values;
    Policy policy;          ///< greedy w.r.t. values (state-value solve only)
    prec_t residual = 0.0;  ///< sup-norm Bellman residual of the returned values
    int sweeps = 0;
    SolveStatus status = SolveStatus::max_iters_reached;
    std::vector<prec_t> sweep_changes; ///< sup-norm change made by each sweep

    bool converged() const { return status == SolveStatus::converged; }
};

/// Q(s,a) = c(s,a) + gamma * sum_{s'} P(s'|s,a) V(s')
prec_t q_value(const ValueTable& v, const SystemState& s, Action a, const ModelParams& p);

/// One Jacobi application of the state-value Bellman operator.
ValueTable apply_bellman(const ValueTable& v, const ModelParams& p);

/// One Jacobi application of the post-decision Bellman operator H_PDS.
ValueTable apply_h_pds(const ValueTable& vpds, const ModelParams& p);

prec_t bellman_residual(const ValueTable& v, const ModelParams& p);
prec_t pds_bellman_residual(const ValueTable& vpds, const ModelParams& p);

/// Value iteration on V. Stops once the Bellman residual is <= tol.
SolveResult value_iteration(const ModelParams& p, const SolverOptions& opts = {});

/// Value iteration with H_PDS on the post-decision value function.
SolveResult pds_value_iteration(const ModelParams& p, const SolverOptions& opts = {});

/// Vpds(s~) = c_u(s~) + gamma * E[V(next state)]
ValueTable pds_from_v(const ValueTable& v, const ModelParams& p);

/// V(s) = min_a { b + sum_f P^f(f|a,h) Vpds(b-f, e-a*e_TX, h) }
ValueTable v_from_pds(const ValueTable& vpds, const ModelParams& p);

Policy greedy_policy_from_v(const ValueTable& v, const ModelParams& p);
Policy greedy_policy_from_pds(const ValueTable& vpds, const ModelParams& p);

// ---------------------------------------------------------------------------
// Structure and contraction verifiers
// ---------------------------------------------------------------------------

struct StructureReport {
    bool monotone_b = true;   ///< non-decreasing in b
    bool incr_diff_b = true;  ///< increasing differences in b
    bool monotone_e = true;   ///< non-increasing in e
    bool incr_diff_e = true;  ///< increasing differences in e
    /// Worst signed slack across all four checks: > 0 means some inequality
    /// is violated by that much.
    prec_t max_violation = -std::numeric_limits<prec_t>::infinity();
    prec_t worst_monotone_b = -std::numeric_limits<prec_t>::infinity();
    prec_t worst_incr_diff_b = -std::numeric_limits<prec_t>::infinity();
    prec_t worst_monotone_e = -std::numeric_limits<prec_t>::infinity();
    prec_t worst_incr_diff_e = -std::numeric_limits<prec_t>::infinity();

    bool all() const { return monotone_b && incr_diff_b && monotone_e && incr_diff_e; }
};

StructureReport check_structure(const ValueTable& vpds, prec_t slack = 1e-9);

struct ContractionReport {
    prec_t max_ratio = 0.0;   ///< max ||H V - V*|| / ||V - V*|| over random draws
    prec_t shift_ratio = 0.0; ///< the same ratio for V = V* + kappa
    int trials_used = 0;      ///< draws with V != V*
};

/// Random draws uniform on [0, V_max] per entry; fixed_point must be the
/// solved post-decision value function.
ContractionReport contraction_check(const ModelParams& p, const ValueTable& fixed_point, int trials,
                                    std::uint64_t seed);

/// Solves for the fixed point first (tol 1e-12), then runs the draws.
ContractionReport contraction_check(const ModelParams& p, int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Known/unknown factorisation of costs and kernels.
// ---------------------------------------------------------------------------

struct PdsTransition {
    PostDecisionState pds;
    prec_t prob = 0.0;
};

class FactoredModel {
public:
    explicit FactoredModel(ModelParams p) : p_(std::move(p)) {}

    /// c_k(s,a) = b
    prec_t known_cost(const SystemState& s, Action) const { return static_cast<prec_t>(s.b); }
    /// c_u(s~): expected overflow penalty given the post-decision buffer.
    prec_t unknown_cost(const PostDecisionState& pds) const;
    /// P_k(s~|s,a)
    std::vector<PdsTransition> known_kernel(const SystemState& s, Action a) const;
    /// P_u(s'|s~), using tail sums for the clipped edges b'=N_b and e'=N_e.
    std::vector<Transition> unknown_kernel(const PostDecisionState& pds) const;

    const ModelParams& params() const { return p_; }

private:
    ModelParams p_;
};

inline FactoredModel factored_components(const ModelParams& p) { return FactoredModel(p); }

} // namespace ehs
