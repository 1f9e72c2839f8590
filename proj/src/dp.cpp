#include "ehsched/dp.hpp"

#include "ehsched/rng.hpp"

#include <cmath>

namespace ehs {

namespace {

/// E[V(min(b~+l,N_b), min(e~+e_H,N_e), h')] over the unknown dynamics.
prec_t expected_next(const ValueTable& v, int b_pds, int e_pds, int h, const ModelParams& p) {
    const auto& ph = p.channel_matrix[static_cast<std::size_t>(h)];
    prec_t acc = 0.0;
    for (int l = 0; l <= p.max_arrivals(); ++l) {
        const prec_t pl = p.arrival_dist[l];
        if (pl == 0.0) continue;
        const int b2 = std::min(b_pds + l, p.N_b);
        for (int eh = 0; eh <= p.max_harvest(); ++eh) {
            const prec_t pe = p.harvest_dist[eh];
            if (pe == 0.0) continue;
            const int e2 = std::min(e_pds + eh, p.N_e);
            prec_t inner = 0.0;
            for (int h2 = 0; h2 < p.N_h; ++h2)
                if (ph[h2] != 0.0) inner += ph[h2] * v(b2, e2, h2);
            acc += pl * pe * inner;
        }
    }
    return acc;
}

/// (H_PDS Vpds)(s~) computed against the current contents of vpds.
prec_t h_pds_entry(const ValueTable& vpds, int b_pds, int e_pds, int h, const ModelParams& p) {
    const auto& ph = p.channel_matrix[static_cast<std::size_t>(h)];
    const auto src = table_source(vpds);
    prec_t acc = 0.0;
    for (int l = 0; l <= p.max_arrivals(); ++l) {
        const prec_t pl = p.arrival_dist[l];
        if (pl == 0.0) continue;
        const int b2 = std::min(b_pds + l, p.N_b);
        for (int eh = 0; eh <= p.max_harvest(); ++eh) {
            const prec_t pe = p.harvest_dist[eh];
            if (pe == 0.0) continue;
            const int e2 = std::min(e_pds + eh, p.N_e);
            prec_t inner = 0.0;
            for (int h2 = 0; h2 < p.N_h; ++h2)
                if (ph[h2] != 0.0) inner += ph[h2] * lookahead_value(src, {b2, e2, h2}, p);
            acc += pl * pe * inner;
        }
    }
    return overflow_cost(b_pds, p) + p.gamma * acc;
}

prec_t bellman_entry(const ValueTable& v, const SystemState& s, const ModelParams& p) {
    prec_t best = q_value(v, s, Action::idle, p);
    if (feasible_actions(s.b, s.e, p).size() == 2)
        best = std::min(best, q_value(v, s, Action::transmit, p));
    return best;
}

template <typename EntryFn>
SolveResult iterate(const ModelParams& p, const SolverOptions& opts, ValueKind kind, EntryFn entry,
                    prec_t (*residual_fn)(const ValueTable&, const ModelParams&)) {
    p.validate();
    if (!(opts.tol > 0.0)) throw ContractError("solver tolerance must be positive");
    if (opts.max_iters < 1) throw ContractError("solver max_iters must be positive");

    SolveResult r;
    r.values = ValueTable(p, kind);
    ValueTable scratch = r.values;
    for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
        prec_t change = 0.0;
        if (opts.order == SweepOrder::gauss_seidel) {
            for (int b = 0; b <= p.N_b; ++b)
                for (int e = 0; e <= p.N_e; ++e)
                    for (int h = 0; h < p.N_h; ++h) {
                        const prec_t updated = entry(r.values, b, e, h);
                        change = std::max(change, std::abs(updated - r.values(b, e, h)));
                        r.values(b, e, h) = updated;
                    }
        } else {
            for (int b = 0; b <= p.N_b; ++b)
                for (int e = 0; e <= p.N_e; ++e)
                    for (int h = 0; h < p.N_h; ++h) scratch(b, e, h) = entry(r.values, b, e, h);
            change = sup_distance(scratch, r.values);
            std::swap(scratch, r.values);
        }
        r.sweeps = sweep;
        r.sweep_changes.push_back(change);
        if (change <= opts.tol) {
            r.residual = residual_fn(r.values, p);
            if (r.residual <= opts.tol) {
                r.status = SolveStatus::converged;
                return r;
            }
        }
    }
    r.residual = residual_fn(r.values, p);
    r.status = r.residual <= opts.tol ? SolveStatus::converged : SolveStatus::max_iters_reached;
    return r;
}

} // namespace

prec_t q_value(const ValueTable& v, const SystemState& s, Action a, const ModelParams& p) {
    const auto pf = goodput_dist(a, s.h, p);
    const int e_pds = s.e - as_int(a) * p.e_TX;
    prec_t future = 0.0;
    for (int f = 0; f <= 1; ++f)
        if (pf[f] != 0.0) future += pf[f] * expected_next(v, s.b - f, e_pds, s.h, p);
    return buffer_cost(s.b, s.h, a, p) + p.gamma * future;
}

ValueTable apply_bellman(const ValueTable& v, const ModelParams& p) {
    ValueTable out(p, ValueKind::state_value);
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h) out(b, e, h) = bellman_entry(v, {b, e, h}, p);
    return out;
}

ValueTable apply_h_pds(const ValueTable& vpds, const ModelParams& p) {
    ValueTable out(p, ValueKind::pds_value);
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h) out(b, e, h) = h_pds_entry(vpds, b, e, h, p);
    return out;
}

prec_t bellman_residual(const ValueTable& v, const ModelParams& p) {
    return sup_distance(apply_bellman(v, p), v);
}

prec_t pds_bellman_residual(const ValueTable& vpds, const ModelParams& p) {
    return sup_distance(apply_h_pds(vpds, p), vpds);
}

SolveResult value_iteration(const ModelParams& p, const SolverOptions& opts) {
    auto r = iterate(
        p, opts, ValueKind::state_value,
        [&p](const ValueTable& v, int b, int e, int h) { return bellman_entry(v, {b, e, h}, p); },
        &bellman_residual);
    r.policy = greedy_policy_from_v(r.values, p);
    return r;
}

SolveResult pds_value_iteration(const ModelParams& p, const SolverOptions& opts) {
    auto r = iterate(
        p, opts, ValueKind::pds_value,
        [&p](const ValueTable& v, int b, int e, int h) { return h_pds_entry(v, b, e, h, p); },
        &pds_bellman_residual);
    r.policy = greedy_policy_from_pds(r.values, p);
    return r;
}

ValueTable pds_from_v(const ValueTable& v, const ModelParams& p) {
    ValueTable out(p, ValueKind::pds_value);
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h)
                out(b, e, h) = overflow_cost(b, p) + p.gamma * expected_next(v, b, e, h, p);
    return out;
}

ValueTable v_from_pds(const ValueTable& vpds, const ModelParams& p) {
    ValueTable out(p, ValueKind::state_value);
    const auto src = table_source(vpds);
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h) out(b, e, h) = lookahead_value(src, {b, e, h}, p);
    return out;
}

Policy greedy_policy_from_v(const ValueTable& v, const ModelParams& p) {
    Policy pol(p);
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h) {
                if (feasible_actions(b, e, p).size() == 1) continue;
                const prec_t idle = q_value(v, {b, e, h}, Action::idle, p);
                const prec_t tx = q_value(v, {b, e, h}, Action::transmit, p);
                pol(b, e, h) = tx < idle ? Action::transmit : Action::idle;
            }
    return pol;
}

Policy greedy_policy_from_pds(const ValueTable& vpds, const ModelParams& p) {
    Policy pol(p);
    const auto src = table_source(vpds);
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h) pol(b, e, h) = greedy_action(src, {b, e, h}, p);
    return pol;
}

StructureReport check_structure(const ValueTable& v, prec_t slack) {
    StructureReport r;
    auto record = [&](prec_t violation, bool& flag, prec_t& worst) {
        worst = std::max(worst, violation);
        r.max_violation = std::max(r.max_violation, violation);
        if (violation > slack) flag = false;
    };
    for (int h = 0; h < v.N_h(); ++h)
        for (int e = 0; e <= v.N_e(); ++e)
            for (int b = 0; b <= v.N_b(); ++b) {
                if (b + 1 <= v.N_b())
                    record(v(b, e, h) - v(b + 1, e, h), r.monotone_b, r.worst_monotone_b);
                if (b >= 1 && b + 1 <= v.N_b())
                    record((v(b, e, h) - v(b - 1, e, h)) - (v(b + 1, e, h) - v(b, e, h)),
                           r.incr_diff_b, r.worst_incr_diff_b);
                if (e + 1 <= v.N_e())
                    record(v(b, e + 1, h) - v(b, e, h), r.monotone_e, r.worst_monotone_e);
                if (e >= 1 && e + 1 <= v.N_e())
                    record((v(b, e, h) - v(b, e - 1, h)) - (v(b, e + 1, h) - v(b, e, h)),
                           r.incr_diff_e, r.worst_incr_diff_e);
            }
    return r;
}

ContractionReport contraction_check(const ModelParams& p, const ValueTable& fixed_point, int trials,
                                    std::uint64_t seed) {
    if (trials < 1) throw ContractError("contraction_check: trials must be positive");
    ContractionReport r;
    const prec_t vmax = v_max(p);
    Rng rng(seed, StreamSalt::check);
    ValueTable draw(p, ValueKind::pds_value);
    for (int t = 0; t < trials; ++t) {
        for (auto& x : draw.data()) x = rng.uniform(0.0, vmax);
        const prec_t denom = sup_distance(draw, fixed_point);
        if (denom == 0.0) continue;
        const prec_t num = sup_distance(apply_h_pds(draw, p), fixed_point);
        r.max_ratio = std::max(r.max_ratio, num / denom);
        ++r.trials_used;
    }

    ValueTable shifted = fixed_point;
    const prec_t kappa = std::max(vmax, 1.0);
    for (auto& x : shifted.data()) x += kappa;
    r.shift_ratio = sup_distance(apply_h_pds(shifted, p), fixed_point) / sup_distance(shifted, fixed_point);
    return r;
}

ContractionReport contraction_check(const ModelParams& p, int trials, std::uint64_t seed) {
    SolverOptions opts;
    opts.tol = 1e-12;
    opts.max_iters = 100000;
    const auto solved = pds_value_iteration(p, opts);
    return contraction_check(p, solved.values, trials, seed);
}

prec_t FactoredModel::unknown_cost(const PostDecisionState& pds) const {
    prec_t c = 0.0;
    for (int l = 0; l <= p_.max_arrivals(); ++l)
        c += p_.arrival_dist[l] * std::max(pds.b + l - p_.N_b, 0);
    return p_.eta * c;
}

std::vector<PdsTransition> FactoredModel::known_kernel(const SystemState& s, Action a) const {
    std::vector<PdsTransition> out;
    const auto pf = goodput_dist(a, s.h, p_);
    const int e_pds = s.e - as_int(a) * p_.e_TX;
    // b~ = b - f, so P^f(b - b~ | a, h)
    for (int b_pds = s.b; b_pds >= std::max(s.b - 1, 0); --b_pds) {
        const prec_t prob = pf[s.b - b_pds];
        if (prob != 0.0) out.push_back({{b_pds, e_pds, s.h}, prob});
    }
    return out;
}

std::vector<Transition> FactoredModel::unknown_kernel(const PostDecisionState& pds) const {
    auto edge_mass = [](const ProbVec& dist, int from, int to, int cap) {
        const int k = to - from;
        if (k < 0) return 0.0;
        if (to < cap) return k < static_cast<int>(dist.size()) ? dist[k] : 0.0;
        prec_t tail = 0.0; // everything that lands at or beyond the cap
        for (std::size_t j = static_cast<std::size_t>(k); j < dist.size(); ++j) tail += dist[j];
        return tail;
    };
    std::vector<Transition> out;
    const auto& ph = p_.channel_matrix[static_cast<std::size_t>(pds.h)];
    for (int b2 = pds.b; b2 <= p_.N_b; ++b2) {
        const prec_t pb = edge_mass(p_.arrival_dist, pds.b, b2, p_.N_b);
        if (pb == 0.0) continue;
        for (int e2 = pds.e; e2 <= p_.N_e; ++e2) {
            const prec_t pe = edge_mass(p_.harvest_dist, pds.e, e2, p_.N_e);
            if (pe == 0.0) continue;
            for (int h2 = 0; h2 < p_.N_h; ++h2)
                if (ph[h2] != 0.0) out.push_back({{b2, e2, h2}, pb * pe * ph[h2]});
        }
    }
    return out;
}

} // namespace ehs
