#include "ehsched/harness.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace ehs {

namespace {

class Reporter {
public:
    explicit Reporter(std::ostream& os) : os_(os) {}

    void line(const char* status, const std::string& name, const std::string& detail) {
        os_ << status << "  " << name;
        if (!detail.empty()) os_ << "  (" << detail << ")";
        os_ << '\n';
    }
    void check(bool ok, const std::string& name, const std::string& detail) {
        line(ok ? "PASS" : "FAIL", name, detail);
        ok_ = ok_ && ok;
    }
    bool ok() const { return ok_; }

private:
    std::ostream& os_;
    bool ok_ = true;
};

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

/// Max over sampled (s, a) of |P(s'|s,a) - sum_pds P_k(pds|s,a) P_u(s'|pds)|.
double factorization_gap(const ModelParams& p, int samples) {
    const FactoredModel fm(p);
    Rng rng(17, StreamSalt::check);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const SystemState s{static_cast<int>(rng.next() % static_cast<std::uint64_t>(p.N_b + 1)),
                            static_cast<int>(rng.next() % static_cast<std::uint64_t>(p.N_e + 1)),
                            static_cast<int>(rng.next() % static_cast<std::uint64_t>(p.N_h))};
        for (Action a : feasible_actions(s.b, s.e, p)) {
            std::map<std::size_t, double> direct, composed;
            for (const auto& t : full_kernel(s, a, p))
                direct[state_index(p, t.next.b, t.next.e, t.next.h)] += t.prob;
            for (const auto& k : fm.known_kernel(s, a))
                for (const auto& u : fm.unknown_kernel(k.pds))
                    composed[state_index(p, u.next.b, u.next.e, u.next.h)] += k.prob * u.prob;
            for (const auto& [idx, pr] : direct) worst = std::max(worst, std::abs(pr - composed[idx]));
            for (const auto& [idx, pr] : composed) worst = std::max(worst, std::abs(pr - direct[idx]));
        }
    }
    return worst;
}

} // namespace

bool run_checks(const ExperimentSpec& spec, std::ostream& os) {
    const ModelParams& p = spec.model;
    Reporter r(os);

    const auto v = value_iteration(p, spec.solver);
    r.check(v.converged() && v.residual <= spec.solver.tol, "value iteration converges",
            fmt("residual %.3g after %.0f sweeps", v.residual, v.sweeps));

    const auto vp = pds_value_iteration(p, spec.solver);
    r.check(vp.converged(), "post-decision value iteration converges",
            fmt("residual %.3g after %.0f sweeps", vp.residual, vp.sweeps));

    const double gap = sup_distance(pds_from_v(v.values, p), vp.values);
    const double allowed = 2.0 * spec.solver.tol / (1.0 - p.gamma);
    r.check(gap <= allowed, "V* and V~* agree through the post-decision map", fmt("gap %.3g <= %.3g", gap, allowed));

    const double vmax = v_max(p);
    double lo = 0.0, hi = 0.0;
    for (double x : vp.values.data()) lo = std::min(lo, x), hi = std::max(hi, x);
    r.check(lo >= 0.0 && hi <= vmax, "V~* lies in [0, V_max]", fmt("max %.6g, V_max %.6g", hi, vmax));

    const auto st = check_structure(vp.values, 1e-9);
    r.check(st.monotone_b, "V~* non-decreasing in b", fmt("worst %.3g", st.worst_monotone_b));
    r.check(st.monotone_e, "V~* non-increasing in e", fmt("worst %.3g", st.worst_monotone_e));
    r.check(st.incr_diff_e, "V~* increasing differences in e", fmt("worst %.3g", st.worst_incr_diff_e));
    if (st.incr_diff_b)
        r.line("PASS", "V~* increasing differences in b", fmt("worst %.3g", st.worst_incr_diff_b));
    else
        r.line("WARN", "V~* increasing differences in b", fmt("worst %.3g; finite buffer edge", st.worst_incr_diff_b));

    const auto c = contraction_check(p, 20, 5); // re-solves the fixed point to 1e-12
    r.check(c.max_ratio <= p.gamma + 1e-9, "H_PDS contracts with modulus gamma",
            fmt("max ratio %.12g, gamma %.12g", c.max_ratio, p.gamma));
    r.check(std::abs(c.shift_ratio - p.gamma) <= 1e-12, "constant shift contracts by exactly gamma",
            fmt("ratio %.15g", c.shift_ratio));

    const double fg = factorization_gap(p, 200);
    r.check(fg <= 1e-10, "kernel factors into known and unknown parts", fmt("max gap %.3g", fg));

    // Planes through affine vertex data reproduce it everywhere.
    {
        ChannelGrid g = ChannelGrid::new_root({0, std::max(p.N_b, 1), 0, std::max(p.N_e, 1)}, std::max(p.N_b, 1),
                                              std::max(p.N_e, 1));
        Rng rng(3, StreamSalt::check);
        for (int i = 0; i < 30; ++i) {
            std::vector<int> open;
            for (int id : g.tree.leaves())
                if (g.tree.node(id).bb.subdividable()) open.push_back(id);
            if (open.empty()) break;
            subdivide(g, open[rng.next() % open.size()]);
        }
        const auto affine = [](int b, int e) { return 2.5 + 1.25 * b - 0.75 * e; };
        for (const auto& vtx : g.store.vertices()) g.store.set(vtx.b, vtx.e, affine(vtx.b, vtx.e));
        double worst = 0.0;
        for (int b = 0; b <= g.store.n_b(); ++b)
            for (int e = 0; e <= g.store.n_e(); ++e)
                worst = std::max(worst, std::abs(approximate_pdsv(g, b, e) - affine(b, e)));
        r.check(worst <= 1e-9, "piecewise planar approximation reproduces affine data", fmt("max error %.3g", worst));
    }

    {
        SimConfig sim = spec.sim;
        sim.horizon = std::min<long>(sim.horizon, 2000);
        PdsLearner a(p, spec.learner), b(p, spec.learner);
        const auto ta = run_episode(a, sim, p);
        const auto tb = run_episode(b, sim, p);
        const bool same = ta.avg_buffer == tb.avg_buffer && ta.cum_overflows == tb.cum_overflows &&
                          a.values().data() == b.values().data();
        r.check(same, "episodes are reproducible from the seed", "");
    }
    return r.ok();
}

} // namespace ehs
