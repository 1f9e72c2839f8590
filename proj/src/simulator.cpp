#include "ehsched/simulator.hpp"

#include <algorithm>

namespace ehs {

void SimConfig::validate(const ModelParams& p) const {
    if (horizon < 1) throw ContractError("horizon must be at least 1 slot");
    SystemState probe = initial_state;
    if (!fixed_initial_channel) probe.h = 0;
    if (!is_valid(p, probe)) throw ContractError("initial state " + to_string(initial_state) + " is out of range");
}

Environment::Environment(ModelParams p, std::uint64_t seed)
    : p_(std::move(p)), rng_(seed, StreamSalt::environment), stationary_(stationary_distribution(p_.channel_matrix)) {}

StepOutcome Environment::step(const SystemState& s, Action a) {
    if (!is_valid(p_, s)) throw ContractError("step: invalid state " + to_string(s));
    if (!is_feasible(s, a, p_))
        throw ContractError("step: action " + std::to_string(as_int(a)) + " infeasible in " + to_string(s));
    StepOutcome out;
    const double u = rng_.uniform01();
    out.f = (a == Action::transmit && u < 1.0 - p_.plr[static_cast<std::size_t>(s.h)]) ? 1 : 0;
    out.x.l = rng_.discrete(p_.arrival_dist);
    out.x.e_H = rng_.discrete(p_.harvest_dist);
    out.x.h_next = rng_.discrete(p_.channel_matrix[static_cast<std::size_t>(s.h)]);
    out.next = next_state(pds_of(s, a, out.f, p_), out.x, p_);
    out.overflow = std::max(s.b - out.f + out.x.l - p_.N_b, 0);
    return out;
}

int Environment::sample_initial_channel() { return rng_.discrete(stationary_); }

MetricsTrace run_episode(Controller& controller, const SimConfig& cfg, const ModelParams& p) {
    p.validate();
    cfg.validate(p);
    Environment env(p, cfg.seed);
    SystemState s = cfg.initial_state;
    if (!cfg.fixed_initial_channel) s.h = env.sample_initial_channel();

    MetricsTrace trace;
    const auto n = static_cast<std::size_t>(cfg.horizon);
    trace.avg_buffer.reserve(n);
    trace.avg_battery.reserve(n);
    trace.avg_cost.reserve(n);
    trace.cum_overflows.reserve(n);
    trace.updates.reserve(n);
    trace.grid_points.reserve(n);

    double sum_b = 0.0, sum_e = 0.0, sum_cost = 0.0;
    long overflows = 0;
    for (long slot = 0; slot < cfg.horizon; ++slot) {
        const Action a = controller.act(s);
        const StepOutcome o = env.step(s, a);

        SlotFeedback fb;
        fb.slot = slot;
        fb.state = s;
        fb.action = a;
        fb.f = o.f;
        fb.x = o.x;
        fb.next = o.next;
        fb.overflow = o.overflow;
        fb.cost = s.b + p.eta * o.overflow;
        controller.observe(fb);

        const double count = static_cast<double>(slot + 1);
        sum_b += s.b;
        sum_e += s.e;
        sum_cost += fb.cost;
        overflows += o.overflow;
        trace.avg_buffer.push_back(sum_b / count);
        trace.avg_battery.push_back(sum_e / count);
        trace.avg_cost.push_back(sum_cost / count);
        trace.cum_overflows.push_back(overflows);
        trace.updates.push_back(controller.updates_last_slot());
        trace.grid_points.push_back(controller.grid_points());
        trace.total_updates += controller.updates_last_slot();
        s = o.next;
    }
    trace.final_state = s;
    return trace;
}

} // namespace ehs
