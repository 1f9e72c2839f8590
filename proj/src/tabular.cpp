#include "ehsched/tabular.hpp"

namespace ehs {

void LearnerConfig::validate() const {
    if (period < 1) throw ContractError("update period must be at least 1");
}

PdsLearner::PdsLearner(ModelParams p, LearnerConfig cfg)
    : p_(std::move(p)), cfg_(std::move(cfg)), vmax_(v_max(p_)), table_(p_, ValueKind::pds_value) {
    p_.validate();
    cfg_.validate();
}

Action PdsLearner::act(const SystemState& s) { return greedy_action(table_source(table_), s, p_); }

void PdsLearner::observe(const SlotFeedback& fb) {
    const auto pds = pds_of(fb.state, fb.action, fb.f, p_);
    const prec_t updated = update_pdsv(table_source(table_), pds, fb.x, cfg_.beta(slot_), p_);
    table_(pds) = cfg_.clamp ? clamp_value(updated, vmax_) : updated;
    updates_ = 1;
    ++slot_;
}

VirtualExperienceLearner::VirtualExperienceLearner(ModelParams p, LearnerConfig cfg)
    : p_(std::move(p)), cfg_(std::move(cfg)), vmax_(v_max(p_)), table_(p_, ValueKind::pds_value),
      scratch_(static_cast<std::size_t>((p_.N_b + 1) * (p_.N_e + 1))) {
    p_.validate();
    cfg_.validate();
}

Action VirtualExperienceLearner::act(const SystemState& s) {
    return greedy_action(table_source(table_), s, p_);
}

std::size_t VirtualExperienceLearner::sweep(int h, const ExperienceTuple& x, prec_t beta) {
    // Every new value is computed from the pre-sweep table, then written.
    const auto src = table_source(table_);
    std::size_t k = 0;
    for (int b = 0; b <= p_.N_b; ++b)
        for (int e = 0; e <= p_.N_e; ++e) scratch_[k++] = update_pdsv(src, {b, e, h}, x, beta, p_);
    k = 0;
    for (int b = 0; b <= p_.N_b; ++b)
        for (int e = 0; e <= p_.N_e; ++e, ++k)
            table_(b, e, h) = cfg_.clamp ? clamp_value(scratch_[k], vmax_) : scratch_[k];
    ++sweeps_;
    return k;
}

void VirtualExperienceLearner::observe(const SlotFeedback& fb) {
    updates_ = 0;
    if (slot_ % cfg_.period == 0) updates_ = sweep(fb.state.h, fb.x, cfg_.beta(slot_));
    ++slot_;
}

Action QTable::best_action(const SystemState& s) const {
    if (feasible_actions(s.b, s.e, p_).size() == 1) return Action::idle;
    return (*this)(s, Action::transmit) < (*this)(s, Action::idle) ? Action::transmit : Action::idle;
}

prec_t QTable::min_value(const SystemState& s) const { return (*this)(s, best_action(s)); }

QLearner::QLearner(ModelParams p, LearnerConfig cfg)
    : p_(std::move(p)), cfg_(std::move(cfg)), vmax_(v_max(p_)), q_(p_, cfg_.q_init),
      explore_(cfg_.seed, StreamSalt::exploration) {
    p_.validate();
    cfg_.validate();
}

Action QLearner::act(const SystemState& s) {
    const auto actions = feasible_actions(s.b, s.e, p_);
    if (explore_.uniform01() < cfg_.epsilon(slot_)) {
        const auto pick = static_cast<int>(explore_.uniform01() * actions.size());
        return actions.items[static_cast<std::size_t>(std::min(pick, actions.size() - 1))];
    }
    return q_.best_action(s);
}

void QLearner::observe(const SlotFeedback& fb) {
    const prec_t beta = cfg_.beta(slot_);
    const prec_t target = fb.cost + p_.gamma * q_.min_value(fb.next);
    prec_t& entry = q_(fb.state, fb.action);
    entry = (1.0 - beta) * entry + beta * target;
    if (cfg_.clamp) entry = clamp_value(entry, vmax_);
    updates_ = 1;
    ++slot_;
}

} // namespace ehs
