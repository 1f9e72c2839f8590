#pragma once

// Online learners over full tables: PDS learning, virtual experience learning
// and an epsilon-greedy Q-learning baseline.

#include "ehsched/dp.hpp"
#include "ehsched/rng.hpp"
#include "ehsched/schedule.hpp"
#include "ehsched/simulator.hpp"

#include <cstdint>

namespace ehs {

struct LearnerConfig {
    Schedule beta = Schedule::harmonic(5000.0);
    Schedule epsilon = Schedule::exponential(0.9999, 0.05); ///< Q-learning only
    int period = 1;          ///< virtual experience sweep period T
    prec_t q_init = 0.0;     ///< Q-table initial value
    bool clamp = true;       ///< clamp written values to [0, V_max]
    std::uint64_t seed = 1;  ///< exploration stream (Q-learning)

    void validate() const;
};

/// eta * max(b~ + l - N_b, 0) + gamma * V(b', e', h'), with V the greedy
/// one-step lookahead against the post-decision value source.
template <typename PdsSource>
prec_t pds_sample_target(const PdsSource& src, const PostDecisionState& pds, const ExperienceTuple& x,
                         const ModelParams& p) {
    const SystemState next = next_state(pds, x, p);
    return p.eta * std::max(pds.b + x.l - p.N_b, 0) + p.gamma * lookahead_value(src, next, p);
}

/// (1 - beta) * V~(pds) + beta * sample target.
template <typename PdsSource>
prec_t update_pdsv(const PdsSource& src, const PostDecisionState& pds, const ExperienceTuple& x, prec_t beta,
                   const ModelParams& p) {
    return (1.0 - beta) * src(pds.b, pds.e, pds.h) + beta * pds_sample_target(src, pds, x, p);
}

inline prec_t clamp_value(prec_t v, prec_t vmax) { return std::clamp(v, 0.0, vmax); }

/// Greedy control on a tabular post-decision value function; one entry
/// updated per slot.
class PdsLearner : public Controller {
public:
    PdsLearner(ModelParams p, LearnerConfig cfg);

    Action act(const SystemState& s) override;
    void observe(const SlotFeedback& fb) override;
    std::size_t updates_last_slot() const override { return updates_; }

    const ValueTable& values() const { return table_; }
    ValueTable& values() { return table_; }
    long slot() const { return slot_; }

private:
    ModelParams p_;
    LearnerConfig cfg_;
    prec_t vmax_;
    ValueTable table_;
    long slot_ = 0;
    std::size_t updates_ = 0;
};

/// Every `period` slots, applies the observed experience to every (b~, e~)
/// at the current channel.
class VirtualExperienceLearner : public Controller {
public:
    VirtualExperienceLearner(ModelParams p, LearnerConfig cfg);

    Action act(const SystemState& s) override;
    void observe(const SlotFeedback& fb) override;
    std::size_t updates_last_slot() const override { return updates_; }

    /// Applies one virtual-experience sweep at channel h with step beta.
    std::size_t sweep(int h, const ExperienceTuple& x, prec_t beta);

    const ValueTable& values() const { return table_; }
    ValueTable& values() { return table_; }
    long slot() const { return slot_; }
    long sweeps() const { return sweeps_; }

private:
    ModelParams p_;
    LearnerConfig cfg_;
    prec_t vmax_;
    ValueTable table_;
    std::vector<prec_t> scratch_;
    long slot_ = 0;
    long sweeps_ = 0;
    std::size_t updates_ = 0;
};

/// Q(s, a) table, indexed (b, e, h, a).
class QTable {
public:
    QTable() = default;
    QTable(const ModelParams& p, prec_t init) : p_(p), values_(p.num_states() * 2, init) {}

    prec_t operator()(const SystemState& s, Action a) const { return values_[index(s, a)]; }
    prec_t& operator()(const SystemState& s, Action a) { return values_[index(s, a)]; }

    /// min over feasible actions; ties go to idle.
    Action best_action(const SystemState& s) const;
    prec_t min_value(const SystemState& s) const;

private:
    std::size_t index(const SystemState& s, Action a) const {
        return state_index(p_, s.b, s.e, s.h) * 2 + static_cast<std::size_t>(as_int(a));
    }
    ModelParams p_;
    std::vector<prec_t> values_;
};

class QLearner : public Controller {
public:
    QLearner(ModelParams p, LearnerConfig cfg);

    Action act(const SystemState& s) override;
    void observe(const SlotFeedback& fb) override;
    std::size_t updates_last_slot() const override { return updates_; }

    const QTable& q() const { return q_; }
    QTable& q() { return q_; }
    long slot() const { return slot_; }

private:
    ModelParams p_;
    LearnerConfig cfg_;
    prec_t vmax_;
    QTable q_;
    Rng explore_;
    long slot_ = 0;
    std::size_t updates_ = 0;
};

} // namespace ehs
