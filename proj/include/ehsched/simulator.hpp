#pragma once

// Seeded simulator of the scheduling environment and the episode driver.
//
// Per slot the environment consumes exactly four uniforms from its stream,
// in this order: goodput f (drawn even when idle), data arrivals l, energy
// arrivals e_H, next channel h'. The optional initial channel draw happens
// once, before slot 0.

#include "ehsched/model.hpp"
#include "ehsched/rng.hpp"
#include "ehsched/value_table.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ehs {

struct SimConfig {
    std::uint64_t seed = 1;
    long horizon = 50000;
    SystemState initial_state{0, 0, 0};
    /// When unset, h^0 is drawn from the stationary distribution of P^h and
    /// initial_state.h is ignored.
    bool fixed_initial_channel = false;

    void validate(const ModelParams& p) const;
};

struct StepOutcome {
    SystemState next;
    ExperienceTuple x;
    int f = 0;
    int overflow = 0; ///< packets dropped: max(b - f + l - N_b, 0)
};

class Environment {
public:
    Environment(ModelParams p, std::uint64_t seed);

    /// Advances one slot. Throws ContractError for an infeasible action.
    StepOutcome step(const SystemState& s, Action a);

    int sample_initial_channel();

    const ModelParams& params() const { return p_; }

private:
    ModelParams p_;
    Rng rng_;
    ProbVec stationary_;
};

/// Everything a controller learns about one slot.
struct SlotFeedback {
    long slot = 0;
    SystemState state;
    Action action = Action::idle;
    int f = 0;
    ExperienceTuple x;
    SystemState next;
    int overflow = 0;
    prec_t cost = 0.0; ///< realized b + eta * overflow
};

/// Decision maker driven by run_episode. Learners override observe().
class Controller {
public:
    virtual ~Controller() = default;
    virtual Action act(const SystemState& s) = 0;
    virtual void observe(const SlotFeedback&) {}
    /// Value entries written during the most recent observe().
    virtual std::size_t updates_last_slot() const { return 0; }
    /// Total stored grid points (0 for tabular controllers).
    virtual std::size_t grid_points() const { return 0; }
};

class PolicyController : public Controller {
public:
    explicit PolicyController(Policy policy) : policy_(std::move(policy)) {}
    Action act(const SystemState& s) override { return policy_(s); }

private:
    Policy policy_;
};

class FunctionController : public Controller {
public:
    explicit FunctionController(std::function<Action(const SystemState&)> fn) : fn_(std::move(fn)) {}
    Action act(const SystemState& s) override { return fn_(s); }

private:
    std::function<Action(const SystemState&)> fn_;
};

/// Per-slot running means from slot 0 and cumulative counters.
struct MetricsTrace {
    std::vector<double> avg_buffer;
    std::vector<double> avg_battery;
    std::vector<double> avg_cost;
    std::vector<long> cum_overflows;
    std::vector<std::size_t> updates;
    std::vector<std::size_t> grid_points;
    std::size_t total_updates = 0;
    SystemState final_state;

    std::size_t size() const { return avg_buffer.size(); }
};

MetricsTrace run_episode(Controller& controller, const SimConfig& cfg, const ModelParams& p);

} // namespace ehs
