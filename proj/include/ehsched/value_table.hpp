#pragma once

#include "ehsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ehs {

enum class ValueKind { state_value, pds_value };

/// Dense table of reals indexed by (b, e, h), used for both V and the
/// post-decision value function.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(const ModelParams& p, ValueKind kind, prec_t init = 0.0)
        : n_b_(p.N_b), n_e_(p.N_e), n_h_(p.N_h), kind_(kind), values_(p.num_states(), init) {}

    ValueKind kind() const { return kind_; }
    int N_b() const { return n_b_; }
    int N_e() const { return n_e_; }
    int N_h() const { return n_h_; }
    std::size_t size() const { return values_.size(); }

    std::size_t index(int b, int e, int h) const {
        return (static_cast<std::size_t>(b) * static_cast<std::size_t>(n_e_ + 1) +
                static_cast<std::size_t>(e)) *
                   static_cast<std::size_t>(n_h_) +
               static_cast<std::size_t>(h);
    }

    prec_t operator()(int b, int e, int h) const { return values_[index(b, e, h)]; }
    prec_t& operator()(int b, int e, int h) { return values_[index(b, e, h)]; }
    prec_t operator()(const PostDecisionState& s) const { return (*this)(s.b, s.e, s.h); }
    prec_t& operator()(const PostDecisionState& s) { return (*this)(s.b, s.e, s.h); }
    prec_t operator()(const SystemState& s) const { return (*this)(s.b, s.e, s.h); }

    std::vector<prec_t>& data() { return values_; }
    const std::vector<prec_t>& data() const { return values_; }

private:
    int n_b_ = 0;
    int n_e_ = 0;
    int n_h_ = 0;
    ValueKind kind_ = ValueKind::state_value;
    std::vector<prec_t> values_;
};

inline prec_t sup_distance(const ValueTable& a, const ValueTable& b) {
    prec_t d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

/// Deterministic policy, one action per (b, e, h).
class Policy {
public:
    Policy() = default;
    explicit Policy(const ModelParams& p) : params_(p), actions_(p.num_states(), Action::idle) {}

    Action operator()(int b, int e, int h) const { return actions_[state_index(params_, b, e, h)]; }
    Action& operator()(int b, int e, int h) { return actions_[state_index(params_, b, e, h)]; }
    Action operator()(const SystemState& s) const { return (*this)(s.b, s.e, s.h); }

    const std::vector<Action>& actions() const { return actions_; }

private:
    ModelParams params_;
    std::vector<Action> actions_;
};

} // namespace ehs
