#include "ehsched/simulator.hpp"
#include "test_models.hpp"

#include <doctest.h>

using namespace ehs;
using ehs::testing::deterministic_model;

namespace {

class IdleController : public Controller {
public:
    Action act(const SystemState&) override { return Action::idle; }
};

/// Transmits whenever allowed and records what it was told.
class GreedyRecorder : public Controller {
public:
    explicit GreedyRecorder(const ModelParams& p) : p_(p) {}
    Action act(const SystemState& s) override {
        return feasible_actions(s.b, s.e, p_).size() == 2 ? Action::transmit : Action::idle;
    }
    void observe(const SlotFeedback& fb) override { seen.push_back(fb); }
    std::vector<SlotFeedback> seen;

private:
    ModelParams p_;
};

double chi_square(const std::vector<long>& counts, const ProbVec& probs, long n) {
    double chi = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] == 0.0) {
            CHECK(counts[i] == 0);
            continue;
        }
        const double expected = probs[i] * static_cast<double>(n);
        chi += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    return chi;
}

} // namespace

TEST_CASE("step on a deterministic sub-model") {
    Environment env(deterministic_model(8, 8), 1);
    const auto o = env.step({3, 2, 0}, Action::transmit);
    CHECK(o.next == SystemState{2, 1, 0});
    CHECK(o.f == 1);
    CHECK(o.overflow == 0);
    CHECK(o.x == ExperienceTuple{0, 0, 0});
}

TEST_CASE("step counts an overflow when a full buffer receives a packet") {
    Environment env(deterministic_model(4, 4, 1, 0), 1);
    const auto o = env.step({4, 0, 0}, Action::idle);
    CHECK(o.overflow == 1);
    CHECK(o.next.b == 4);
}

TEST_CASE("step rejects infeasible actions") {
    Environment env(default_params(), 1);
    CHECK_THROWS_AS(env.step({0, 3, 0}, Action::transmit), ContractError);
    CHECK_THROWS_AS(env.step({3, 0, 0}, Action::transmit), ContractError);
}

TEST_CASE("goodput frequency matches 1 - q") {
    auto p = deterministic_model(8, 8);
    p.plr = {0.2};
    Environment env(p, 12345);
    long served = 0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) served += env.step({3, 2, 0}, Action::transmit).f;
    CHECK(static_cast<double>(served) / n == doctest::Approx(0.8).epsilon(0.0125));
}

TEST_CASE("sampled arrivals, harvests and channel moves follow their distributions") {
    auto p = scaled_params(8, 8, 4);
    p.arrival_dist = {0.5, 0.3, 0.2};
    p.harvest_dist = {0.1, 0.6, 0.3};
    p.channel_matrix = {{0.1, 0.2, 0.3, 0.4}, {0.25, 0.25, 0.25, 0.25}, {0.7, 0.1, 0.1, 0.1}, {0.0, 0.0, 0.5, 0.5}};
    Environment env(p, 777);
    const long n = 100000;
    std::vector<long> l(3), eh(3);
    std::vector<std::vector<long>> moves(4, std::vector<long>(4));
    std::vector<long> from(4);
    for (long i = 0; i < n; ++i) {
        const int h = static_cast<int>(i % 4);
        const auto o = env.step({4, 4, h}, Action::idle);
        ++l[o.x.l];
        ++eh[o.x.e_H];
        ++moves[h][o.x.h_next];
        ++from[h];
    }
    // chi-square 99.9% quantiles: 13.82 (2 dof), 16.27 (3 dof)
    CHECK(chi_square(l, p.arrival_dist, n) < 13.82);
    CHECK(chi_square(eh, p.harvest_dist, n) < 13.82);
    for (int h = 0; h < 4; ++h) CHECK(chi_square(moves[h], p.channel_matrix[h], from[h]) < 16.27);
}

TEST_CASE("an idle controller lets the buffer and battery saturate") {
    const auto p = default_params(); // Bern(0.4) arrivals, Bern(0.7) harvest
    IdleController idle;
    SimConfig cfg;
    cfg.horizon = 10000;
    cfg.seed = 3;
    const auto trace = run_episode(idle, cfg, p);
    REQUIRE(trace.size() == 10000);
    // Fill time is about N_b / p slots; the running mean loses at most twice the
    // triangle N_b * (N_b / p) / 2 out of N_b * horizon.
    CHECK(trace.avg_buffer.back() >= p.N_b - 2.0 * p.N_b / 0.4 / 2.0 / 10000.0 * p.N_b);
    CHECK(trace.avg_battery.back() >= p.N_e - 2.0 * p.N_e / 0.7 / 2.0 / 10000.0 * p.N_e);
    CHECK(trace.final_state.b == p.N_b);
    CHECK(trace.final_state.e == p.N_e);
    CHECK(trace.cum_overflows.back() > 0);
}

TEST_CASE("episode traces are a pure function of the seed") {
    const auto p = scaled_params(8, 8, 3);
    SimConfig cfg;
    cfg.horizon = 3000;
    cfg.seed = 42;
    GreedyRecorder a(p), b(p), c(p);
    const auto ta = run_episode(a, cfg, p);
    const auto tb = run_episode(b, cfg, p);
    cfg.seed = 43;
    const auto tc = run_episode(c, cfg, p);
    CHECK(ta.avg_buffer == tb.avg_buffer);
    CHECK(ta.avg_battery == tb.avg_battery);
    CHECK(ta.cum_overflows == tb.cum_overflows);
    CHECK(ta.avg_buffer != tc.avg_buffer);
}

TEST_CASE("overflow accounting and metric invariants hold slot by slot") {
    auto p = scaled_params(4, 4, 2, 0.7, 0.3);
    SimConfig cfg;
    cfg.horizon = 5000;
    GreedyRecorder rec(p);
    const auto trace = run_episode(rec, cfg, p);
    long cum = 0;
    for (std::size_t i = 0; i < rec.seen.size(); ++i) {
        const auto& fb = rec.seen[i];
        CHECK(fb.overflow == std::max(fb.state.b - fb.f + fb.x.l - p.N_b, 0));
        CHECK(fb.cost == doctest::Approx(fb.state.b + p.eta * fb.overflow));
        if (i + 1 < rec.seen.size()) CHECK(rec.seen[i + 1].state == fb.next);
        cum += fb.overflow;
        CHECK(trace.cum_overflows[i] == cum);
        CHECK(trace.avg_buffer[i] >= 0.0);
        CHECK(trace.avg_buffer[i] <= p.N_b);
        CHECK(trace.avg_battery[i] <= p.N_e);
    }
    CHECK(cum > 0);
}

TEST_CASE("initial state and channel handling") {
    const auto p = scaled_params(8, 8, 3);
    SimConfig cfg;
    cfg.horizon = 1;
    cfg.initial_state = {2, 5, 1};
    cfg.fixed_initial_channel = true;
    GreedyRecorder rec(p);
    run_episode(rec, cfg, p);
    CHECK(rec.seen.front().state == SystemState{2, 5, 1});

    cfg.horizon = 0;
    CHECK_THROWS_AS(run_episode(rec, cfg, p), ContractError);
    cfg.horizon = 1;
    cfg.initial_state = {9, 0, 0};
    CHECK_THROWS_AS(run_episode(rec, cfg, p), ContractError);
}
