#include "ehsched/model.hpp"
#include "test_models.hpp"

#include <doctest.h>

#include <map>
#include <numeric>

using namespace ehs;
using ehs::testing::deterministic_model;
using ehs::testing::random_model;

namespace {

ModelParams single_channel(int n_b, int n_e, double q, double arrival_p, double harvest_p) {
    ModelParams p = deterministic_model(n_b, n_e);
    p.plr = {q};
    p.arrival_dist = bernoulli(arrival_p);
    p.harvest_dist = bernoulli(harvest_p);
    return p;
}

double total(const ProbVec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

TEST_CASE("default parameters are valid and match the reference setup") {
    const auto p = default_params();
    CHECK_NOTHROW(p.validate());
    CHECK(p.N_b == 32);
    CHECK(p.N_e == 32);
    CHECK(p.N_h == 8);
    CHECK(p.num_states() == 8712);
    CHECK(p.plr.front() == doctest::Approx(0.8));
    CHECK(p.plr.back() == doctest::Approx(0.1));
    CHECK(p.harvest_dist[1] == doctest::Approx(0.7));
    CHECK(p.gamma == 0.98);
    CHECK(p.eta == 50.0);
    // birth-death channel: stay 0.5, reflecting ends
    CHECK(p.channel_matrix[0][0] == doctest::Approx(0.75));
    CHECK(p.channel_matrix[3][2] == doctest::Approx(0.25));
    CHECK(p.channel_matrix[3][3] == doctest::Approx(0.5));
}

TEST_CASE("validation rejects broken models") {
    auto p = default_params();
    SUBCASE("gamma = 1") { p.gamma = 1.0; }
    SUBCASE("plr increasing") { std::reverse(p.plr.begin(), p.plr.end()); }
    SUBCASE("plr flat") { p.plr[3] = p.plr[2]; }
    SUBCASE("distribution off by 1e-9") { p.arrival_dist = {0.6, 0.4 + 1e-9}; }
    SUBCASE("negative probability") { p.harvest_dist = {1.1, -0.1}; }
    SUBCASE("e_TX above N_e") { p.e_TX = 33; }
    SUBCASE("negative eta") { p.eta = -1.0; }
    SUBCASE("channel row") { p.channel_matrix[2][2] += 0.01; }
    CHECK_THROWS_AS(p.validate(), ContractError);
}

TEST_CASE("feasible_actions") {
    const auto p = default_params(); // e_TX = 1
    CHECK(feasible_actions(0, 5, p).size() == 1);
    CHECK(feasible_actions(3, 0, p).size() == 1);
    const auto both = feasible_actions(3, 2, p);
    CHECK(both.size() == 2);
    CHECK(both.contains(Action::transmit));
    CHECK(*both.begin() == Action::idle);
}

TEST_CASE("goodput_dist") {
    auto p = default_params();
    for (int h = 0; h < p.N_h; ++h) {
        const auto idle = goodput_dist(Action::idle, h, p);
        CHECK(idle[0] == 1.0);
        CHECK(idle[1] == 0.0);
    }
    const auto best = goodput_dist(Action::transmit, 7, p);   // q = 0.1
    CHECK(best[0] == doctest::Approx(0.1));
    CHECK(best[1] == doctest::Approx(0.9));
    const auto worst = goodput_dist(Action::transmit, 0, p);  // q = 0.8
    CHECK(worst[0] == doctest::Approx(0.8));
    CHECK(worst[1] == doctest::Approx(0.2));
}

TEST_CASE("pds_of") {
    auto p = default_params();
    CHECK(pds_of({5, 3, 2}, Action::transmit, 1, p) == PostDecisionState{4, 2, 2});
    CHECK(pds_of({5, 3, 2}, Action::idle, 0, p) == PostDecisionState{5, 3, 2});
    p.e_TX = 2;
    CHECK(pds_of({1, 2, 0}, Action::transmit, 0, p) == PostDecisionState{1, 0, 0});

    CHECK_THROWS_AS(pds_of({0, 5, 0}, Action::transmit, 0, p), ContractError);
    CHECK_THROWS_AS(pds_of({3, 1, 0}, Action::transmit, 1, p), ContractError);
    CHECK_THROWS_AS(pds_of({3, 3, 0}, Action::idle, 1, p), ContractError);
}

TEST_CASE("next_state clips at the buffer and battery capacity") {
    const auto p = default_params();
    CHECK(next_state({4, 2, 0}, {1, 1, 3}, p) == SystemState{5, 3, 3});
    CHECK(next_state({32, 2, 5}, {1, 0, 0}, p) == SystemState{32, 2, 0});
    CHECK(next_state({0, 32, 5}, {0, 1, 1}, p) == SystemState{0, 32, 1});
}

TEST_CASE("buffer_cost") {
    const auto p = default_params();
    CHECK(buffer_cost(2, 0, Action::idle, p) == 2.0);
    CHECK(buffer_cost(2, 3, Action::transmit, p) == 2.0);

    // enumerate l in {0,1} with f = 0: 2 + 0.5 * 50 * 1
    auto tight = single_channel(2, 2, 0.0, 0.5, 0.5);
    CHECK(buffer_cost(2, 0, Action::idle, tight) == doctest::Approx(27.0));
    // q = 0 serves surely, max(2 - 1 + 1 - 2, 0) = 0
    CHECK(buffer_cost(2, 0, Action::transmit, tight) == doctest::Approx(2.0));
}

TEST_CASE("buffer_kernel") {
    auto p = single_channel(4, 4, 0.5, 0.4, 0.7);
    auto k = buffer_kernel(0, 0, Action::idle, p);
    CHECK(k[0] == doctest::Approx(0.6));
    CHECK(k[1] == doctest::Approx(0.4));
    CHECK(total(k) == doctest::Approx(1.0));

    p.arrival_dist = bernoulli(0.0);
    k = buffer_kernel(1, 0, Action::transmit, p);
    CHECK(k[0] == doctest::Approx(0.5));
    CHECK(k[1] == doctest::Approx(0.5));

    p.arrival_dist = bernoulli(0.37);
    k = buffer_kernel(p.N_b, 0, Action::idle, p);
    CHECK(k[p.N_b] == doctest::Approx(1.0));
}

TEST_CASE("battery_kernel") {
    auto p = single_channel(4, 6, 0.5, 0.4, 0.7);
    auto k = battery_kernel(p.N_e, Action::idle, p);
    CHECK(k[p.N_e] == doctest::Approx(1.0));

    k = battery_kernel(1, Action::transmit, p);
    CHECK(k[0] == doctest::Approx(0.3));
    CHECK(k[1] == doctest::Approx(0.7));

    p.harvest_dist = bernoulli(0.0);
    k = battery_kernel(5, Action::idle, p);
    CHECK(k[5] == doctest::Approx(1.0));
}

TEST_CASE("full_kernel on a deterministic sub-model has a single successor") {
    const auto p = deterministic_model(5, 5, 1, 1);
    const auto k = full_kernel({3, 2, 0}, Action::transmit, p);
    REQUIRE(k.size() == 1);
    CHECK(k[0].next == SystemState{3, 2, 0});
    CHECK(k[0].prob == 1.0);
}

TEST_CASE("full_kernel matches brute-force enumeration of the recursions") {
    // Oracle: enumerate every (f, l, e_H, h') outcome and push it through
    // pds_of / next_state, accumulating probability per successor.
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const auto p = random_model(rng, 1 + trial % 4, 1 + trial % 3, 1 + trial % 3);
        for (int b = 0; b <= p.N_b; ++b)
            for (int e = 0; e <= p.N_e; ++e)
                for (int h = 0; h < p.N_h; ++h)
                    for (Action a : feasible_actions(b, e, p)) {
                        std::map<std::size_t, double> oracle;
                        const double pf[2] = {a == Action::idle ? 1.0 : p.plr[h],
                                              a == Action::idle ? 0.0 : 1.0 - p.plr[h]};
                        for (int f = 0; f <= as_int(a); ++f)
                            for (int l = 0; l <= p.max_arrivals(); ++l)
                                for (int eh = 0; eh <= p.max_harvest(); ++eh)
                                    for (int h2 = 0; h2 < p.N_h; ++h2) {
                                        const auto s2 = next_state(pds_of({b, e, h}, a, f, p), {l, eh, h2}, p);
                                        oracle[state_index(p, s2.b, s2.e, s2.h)] +=
                                            pf[f] * p.arrival_dist[l] * p.harvest_dist[eh] *
                                            p.channel_matrix[h][h2];
                                    }
                        std::map<std::size_t, double> got;
                        double sum = 0.0;
                        for (const auto& t : full_kernel({b, e, h}, a, p)) {
                            got[state_index(p, t.next.b, t.next.e, t.next.h)] += t.prob;
                            sum += t.prob;
                        }
                        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
                        for (const auto& [idx, prob] : oracle) {
                            if (prob == 0.0) continue;
                            CHECK(std::abs(got[idx] - prob) <= 1e-12);
                        }
                        for (const auto& [idx, prob] : got) CHECK(oracle.count(idx) == 1);
                    }
    }
}

TEST_CASE("kernels are stochastic, costs non-negative and non-decreasing in b") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_model(rng, 1 + trial % 6, 1 + trial % 5, 1 + trial % 3);
        for (int h = 0; h < p.N_h; ++h)
            for (Action a : {Action::idle, Action::transmit}) {
                double prev = -1.0;
                for (int b = (a == Action::transmit ? 1 : 0); b <= p.N_b; ++b) {
                    const double c = buffer_cost(b, h, a, p);
                    CHECK(c >= 0.0);
                    CHECK(c >= prev);
                    prev = c;
                    CHECK(total(buffer_kernel(b, h, a, p)) == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        for (int e = 0; e <= p.N_e; ++e)
            for (Action a : feasible_actions(1, e, p))
                CHECK(total(battery_kernel(e, a, p)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pds_of followed by next_state reproduces the buffer and battery recursions") {
    Rng rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto p = scaled_params(8, 8, 3);
        const SystemState s{static_cast<int>(rng.next() % 9), static_cast<int>(rng.next() % 9),
                            static_cast<int>(rng.next() % 3)};
        const auto actions = feasible_actions(s.b, s.e, p);
        const Action a = actions.items[rng.next() % static_cast<std::uint64_t>(actions.size())];
        const int f = a == Action::transmit ? static_cast<int>(rng.next() % 2) : 0;
        const ExperienceTuple x{static_cast<int>(rng.next() % 2), static_cast<int>(rng.next() % 2),
                                static_cast<int>(rng.next() % 3)};
        const auto s2 = next_state(pds_of(s, a, f, p), x, p);
        CHECK(s2.b == std::min(s.b - f + x.l, p.N_b));
        CHECK(s2.e == std::min(s.e - as_int(a) * p.e_TX + x.e_H, p.N_e));
        CHECK(s2.h == x.h_next);
    }
}

TEST_CASE("stationary distribution of the birth-death chain is uniform") {
    const auto pi = stationary_distribution(birth_death_channel(8));
    for (double x : pi) CHECK(x == doctest::Approx(0.125).epsilon(1e-10));
}
