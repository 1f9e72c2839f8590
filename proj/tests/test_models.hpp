#pragma once

// Small hand-built and randomly generated models shared by the unit tests.

#include "ehsched/model.hpp"
#include "ehsched/rng.hpp"

#include <algorithm>
#include <numeric>

namespace ehs::testing {

/// Single channel, everything deterministic: no loss, fixed arrivals/harvest.
inline ModelParams deterministic_model(int n_b, int n_e, int arrivals = 0, int harvest = 0) {
    ModelParams p;
    p.N_b = n_b;
    p.N_e = n_e;
    p.N_h = 1;
    p.plr = {0.0};
    p.arrival_dist.assign(static_cast<std::size_t>(arrivals + 1), 0.0);
    p.arrival_dist.back() = 1.0;
    p.harvest_dist.assign(static_cast<std::size_t>(harvest + 1), 0.0);
    p.harvest_dist.back() = 1.0;
    p.channel_matrix = {{1.0}};
    return p;
}

/// N_b = N_e = 1, one lossless channel, Bern(0.5) data and energy, gamma 0.9.
inline ModelParams toy_model() {
    ModelParams p = deterministic_model(1, 1);
    p.arrival_dist = bernoulli(0.5);
    p.harvest_dist = bernoulli(0.5);
    p.gamma = 0.9;
    p.eta = 50.0;
    return p;
}

inline ProbVec random_distribution(Rng& rng, int n) {
    ProbVec d(static_cast<std::size_t>(n));
    for (auto& x : d) x = rng.uniform(0.05, 1.0);
    const double sum = std::accumulate(d.begin(), d.end(), 0.0);
    for (auto& x : d) x /= sum;
    return d;
}

/// Random but valid model with general (non-Bernoulli) supports.
inline ModelParams random_model(Rng& rng, int n_b, int n_e, int n_h) {
    ModelParams p;
    p.N_b = n_b;
    p.N_e = n_e;
    p.N_h = n_h;
    p.e_TX = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::min(2, n_e)));
    p.eta = rng.uniform(0.0, 60.0);
    p.gamma = rng.uniform(0.5, 0.95);
    p.plr.resize(static_cast<std::size_t>(n_h));
    double q = rng.uniform(0.6, 0.95);
    for (auto& x : p.plr) {
        x = q;
        q *= rng.uniform(0.5, 0.9);
    }
    p.arrival_dist = random_distribution(rng, 1 + static_cast<int>(rng.next() % 3));
    p.harvest_dist = random_distribution(rng, 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::min(3, n_e + 1))));
    p.channel_matrix.clear();
    for (int h = 0; h < n_h; ++h) p.channel_matrix.push_back(random_distribution(rng, n_h));
    p.validate();
    return p;
}

} // namespace ehs::testing
