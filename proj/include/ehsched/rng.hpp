#pragma once

// Reproducible random streams.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++
// standard. The library never uses std::*_distribution (their algorithms are
// implementation-defined); instead:
//   uniform01  = (x >> 11) * 2^-53            for one 64-bit draw x
//   discrete   = smallest i with u < cdf[i]    (inverse CDF, u = uniform01)
// Independent streams are seeded with splitmix64(seed ^ stream-salt).

#include "ehsched/model.hpp"

#include <cstdint>
#include <random>

namespace ehs {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Salts separating the environment's stream from a learner's exploration stream.
enum class StreamSalt : std::uint64_t { environment = 0x454E56ULL, exploration = 0x4558504CULL, check = 0x43484BULL };

class Rng {
public:
    explicit Rng(std::uint64_t seed, StreamSalt salt = StreamSalt::environment)
        : engine_(splitmix64(seed ^ static_cast<std::uint64_t>(salt))) {}

    std::uint64_t next() { return engine_(); }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Index drawn from a probability vector by inverse CDF.
    int discrete(const ProbVec& probs) {
        const double u = uniform01();
        double cdf = 0.0;
        int last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) continue;
            cdf += probs[i];
            last_positive = static_cast<int>(i);
            if (u < cdf) return static_cast<int>(i);
        }
        return last_positive; // rounding: cdf may end a hair below 1
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace ehs
