#pragma once

// Delay-sensitive energy-harvesting scheduling model: states, actions,
// costs and exact transition kernels. Everything here is a pure function of
// an immutable ModelParams.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehs {

using prec_t = double;
using ProbVec = std::vector<prec_t>;
using Matrix = std::vector<std::vector<prec_t>>;

/// Raised when a model or a call violates its documented contract.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ModelParams {
    int N_b = 32;    ///< buffer capacity (packets)
    int N_e = 32;    ///< battery capacity (energy packets)
    int N_h = 8;     ///< number of channel states
    int e_TX = 1;    ///< energy packets per transmission
    prec_t eta = 50.0;   ///< overflow penalty per dropped packet
    prec_t gamma = 0.98; ///< discount factor
    ProbVec plr;          ///< packet loss rate q(h), strictly decreasing in h
    ProbVec arrival_dist; ///< P^l over {0..M_l}
    ProbVec harvest_dist; ///< P^{e_H} over {0..len-1}, len-1 <= N_e
    Matrix channel_matrix; ///< row-stochastic P^h(h'|h)

    int max_arrivals() const { return static_cast<int>(arrival_dist.size()) - 1; }
    int max_harvest() const { return static_cast<int>(harvest_dist.size()) - 1; }
    std::size_t num_states() const {
        return static_cast<std::size_t>(N_b + 1) * static_cast<std::size_t>(N_e + 1) *
               static_cast<std::size_t>(N_h);
    }

    /// Throws ContractError describing the first violated invariant.
    void validate() const;
};

/// Birth-death channel chain: stay 0.5, move up/down 0.25, reflecting at the ends.
Matrix birth_death_channel(int n_h, prec_t stay = 0.5);

/// Bernoulli(p) as a probability vector over {0,1}.
ProbVec bernoulli(prec_t p);

/// Defaults: N_b=N_e=32, 8 channels with q = 0.8..0.1, gamma 0.98, eta 50,
/// e_TX 1, Bern(0.4) data arrivals, Bern(0.7) energy arrivals.
ModelParams default_params();

/// Same defaults but with the given buffer/battery/channel sizes. PLRs are
/// spread evenly over [0.1, 0.8] (a single channel gets q = 0.1).
ModelParams scaled_params(int n_b, int n_e, int n_h, prec_t arrival_p = 0.4,
                          prec_t harvest_p = 0.7);

/// Stationary distribution of a row-stochastic matrix by power iteration.
ProbVec stationary_distribution(const Matrix& p, int max_iters = 100000, prec_t tol = 1e-14);

struct SystemState {
    int b = 0;
    int e = 0;
    int h = 0;
    friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct PostDecisionState {
    int b = 0;
    int e = 0;
    int h = 0;
    friend bool operator==(const PostDecisionState&, const PostDecisionState&) = default;
};

/// 0 = idle, 1 = transmit the head-of-line packet.
enum class Action : std::uint8_t { idle = 0, transmit = 1 };

inline int as_int(Action a) { return static_cast<int>(a); }

/// Unknown dynamics observed in one slot.
struct ExperienceTuple {
    int l = 0;      ///< data arrivals
    int e_H = 0;    ///< energy arrivals
    int h_next = 0; ///< next channel state
    friend bool operator==(const ExperienceTuple&, const ExperienceTuple&) = default;
};

/// Small fixed-capacity set of feasible actions, idle first.
struct ActionSet {
    std::array<Action, 2> items{Action::idle, Action::transmit};
    int count = 1;

    const Action* begin() const { return items.data(); }
    const Action* end() const { return items.data() + count; }
    int size() const { return count; }
    bool contains(Action a) const { return a == Action::idle || count == 2; }
};

/// Lexicographic (b, e, h) index of a state or PDS into a dense table.
inline std::size_t state_index(const ModelParams& p, int b, int e, int h) {
    return (static_cast<std::size_t>(b) * static_cast<std::size_t>(p.N_e + 1) +
            static_cast<std::size_t>(e)) *
               static_cast<std::size_t>(p.N_h) +
           static_cast<std::size_t>(h);
}

bool is_valid(const ModelParams& p, const SystemState& s);
bool is_valid(const ModelParams& p, const PostDecisionState& s);

ActionSet feasible_actions(int b, int e, const ModelParams& p);

inline bool is_feasible(const SystemState& s, Action a, const ModelParams& p) {
    return feasible_actions(s.b, s.e, p).contains(a);
}

/// Probability of goodput f in {0,1}. Idle never serves; transmitting succeeds
/// with probability 1 - q(h).
std::array<prec_t, 2> goodput_dist(Action a, int h, const ModelParams& p);

PostDecisionState pds_of(const SystemState& s, Action a, int f, const ModelParams& p);

SystemState next_state(const PostDecisionState& pds, const ExperienceTuple& x,
                       const ModelParams& p);

/// Expected one-slot buffer cost: holding cost b plus expected overflow penalty.
prec_t buffer_cost(int b, int h, Action a, const ModelParams& p);

/// Expected overflow penalty of a post-decision buffer state.
prec_t overflow_cost(int b_pds, const ModelParams& p);

/// Distribution over b' in {0..N_b}.
ProbVec buffer_kernel(int b, int h, Action a, const ModelParams& p);

/// Distribution over e' in {0..N_e}.
ProbVec battery_kernel(int e, Action a, const ModelParams& p);

struct Transition {
    SystemState next;
    prec_t prob = 0.0;
};

/// Sparse successor distribution P(s'|s,a), product of the buffer, channel and
/// battery factors. Zero-probability successors are omitted.
std::vector<Transition> full_kernel(const SystemState& s, Action a, const ModelParams& p);

/// max over (s,a) of c(s,a) / (1 - gamma).
prec_t v_max(const ModelParams& p);

std::string to_string(const SystemState& s);

} // namespace ehs
