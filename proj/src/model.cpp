#include "ehsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ehs {

namespace {

constexpr prec_t kSumTolerance = 1e-12;

void check_distribution(const ProbVec& d, const std::string& name) {
    if (d.empty()) throw ContractError(name + ": distribution is empty");
    prec_t sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] >= 0.0 && d[i] <= 1.0)) {
            std::ostringstream os;
            os << name << "[" << i << "] = " << d[i] << " is not in [0,1]";
            throw ContractError(os.str());
        }
        sum += d[i];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << name << " sums to " << sum << ", expected 1";
        throw ContractError(os.str());
    }
}

} // namespace

void ModelParams::validate() const {
    if (N_b < 0) throw ContractError("N_b must be non-negative");
    if (N_e < 0) throw ContractError("N_e must be non-negative");
    if (N_h < 1) throw ContractError("N_h must be positive");
    if (e_TX < 1) throw ContractError("e_TX must be positive");
    if (e_TX > N_e) throw ContractError("e_TX must not exceed N_e");
    if (!(eta >= 0.0)) throw ContractError("eta must be non-negative");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractError("gamma must lie in [0,1)");

    if (static_cast<int>(plr.size()) != N_h)
        throw ContractError("plr must have N_h entries");
    for (std::size_t h = 0; h < plr.size(); ++h) {
        if (!(plr[h] >= 0.0 && plr[h] <= 1.0))
            throw ContractError("plr[" + std::to_string(h) + "] is not in [0,1]");
        if (h > 0 && !(plr[h] < plr[h - 1]))
            throw ContractError("plr must be strictly decreasing in h (better channels lose less)");
    }

    check_distribution(arrival_dist, "arrival_dist");
    check_distribution(harvest_dist, "harvest_dist");
    if (max_harvest() > N_e)
        throw ContractError("harvest_dist support exceeds {0..N_e}");

    if (static_cast<int>(channel_matrix.size()) != N_h)
        throw ContractError("channel_matrix must have N_h rows");
    for (int h = 0; h < N_h; ++h) {
        if (static_cast<int>(channel_matrix[h].size()) != N_h)
            throw ContractError("channel_matrix row " + std::to_string(h) + " must have N_h entries");
        check_distribution(channel_matrix[h], "channel_matrix[" + std::to_string(h) + "]");
    }
}

Matrix birth_death_channel(int n_h, prec_t stay) {
    Matrix m(n_h, ProbVec(n_h, 0.0));
    if (n_h == 1) {
        m[0][0] = 1.0;
        return m;
    }
    const prec_t move = (1.0 - stay) / 2.0;
    for (int h = 0; h < n_h; ++h) {
        m[h][h] = stay;
        // reflect the missing neighbour's mass back onto the state itself
        if (h > 0) m[h][h - 1] = move; else m[h][h] += move;
        if (h + 1 < n_h) m[h][h + 1] = move; else m[h][h] += move;
    }
    return m;
}

ProbVec bernoulli(prec_t p) { return {1.0 - p, p}; }

ModelParams default_params() { return scaled_params(32, 32, 8); }

ModelParams scaled_params(int n_b, int n_e, int n_h, prec_t arrival_p, prec_t harvest_p) {
    ModelParams p;
    p.N_b = n_b;
    p.N_e = n_e;
    p.N_h = n_h;
    p.plr.resize(n_h);
    if (n_h == 1) {
        p.plr[0] = 0.1;
    } else {
        for (int h = 0; h < n_h; ++h)
            p.plr[h] = 0.8 - 0.7 * static_cast<prec_t>(h) / static_cast<prec_t>(n_h - 1);
    }
    p.arrival_dist = bernoulli(arrival_p);
    p.harvest_dist = bernoulli(harvest_p);
    p.channel_matrix = birth_death_channel(n_h);
    return p;
}

ProbVec stationary_distribution(const Matrix& p, int max_iters, prec_t tol) {
    const std::size_t n = p.size();
    ProbVec pi(n, 1.0 / static_cast<prec_t>(n)), next(n);
    for (int it = 0; it < max_iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * p[i][j];
        prec_t diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
        pi.swap(next);
        if (diff < tol) break;
    }
    return pi;
}

bool is_valid(const ModelParams& p, const SystemState& s) {
    return s.b >= 0 && s.b <= p.N_b && s.e >= 0 && s.e <= p.N_e && s.h >= 0 && s.h < p.N_h;
}

bool is_valid(const ModelParams& p, const PostDecisionState& s) {
    return s.b >= 0 && s.b <= p.N_b && s.e >= 0 && s.e <= p.N_e && s.h >= 0 && s.h < p.N_h;
}

ActionSet feasible_actions(int b, int e, const ModelParams& p) {
    ActionSet set;
    set.count = (b > 0 && e >= p.e_TX) ? 2 : 1;
    return set;
}

std::array<prec_t, 2> goodput_dist(Action a, int h, const ModelParams& p) {
    if (a == Action::idle) return {1.0, 0.0};
    const prec_t q = p.plr[static_cast<std::size_t>(h)];
    return {q, 1.0 - q};
}

PostDecisionState pds_of(const SystemState& s, Action a, int f, const ModelParams& p) {
    if (!is_feasible(s, a, p))
        throw ContractError("pds_of: action " + std::to_string(as_int(a)) +
                            " is infeasible in state " + to_string(s));
    if (f < 0 || f > as_int(a))
        throw ContractError("pds_of: goodput " + std::to_string(f) + " exceeds the action");
    return {s.b - f, s.e - as_int(a) * p.e_TX, s.h};
}

SystemState next_state(const PostDecisionState& pds, const ExperienceTuple& x,
                       const ModelParams& p) {
    return {std::min(pds.b + x.l, p.N_b), std::min(pds.e + x.e_H, p.N_e), x.h_next};
}

prec_t overflow_cost(int b_pds, const ModelParams& p) {
    prec_t c = 0.0;
    for (int l = 0; l <= p.max_arrivals(); ++l) {
        const int over = b_pds + l - p.N_b;
        if (over > 0) c += p.arrival_dist[l] * p.eta * over;
    }
    return c;
}

prec_t buffer_cost(int b, int h, Action a, const ModelParams& p) {
    const auto pf = goodput_dist(a, h, p);
    prec_t c = static_cast<prec_t>(b);
    for (int f = 0; f <= 1; ++f) {
        if (pf[f] == 0.0) continue;
        for (int l = 0; l <= p.max_arrivals(); ++l)
            c += p.arrival_dist[l] * pf[f] * p.eta * std::max(b - f + l - p.N_b, 0);
    }
    return c;
}

ProbVec buffer_kernel(int b, int h, Action a, const ModelParams& p) {
    ProbVec out(static_cast<std::size_t>(p.N_b + 1), 0.0);
    const auto pf = goodput_dist(a, h, p);
    for (int f = 0; f <= 1; ++f) {
        if (pf[f] == 0.0) continue;
        for (int l = 0; l <= p.max_arrivals(); ++l)
            out[std::min(b - f + l, p.N_b)] += pf[f] * p.arrival_dist[l];
    }
    return out;
}

ProbVec battery_kernel(int e, Action a, const ModelParams& p) {
    ProbVec out(static_cast<std::size_t>(p.N_e + 1), 0.0);
    const int spent = e - as_int(a) * p.e_TX;
    for (int eh = 0; eh <= p.max_harvest(); ++eh)
        out[std::min(spent + eh, p.N_e)] += p.harvest_dist[eh];
    return out;
}

std::vector<Transition> full_kernel(const SystemState& s, Action a, const ModelParams& p) {
    const auto pb = buffer_kernel(s.b, s.h, a, p);
    const auto pe = battery_kernel(s.e, a, p);
    const auto& ph = p.channel_matrix[static_cast<std::size_t>(s.h)];
    std::vector<Transition> out;
    for (int b2 = 0; b2 <= p.N_b; ++b2) {
        if (pb[b2] == 0.0) continue;
        for (int e2 = 0; e2 <= p.N_e; ++e2) {
            if (pe[e2] == 0.0) continue;
            for (int h2 = 0; h2 < p.N_h; ++h2) {
                if (ph[h2] == 0.0) continue;
                out.push_back({{b2, e2, h2}, pb[b2] * pe[e2] * ph[h2]});
            }
        }
    }
    return out;
}

prec_t v_max(const ModelParams& p) {
    prec_t worst = 0.0;
    for (int b = 0; b <= p.N_b; ++b)
        for (int e = 0; e <= p.N_e; ++e)
            for (int h = 0; h < p.N_h; ++h)
                for (Action a : feasible_actions(b, e, p))
                    worst = std::max(worst, buffer_cost(b, h, a, p));
    return worst / (1.0 - p.gamma);
}

std::string to_string(const SystemState& s) {
    return "(" + std::to_string(s.b) + "," + std::to_string(s.e) + "," + std::to_string(s.h) + ")";
}

} // namespace ehs
