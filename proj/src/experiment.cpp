#include "ehsched/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace ehs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ReplicaOutput {
    MetricsTrace trace;
    GridStats stats;
};

ReplicaOutput run_replica(const ExperimentSpec& spec, const Policy* optimal, int replica) {
    SimConfig sim = spec.sim;
    sim.seed = spec.sim.seed + static_cast<std::uint64_t>(replica);
    ReplicaOutput out;
    switch (spec.algorithm) {
    case Algorithm::optimal: {
        PolicyController c(*optimal);
        out.trace = run_episode(c, sim, spec.model);
        break;
    }
    case Algorithm::q_learning: {
        LearnerConfig cfg = spec.learner;
        cfg.seed = sim.seed;
        QLearner c(spec.model, cfg);
        out.trace = run_episode(c, sim, spec.model);
        break;
    }
    case Algorithm::pds: {
        PdsLearner c(spec.model, spec.learner);
        out.trace = run_episode(c, sim, spec.model);
        break;
    }
    case Algorithm::ve: {
        VirtualExperienceLearner c(spec.model, spec.learner);
        out.trace = run_episode(c, sim, spec.model);
        break;
    }
    case Algorithm::grid: {
        GridLearner c(spec.model, spec.grid);
        out.trace = run_episode(c, sim, spec.model);
        out.stats = c.stats();
        break;
    }
    }
    return out;
}

void format_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    os << buf;
}

void write_rows(std::ostream& os, const ExperimentResult& r, const std::string* label) {
    const long stride = r.spec.stride;
    for (std::size_t rep = 0; rep < r.replicas.size(); ++rep) {
        const auto& t = r.replicas[rep];
        const long n = static_cast<long>(t.size());
        for (long s = 0; s < n; ++s) {
            if ((s + 1) % stride != 0 && s != n - 1) continue;
            const auto i = static_cast<std::size_t>(s);
            if (label) os << *label << ',';
            os << (s + 1) << ',' << rep << ',';
            format_double(os, t.avg_buffer[i]);
            os << ',';
            format_double(os, t.avg_battery[i]);
            os << ',' << t.cum_overflows[i] << ',' << t.updates[i] << ',' << t.grid_points[i] << ',';
            format_double(os, t.avg_cost[i]);
            os << '\n';
        }
    }
}

constexpr const char* kColumns = "slot,replica,avg_buffer,avg_battery,cum_overflows,updates_this_slot,grid_points,realized_cost";

} // namespace

double ExperimentResult::final_mean(const std::vector<double> MetricsTrace::*series) const {
    double sum = 0.0;
    for (const auto& t : replicas) sum += (t.*series).back();
    return replicas.empty() ? 0.0 : sum / static_cast<double>(replicas.size());
}

double ExperimentResult::final_mean_overflows() const {
    double sum = 0.0;
    for (const auto& t : replicas) sum += static_cast<double>(t.cum_overflows.back());
    return replicas.empty() ? 0.0 : sum / static_cast<double>(replicas.size());
}

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads) {
    spec.validate();
    const auto t0 = Clock::now();
    ExperimentResult result;
    result.spec = spec;

    std::unique_ptr<Policy> optimal;
    if (spec.algorithm == Algorithm::optimal) {
        const auto solved = value_iteration(spec.model, spec.solver);
        if (!solved.converged())
            throw std::runtime_error("value iteration did not converge (residual " + std::to_string(solved.residual) +
                                     " after " + std::to_string(solved.sweeps) + " sweeps)");
        optimal = std::make_unique<Policy>(solved.policy);
        result.solve_seconds = seconds_since(t0);
    }

    const auto n = static_cast<std::size_t>(spec.replicas);
    std::vector<ReplicaOutput> outputs(n);
    std::vector<std::exception_ptr> errors(n);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < n;) {
            try {
                outputs[r] = run_replica(spec, optimal.get(), static_cast<int>(r));
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (auto& o : outputs) {
        result.total_updates += o.trace.total_updates;
        result.replicas.push_back(std::move(o.trace));
        if (spec.algorithm == Algorithm::grid) result.grid_stats.push_back(std::move(o.stats));
    }
    result.wall_seconds = seconds_since(t0);
    return result;
}

bool same_model(const ModelParams& a, const ModelParams& b) {
    return a.N_b == b.N_b && a.N_e == b.N_e && a.N_h == b.N_h && a.e_TX == b.e_TX && a.eta == b.eta &&
           a.gamma == b.gamma && a.plr == b.plr && a.arrival_dist == b.arrival_dist &&
           a.harvest_dist == b.harvest_dist && a.channel_matrix == b.channel_matrix;
}

std::vector<ExperimentResult> compare(const std::vector<ExperimentSpec>& specs, unsigned threads) {
    if (specs.empty()) throw ConfigError("compare needs at least one algorithm");
    for (const auto& s : specs) {
        if (!same_model(s.model, specs.front().model)) throw ConfigError("compare: specs use different models");
        if (s.sim.horizon != specs.front().sim.horizon) throw ConfigError("compare: specs use different horizons");
    }
    std::vector<ExperimentResult> out;
    for (const auto& s : specs) out.push_back(run_experiment(s, threads));
    return out;
}

void write_csv(std::ostream& os, const ExperimentResult& r) {
    os << kColumns << '\n';
    write_rows(os, r, nullptr);
}

void write_compare_csv(std::ostream& os, const std::vector<ExperimentResult>& results) {
    os << "algorithm," << kColumns << '\n';
    for (const auto& r : results) {
        const std::string label = r.spec.label();
        write_rows(os, r, &label);
    }
}

void print_summary(std::ostream& os, const ExperimentResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%-10s replicas=%d slots=%ld avg_buffer=%.4f avg_battery=%.4f overflows=%.1f "
                  "realized_cost=%.4f total_updates=%zu wall=%.2fs",
                  r.spec.label().c_str(), r.spec.replicas, r.spec.sim.horizon, r.final_mean(&MetricsTrace::avg_buffer),
                  r.final_mean(&MetricsTrace::avg_battery), r.final_mean_overflows(),
                  r.final_mean(&MetricsTrace::avg_cost), r.total_updates, r.wall_seconds);
    os << buf << '\n';
    if (!r.grid_stats.empty()) {
        os << "           grid vertices per channel (replica 0):";
        for (auto v : r.grid_stats.front().vertices_per_channel) os << ' ' << v;
        os << "\n           tree depths (replica 0):";
        for (auto d : r.grid_stats.front().tree_depths) os << ' ' << d;
        os << '\n';
    }
}

void write_file_atomically(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".partial";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            writer(out);
            out.flush();
            if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
        }
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

} // namespace ehs
