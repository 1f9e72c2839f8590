// Command-line front end: solve, learn, compare, check.

#include "ehsched/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace ehs;

namespace {

struct Overrides {
    std::string config;
    std::string algo;
    long slots = 0;
    long long seed = -1;
    double delta = 0.0;
    int period = 0;
    int replicas = 0;
    long stride = 0;
    std::string out;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON configuration file (see docs/config.md)");
    cmd->add_option("--slots", o.slots, "simulation horizon in slots")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "base seed; replica r uses seed + r")->check(CLI::NonNegativeNumber);
    cmd->add_option("--delta", o.delta, "grid error threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--period", o.period, "update period T for VE and grid learning")->check(CLI::PositiveNumber);
    cmd->add_option("--replicas", o.replicas, "independent replicas")->check(CLI::PositiveNumber);
    cmd->add_option("--stride", o.stride, "CSV sampling stride in slots")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output path");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

ExperimentSpec build_spec(const Overrides& o) {
    ExperimentSpec spec = o.config.empty() ? ExperimentSpec{} : load_config(o.config);
    if (o.slots > 0) spec.sim.horizon = o.slots;
    if (o.seed >= 0) spec.sim.seed = static_cast<std::uint64_t>(o.seed);
    if (o.delta > 0.0) spec.grid.delta = o.delta;
    if (o.period > 0) spec.learner.period = spec.grid.period = o.period;
    if (o.replicas > 0) spec.replicas = o.replicas;
    if (o.stride > 0) spec.stride = o.stride;
    if (!o.out.empty()) spec.output = o.out;
    spec.validate();
    return spec;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_solve(const Overrides& o) {
    const ExperimentSpec spec = build_spec(o);
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = value_iteration(spec.model, spec.solver);
    const auto vp = pds_value_iteration(spec.model, spec.solver);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("model: N_b=%d N_e=%d N_h=%d gamma=%g eta=%g e_TX=%d states=%zu\n", spec.model.N_b, spec.model.N_e,
                spec.model.N_h, spec.model.gamma, spec.model.eta, spec.model.e_TX, spec.model.num_states());
    std::printf("value iteration: %s, residual %.3g after %d sweeps\n", v.converged() ? "converged" : "NOT converged",
                v.residual, v.sweeps);
    std::printf("post-decision value iteration: %s, residual %.3g after %d sweeps\n",
                vp.converged() ? "converged" : "NOT converged", vp.residual, vp.sweeps);
    const auto st = check_structure(vp.values);
    std::printf("structure of V~*: monotone_b=%s incr_diff_b=%s monotone_e=%s incr_diff_e=%s (worst %.3g)\n",
                st.monotone_b ? "yes" : "no", st.incr_diff_b ? "yes" : "no", st.monotone_e ? "yes" : "no",
                st.incr_diff_e ? "yes" : "no", st.max_violation);
    std::printf("solve time %.2fs\n", secs);
    if (!spec.output.empty()) {
        const auto& p = spec.model;
        write_file_atomically(spec.output, [&](std::ostream& os) {
            os << "b,e,h,value,pds_value,action\n";
            char buf[96];
            for (int b = 0; b <= p.N_b; ++b)
                for (int e = 0; e <= p.N_e; ++e)
                    for (int h = 0; h < p.N_h; ++h) {
                        std::snprintf(buf, sizeof buf, "%.9g,%.9g", v.values(b, e, h), vp.values(b, e, h));
                        os << b << ',' << e << ',' << h << ',' << buf << ',' << as_int(v.policy(b, e, h)) << '\n';
                    }
        });
        std::printf("wrote %s\n", spec.output.c_str());
    }
    return v.converged() && vp.converged() ? 0 : 1;
}

int cmd_learn(const Overrides& o) {
    ExperimentSpec spec = build_spec(o);
    if (!o.algo.empty()) spec.algorithm = parse_algorithm(o.algo);
    const auto result = run_experiment(spec, o.threads);
    if (!spec.output.empty()) write_file_atomically(spec.output, [&](std::ostream& os) { write_csv(os, result); });
    else write_csv(std::cout, result);
    print_summary(spec.output.empty() ? std::cerr : std::cout, result);
    return 0;
}

int cmd_compare(const Overrides& o) {
    const ExperimentSpec base = build_spec(o);
    const std::string algos = o.algo.empty() ? "optimal,ve,grid,pds,q-learning" : o.algo;
    std::vector<ExperimentSpec> specs;
    for (const auto& name : split(algos)) {
        ExperimentSpec s = base;
        s.algorithm = parse_algorithm(name);
        specs.push_back(s);
    }
    const auto results = compare(specs, o.threads);
    if (!base.output.empty())
        write_file_atomically(base.output, [&](std::ostream& os) { write_compare_csv(os, results); });
    else write_compare_csv(std::cout, results);
    for (const auto& r : results) print_summary(base.output.empty() ? std::cerr : std::cout, r);
    return 0;
}

int cmd_check(const Overrides& o) {
    const ExperimentSpec spec = build_spec(o);
    return run_checks(spec, std::cout) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-harvesting transmission scheduling: exact solver and online learners"};
    app.require_subcommand(1);
    Overrides o;
    auto* solve = app.add_subcommand("solve", "solve the model by value iteration and report its structure");
    auto* learn = app.add_subcommand("learn", "run one algorithm and write per-slot metrics as CSV");
    auto* cmp = app.add_subcommand("compare", "run several algorithms on the same model and join their CSVs");
    auto* check = app.add_subcommand("check", "run the invariant suite on the configured model");
    for (auto* c : {solve, learn, cmp, check}) add_common(c, o);
    learn->add_option("--algo", o.algo, "optimal | q-learning | pds | ve | grid");
    cmp->add_option("--algo", o.algo, "comma-separated algorithms (default: all five)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        if (*solve) return cmd_solve(o);
        if (*learn) return cmd_learn(o);
        if (*cmp) return cmd_compare(o);
        if (*check) return cmd_check(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
