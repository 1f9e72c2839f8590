#include "ehsched/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace ehs {

using json = nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::optimal: return "optimal";
    case Algorithm::q_learning: return "q-learning";
    case Algorithm::pds: return "pds";
    case Algorithm::ve: return "ve";
    case Algorithm::grid: return "grid";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "optimal") return Algorithm::optimal;
    if (s == "q-learning" || s == "qlearning" || s == "q_learning") return Algorithm::q_learning;
    if (s == "pds") return Algorithm::pds;
    if (s == "ve") return Algorithm::ve;
    if (s == "grid") return Algorithm::grid;
    throw ConfigError("unknown algorithm '" + name + "' (optimal|q-learning|pds|ve|grid)");
}

void ExperimentSpec::validate() const {
    try {
        model.validate();
        sim.validate(model);
        learner.validate();
        grid.validate(model);
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    if (replicas < 1) throw ConfigError("replicas must be at least 1");
    if (stride < 1) throw ConfigError("stride must be at least 1");
    if (!(solver.tol > 0.0) || solver.max_iters < 1) throw ConfigError("solver tol must be > 0 and max_iters >= 1");
}

std::string ExperimentSpec::label() const {
    switch (algorithm) {
    case Algorithm::optimal: return "Optimal";
    case Algorithm::q_learning: return "Q-learning";
    case Algorithm::pds: return "PDS";
    case Algorithm::ve: return "VE-" + std::to_string(learner.period);
    case Algorithm::grid: return "Grid-" + std::to_string(grid.period);
    }
    return "?";
}

namespace {

/// Walks one JSON object, rejecting unknown keys and reporting full paths.
class Section {
public:
    Section(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), src_(source) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(src_ + ": " + full(key) + ": " + what);
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <typename Fn>
    void section(const std::string& key, Fn&& fn) {
        if (const json* v = find(key)) {
            Section sub(*v, full(key), src_);
            fn(sub);
            sub.finish();
        }
    }

    void integer(const std::string& key, int& out, long lo, long hi) {
        long v = out;
        integer(key, v, lo, hi);
        out = static_cast<int>(v);
    }

    void integer(const std::string& key, long& out, long lo, long hi) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "expected an integer");
            const auto x = v->get<long long>();
            if (x < lo || x > hi) fail(key, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            out = static_cast<long>(x);
        }
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key, "expected a number");
            out = v->get<double>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(key, "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key, "expected a string");
            out = v->get<std::string>();
        }
    }

    bool vector(const std::string& key, std::vector<double>& out) {
        const json* v = find(key);
        if (!v) return false;
        if (!v->is_array()) fail(key, "expected an array of numbers");
        out.clear();
        for (const auto& x : *v) {
            if (!x.is_number()) fail(key, "expected an array of numbers");
            out.push_back(x.get<double>());
        }
        return true;
    }

    bool ints(const std::string& key, std::vector<int>& out, std::size_t n) {
        const json* v = find(key);
        if (!v) return false;
        if (!v->is_array() || v->size() != n) fail(key, "expected an array of " + std::to_string(n) + " integers");
        out.clear();
        for (const auto& x : *v) {
            if (!x.is_number_integer()) fail(key, "expected an array of " + std::to_string(n) + " integers");
            out.push_back(x.get<int>());
        }
        return true;
    }

    bool matrix(const std::string& key, Matrix& out) {
        const json* v = find(key);
        if (!v) return false;
        if (!v->is_array()) fail(key, "expected an array of rows");
        out.clear();
        for (const auto& row : *v) {
            if (!row.is_array()) fail(key, "expected an array of rows");
            ProbVec r;
            for (const auto& x : row) {
                if (!x.is_number()) fail(key, "expected numeric entries");
                r.push_back(x.get<double>());
            }
            out.push_back(std::move(r));
        }
        return true;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }

    std::string full(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& j_;
    std::string path_;
    const std::string& src_;
    std::set<std::string> seen_;
};

Schedule read_schedule(Section& s, const Schedule& fallback) {
    std::string kind = fallback.name();
    double scale = fallback.scale(), floor = fallback.floor();
    s.string("kind", kind);
    s.number("scale", scale);
    s.number("floor", floor);
    try {
        return Schedule::make(Schedule::parse_kind(kind), scale, floor);
    } catch (const std::invalid_argument& e) {
        s.fail("", e.what());
    }
}

void read_model(Section& s, ModelParams& m) {
    int n_b = m.N_b, n_e = m.N_e, n_h = m.N_h;
    double arrival_p = 0.4, harvest_p = 0.7;
    s.integer("N_b", n_b, 0, 4096);
    s.integer("N_e", n_e, 0, 4096);
    s.integer("N_h", n_h, 1, 1024);
    const bool has_ap = s.find("arrival_p") != nullptr;
    const bool has_hp = s.find("harvest_p") != nullptr;
    s.number("arrival_p", arrival_p);
    s.number("harvest_p", harvest_p);
    if (arrival_p < 0.0 || arrival_p > 1.0) s.fail("arrival_p", "must lie in [0, 1]");
    if (harvest_p < 0.0 || harvest_p > 1.0) s.fail("harvest_p", "must lie in [0, 1]");
    m = scaled_params(n_b, std::max(n_e, 1), n_h, arrival_p, harvest_p);
    m.N_e = n_e;

    s.integer("e_TX", m.e_TX, 0, 4096);
    s.number("eta", m.eta);
    s.number("gamma", m.gamma);
    s.vector("plr", m.plr);
    if (s.vector("arrival_dist", m.arrival_dist) && has_ap) s.fail("arrival_dist", "conflicts with arrival_p");
    if (s.vector("harvest_dist", m.harvest_dist) && has_hp) s.fail("harvest_dist", "conflicts with harvest_p");
    s.matrix("channel_matrix", m.channel_matrix);
    try {
        m.validate();
    } catch (const ContractError& e) {
        s.fail("", e.what());
    }
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

ExperimentSpec parse_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text.empty() ? std::string("{}") : text);
    } catch (const json::parse_error& e) {
        std::string what = e.what();
        const auto pos = what.find("; ");
        throw ConfigError(source + ": " + line_col(text, e.byte) + ": " +
                          (pos == std::string::npos ? what : what.substr(pos + 2)));
    }

    ExperimentSpec spec;
    Section root(doc, "", source);
    root.section("model", [&](Section& s) { read_model(s, spec.model); });
    root.section("sim", [&](Section& s) {
        s.unsigned64("seed", spec.sim.seed);
        s.integer("slots", spec.sim.horizon, 1, 1L << 40);
        std::vector<int> st;
        if (s.ints("initial_state", st, 3)) spec.sim.initial_state = {st[0], st[1], st[2]};
        s.boolean("fixed_initial_channel", spec.sim.fixed_initial_channel);
    });
    if (const json* a = root.find("algorithm")) {
        if (!a->is_string()) root.fail("algorithm", "expected a string");
        try {
            spec.algorithm = parse_algorithm(a->get<std::string>());
        } catch (const ConfigError& e) {
            root.fail("algorithm", e.what());
        }
    }
    root.section("learner", [&](Section& s) {
        s.section("beta", [&](Section& b) { spec.learner.beta = read_schedule(b, spec.learner.beta); });
        s.section("epsilon", [&](Section& b) { spec.learner.epsilon = read_schedule(b, spec.learner.epsilon); });
        s.integer("period", spec.learner.period, 1, 1L << 30);
        s.number("q_init", spec.learner.q_init);
        s.boolean("clamp", spec.learner.clamp);
    });
    root.section("grid", [&](Section& s) {
        s.number("delta", spec.grid.delta);
        s.integer("period", spec.grid.period, 1, 1L << 30);
        s.boolean("clamp", spec.grid.clamp);
        s.section("beta", [&](Section& b) { spec.grid.beta = read_schedule(b, spec.grid.beta); });
        std::vector<int> bb;
        if (s.ints("root_bb", bb, 4)) spec.grid.root_bb = BoundingBox{bb[0], bb[1], bb[2], bb[3]};
    });
    root.section("solver", [&](Section& s) {
        s.number("tol", spec.solver.tol);
        s.integer("max_iters", spec.solver.max_iters, 1, 1L << 30);
        std::string order = "gauss-seidel";
        s.string("order", order);
        if (order == "gauss-seidel") spec.solver.order = SweepOrder::gauss_seidel;
        else if (order == "jacobi") spec.solver.order = SweepOrder::jacobi;
        else s.fail("order", "expected gauss-seidel or jacobi");
    });
    root.integer("replicas", spec.replicas, 1, 1 << 20);
    root.integer("stride", spec.stride, 1, 1L << 40);
    root.string("output", spec.output);
    root.finish();
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace ehs
