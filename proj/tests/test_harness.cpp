#include "ehsched/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

using namespace ehs;

namespace {

ExperimentSpec small_spec(Algorithm a) {
    ExperimentSpec s = parse_config(R"({"model": {"N_b": 8, "N_e": 8, "N_h": 2},
                                        "sim": {"slots": 1000, "seed": 7}, "replicas": 3, "stride": 50})");
    s.algorithm = a;
    return s;
}

std::string csv_of(const ExperimentResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("an empty configuration gives the default parameters") {
    for (const char* text : {"", "{}"}) {
        const auto spec = parse_config(text);
        CHECK(same_model(spec.model, default_params()));
        CHECK(spec.model.N_b == 32);
        CHECK(spec.model.N_h == 8);
        CHECK(spec.model.gamma == 0.98);
        CHECK(spec.model.eta == 50.0);
        CHECK(spec.model.harvest_dist == bernoulli(0.7));
        CHECK(spec.sim.horizon == 50000);
        CHECK(spec.replicas == 10);
        CHECK(spec.stride == 100);
        CHECK(spec.learner.period == 10);
        CHECK(spec.grid.period == 10);
        CHECK(spec.grid.delta == 10.0);
    }
}

TEST_CASE("configuration fields are read and validated") {
    const auto spec = parse_config(R"({
        "model": {"N_b": 6, "N_e": 5, "N_h": 2, "gamma": 0.9, "eta": 10, "e_TX": 2,
                  "plr": [0.5, 0.2], "arrival_dist": [0.5, 0.25, 0.25], "harvest_p": 0.6,
                  "channel_matrix": [[0.9, 0.1], [0.3, 0.7]]},
        "sim": {"seed": 12, "slots": 300, "initial_state": [1, 2, 1], "fixed_initial_channel": true},
        "algorithm": "Q-learning",
        "learner": {"beta": {"kind": "constant", "scale": 0.1}, "period": 3, "q_init": 1.5},
        "grid": {"delta": 4.5, "period": 7, "root_bb": [0, 4, 1, 5]},
        "solver": {"tol": 1e-6, "order": "jacobi"},
        "replicas": 2, "stride": 10, "output": "x.csv"
    })");
    CHECK(spec.model.N_b == 6);
    CHECK(spec.model.e_TX == 2);
    CHECK(spec.model.harvest_dist == bernoulli(0.6));
    CHECK(spec.model.arrival_dist.size() == 3);
    CHECK(spec.sim.seed == 12);
    CHECK(spec.sim.initial_state == SystemState{1, 2, 1});
    CHECK(spec.algorithm == Algorithm::q_learning);
    CHECK(spec.learner.beta(100) == 0.1);
    CHECK(spec.learner.q_init == 1.5);
    CHECK(spec.grid.root_bb == BoundingBox{0, 4, 1, 5});
    CHECK(spec.solver.order == SweepOrder::jacobi);
    CHECK(spec.output == "x.csv");
    CHECK(spec.label() == "Q-learning");
}

TEST_CASE("invalid configurations are rejected with a located diagnostic") {
    CHECK(error_of(R"({"model": {"gamma": 1.0}})").find("gamma") != std::string::npos);
    CHECK(error_of(R"({"model": {"N_h": 2, "plr": [0.2, 0.5]}})").find("decreasing") != std::string::npos);
    CHECK(error_of(R"({"model": {"arrival_dist": [0.5, 0.4]}})").find("sum") != std::string::npos);
    CHECK(error_of(R"({"model": {"gama": 0.5}})").find("model.gama: unknown field") != std::string::npos);
    CHECK(error_of(R"({"model": {"N_b": "big"}})").find("model.N_b: expected an integer") != std::string::npos);
    CHECK(error_of(R"({"algorithm": "sarsa"})").find("algorithm") != std::string::npos);
    CHECK(error_of(R"({"replicas": 0})").find("replicas") != std::string::npos);
    CHECK(error_of(R"({"grid": {"delta": -1}})").find("delta") != std::string::npos);
    CHECK(error_of(R"({"model": {"arrival_p": 0.3, "arrival_dist": [0.7, 0.3]}})").find("conflicts") !=
          std::string::npos);
    const auto syntax = error_of("{\n  \"model\": {\n    \"N_b\": 4,,\n  }\n}");
    CHECK(syntax.find("cfg.json: line 3") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("the optimal policy run has no learning activity") {
    const auto r = run_experiment(small_spec(Algorithm::optimal), 1);
    REQUIRE(r.replicas.size() == 3);
    CHECK(r.total_updates == 0);
    for (const auto& t : r.replicas) {
        CHECK(t.size() == 1000);
        for (auto g : t.grid_points) CHECK(g == 0);
    }
}

TEST_CASE("CSV layout and sampling stride") {
    const auto r = run_experiment(small_spec(Algorithm::pds), 1);
    const auto ls = lines(csv_of(r));
    REQUIRE(!ls.empty());
    CHECK(ls[0] == "slot,replica,avg_buffer,avg_battery,cum_overflows,updates_this_slot,grid_points,realized_cost");
    CHECK(ls.size() == 1 + 3 * 20);
    CHECK(ls[1].rfind("50,0,", 0) == 0);
    CHECK(ls[20].rfind("1000,0,", 0) == 0);
    CHECK(ls[21].rfind("50,1,", 0) == 0);
    for (std::size_t i = 1; i < ls.size(); ++i) CHECK(std::count(ls[i].begin(), ls[i].end(), ',') == 7);

    auto odd = small_spec(Algorithm::pds);
    odd.stride = 300;
    const auto ls2 = lines(csv_of(run_experiment(odd, 1)));
    CHECK(ls2.size() == 1 + 3 * 4); // 300, 600, 900 and the final slot 1000
}

TEST_CASE("runs are byte-identical and independent of the thread count") {
    for (Algorithm a : {Algorithm::q_learning, Algorithm::grid, Algorithm::ve}) {
        const auto spec = small_spec(a);
        const auto one = csv_of(run_experiment(spec, 1));
        CHECK(one == csv_of(run_experiment(spec, 1)));
        CHECK(one == csv_of(run_experiment(spec, 3)));
    }
}

TEST_CASE("virtual experience update totals follow the sweep period") {
    ExperimentSpec spec;
    spec.algorithm = Algorithm::ve;
    spec.replicas = 1;
    const auto r = run_experiment(spec, 1);
    CHECK(r.total_updates == 5000u * 1089u);
}

TEST_CASE("compare produces one labeled series per algorithm") {
    std::vector<ExperimentSpec> specs;
    for (Algorithm a : {Algorithm::optimal, Algorithm::ve, Algorithm::grid, Algorithm::pds, Algorithm::q_learning})
        specs.push_back(small_spec(a));
    const auto results = compare(specs, 1);
    std::ostringstream os;
    write_compare_csv(os, results);
    const auto ls = lines(os.str());
    CHECK(ls[0].rfind("algorithm,slot,replica,", 0) == 0);
    std::map<std::string, int> rows;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto label = ls[i].substr(0, ls[i].find(','));
        ++rows[label];
        const auto last_comma = ls[i].rfind(',');
        const auto prev_comma = ls[i].rfind(',', last_comma - 1);
        const auto grid_points = std::stol(ls[i].substr(prev_comma + 1, last_comma - prev_comma - 1));
        if (label == "Grid-10") CHECK(grid_points > 0);
        else CHECK(grid_points == 0);
    }
    CHECK(rows.size() == 5);
    for (const char* name : {"Optimal", "VE-10", "Grid-10", "PDS", "Q-learning"}) CHECK(rows[name] == 60);

    CHECK(compare({small_spec(Algorithm::pds)}, 1).size() == 1);
    auto other = small_spec(Algorithm::ve);
    other.model.eta = 1.0;
    CHECK_THROWS_AS(compare({small_spec(Algorithm::pds), other}, 1), ConfigError);
    auto longer = small_spec(Algorithm::ve);
    longer.sim.horizon = 2000;
    CHECK_THROWS_AS(compare({small_spec(Algorithm::pds), longer}, 1), ConfigError);
}

TEST_CASE("output files are written atomically") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ehsched_test_out";
    fs::create_directories(dir);
    const fs::path target = dir / "run.csv";
    fs::remove(target);

    write_file_atomically(target.string(), [](std::ostream& os) { os << "a,b\n1,2\n"; });
    std::ifstream in(target);
    std::stringstream got;
    got << in.rdbuf();
    CHECK(got.str() == "a,b\n1,2\n");

    CHECK_THROWS(write_file_atomically(target.string(), [](std::ostream& os) {
        os << "partial";
        throw std::runtime_error("boom");
    }));
    CHECK(fs::exists(target));
    CHECK_FALSE(fs::exists(dir / "run.csv.partial"));
    std::ifstream again(target);
    std::stringstream kept;
    kept << again.rdbuf();
    CHECK(kept.str() == "a,b\n1,2\n");

    CHECK_THROWS(write_file_atomically((dir / "missing" / "x.csv").string(), [](std::ostream& os) { os << 1; }));
    fs::remove_all(dir);
}

TEST_CASE("the invariant suite passes on a small model") {
    std::ostringstream os;
    const bool ok = run_checks(small_spec(Algorithm::pds), os);
    CHECK(ok);
    CHECK(os.str().find("FAIL") == std::string::npos);
}
