#pragma once

// Experiment configuration, replica orchestration and CSV output.
// The JSON configuration schema is documented in docs/config.md.

#include "ehsched/dp.hpp"
#include "ehsched/grid_learner.hpp"
#include "ehsched/simulator.hpp"
#include "ehsched/tabular.hpp"

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehs {

/// Invalid configuration; the message names the offending field or line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { optimal, q_learning, pds, ve, grid };

std::string to_string(Algorithm a);
/// Accepts optimal, q-learning, pds, ve, grid (case-insensitive).
Algorithm parse_algorithm(const std::string& name);

struct ExperimentSpec {
    ModelParams model = default_params();
    SimConfig sim;
    Algorithm algorithm = Algorithm::grid;
    LearnerConfig learner = default_learner();
    GridLearnerConfig grid;
    SolverOptions solver;
    int replicas = 10;
    long stride = 100;
    std::string output; ///< empty: no CSV file

    /// Throws ConfigError.
    void validate() const;
    /// Series label: Optimal, Q-learning, PDS, VE-<T>, Grid-<T>.
    std::string label() const;

    static LearnerConfig default_learner() {
        LearnerConfig c;
        c.period = 10;
        return c;
    }
};

/// Parses a JSON document; every field is optional and missing ones keep
/// their defaults. `source` prefixes diagnostics.
ExperimentSpec parse_config(const std::string& text, const std::string& source = "config");
ExperimentSpec load_config(const std::string& path);

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<MetricsTrace> replicas; ///< in replica order
    std::vector<GridStats> grid_stats;  ///< final instrumentation (grid only)
    double solve_seconds = 0.0;         ///< optimal only
    double wall_seconds = 0.0;
    std::size_t total_updates = 0;

    /// Mean over replicas of a per-slot series at its last slot.
    double final_mean(const std::vector<double> MetricsTrace::*series) const;
    double final_mean_overflows() const;
};

/// Runs every replica (replica r uses seed + r) on up to `threads` threads;
/// 0 means std::thread::hardware_concurrency(). Results do not depend on the
/// thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 0);

/// Runs each spec; all must share the model and horizon.
std::vector<ExperimentResult> compare(const std::vector<ExperimentSpec>& specs, unsigned threads = 0);

bool same_model(const ModelParams& a, const ModelParams& b);

/// Columns: slot,replica,avg_buffer,avg_battery,cum_overflows,
/// updates_this_slot,grid_points,realized_cost. Rows at every stride-th slot
/// and at the final slot; slot counts elapsed slots (1-based).
void write_csv(std::ostream& os, const ExperimentResult& r);
/// As write_csv with a leading algorithm column, one block per result.
void write_compare_csv(std::ostream& os, const std::vector<ExperimentResult>& results);

void print_summary(std::ostream& os, const ExperimentResult& r);

/// Writes through a temporary file next to `path` and renames it into place.
/// The temporary is removed if the writer or the rename fails.
void write_file_atomically(const std::string& path, const std::function<void(std::ostream&)>& writer);

/// Invariant suite on the spec's model. Prints one PASS/FAIL/WARN line per
/// check and returns false if any check failed.
bool run_checks(const ExperimentSpec& spec, std::ostream& os);

} // namespace ehs
