#pragma once

// Grid learning: greedy control through the piecewise planar approximation,
// with a vertex sweep and one refinement step on the current channel's tree
// every `period` slots.

#include "ehsched/quadtree.hpp"
#include "ehsched/schedule.hpp"
#include "ehsched/simulator.hpp"
#include "ehsched/tabular.hpp"

#include <iosfwd>
#include <optional>

namespace ehs {

struct GridLearnerConfig {
    prec_t delta = 10.0;  ///< refinement threshold on leaf error
    int period = 10;      ///< T_grid
    Schedule beta = Schedule::harmonic(5000.0);
    std::optional<BoundingBox> root_bb; ///< defaults to [0, N_b] x [0, N_e]
    bool clamp = true;

    void validate(const ModelParams& p) const;
};

struct GridStats {
    std::vector<std::size_t> vertices_per_channel;
    std::vector<int> tree_depths;
    std::vector<std::size_t> leaf_counts;
    std::size_t updates_this_slot = 0;
    long sweeps = 0;
    long refinements = 0;
    // Operation counts accumulated over all value lookups.
    long lookups = 0;           ///< approximate_pdsv calls
    long vertex_hits = 0;       ///< lookups answered by a stored vertex
    long find_leaf_steps = 0;   ///< total descents
    long steps_over_depth = 0;  ///< descents exceeding the tree depth (should stay 0)
};

class GridLearner : public Controller {
public:
    GridLearner(ModelParams p, GridLearnerConfig cfg);

    Action act(const SystemState& s) override;
    void observe(const SlotFeedback& fb) override;
    std::size_t updates_last_slot() const override { return updates_; }
    /// Total vertices over all channel trees.
    std::size_t grid_points() const override;

    /// Updates every vertex of channel h's tree from the pre-sweep values.
    std::size_t sweep(int h, const ExperienceTuple& x, prec_t beta);

    /// Approximate post-decision value, counted in the instrumentation.
    prec_t value(int b, int e, int h) const;

    GridStats stats() const;
    const std::vector<ChannelGrid>& grids() const { return grids_; }
    std::vector<ChannelGrid>& grids() { return grids_; }
    long slot() const { return slot_; }
    const ModelParams& params() const { return p_; }

    /// Text checkpoint: header, slot counter, step-size schedule, then each
    /// channel grid in the quadtree checkpoint format.
    void save(std::ostream& os) const;
    /// Restores a checkpoint written by save() for the same model sizes.
    void load(std::istream& is);

private:
    ModelParams p_;
    GridLearnerConfig cfg_;
    prec_t vmax_;
    std::vector<ChannelGrid> grids_;
    long slot_ = 0;
    std::size_t updates_ = 0;
    long sweeps_ = 0;
    long refinements_ = 0;
    mutable long lookups_ = 0;
    mutable long vertex_hits_ = 0;
    mutable long steps_ = 0;
    mutable long steps_over_depth_ = 0;
};

} // namespace ehs
