#include "ehsched/grid_learner.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>

namespace ehs {

void GridLearnerConfig::validate(const ModelParams& p) const {
    if (!(delta > 0.0)) throw ContractError("grid delta must be positive");
    if (period < 1) throw ContractError("grid update period must be at least 1");
    if (root_bb) {
        root_bb->validate();
        if (root_bb->b_plus > p.N_b || root_bb->e_plus > p.N_e)
            throw ContractError("grid root box exceeds [0, N_b] x [0, N_e]");
    }
}

GridLearner::GridLearner(ModelParams p, GridLearnerConfig cfg)
    : p_(std::move(p)), cfg_(std::move(cfg)), vmax_(v_max(p_)) {
    p_.validate();
    cfg_.validate(p_);
    const BoundingBox bb = cfg_.root_bb.value_or(BoundingBox{0, p_.N_b, 0, p_.N_e});
    for (int h = 0; h < p_.N_h; ++h) grids_.push_back(ChannelGrid::new_root(bb, p_.N_b, p_.N_e));
}

prec_t GridLearner::value(int b, int e, int h) const {
    const auto& g = grids_[static_cast<std::size_t>(h)];
    int steps = 0;
    const prec_t v = approximate_pdsv(g, b, e, &steps);
    ++lookups_;
    if (g.store.has(b, e)) ++vertex_hits_;
    steps_ += steps;
    if (steps > g.tree.depth()) ++steps_over_depth_;
    return v;
}

Action GridLearner::act(const SystemState& s) {
    return greedy_action([this](int b, int e, int h) { return value(b, e, h); }, s, p_);
}

std::size_t GridLearner::sweep(int h, const ExperienceTuple& x, prec_t beta) {
    auto& g = grids_[static_cast<std::size_t>(h)];
    const auto verts = g.store.vertices();
    const auto src = [this](int b, int e, int hh) { return value(b, e, hh); };
    std::vector<prec_t> fresh(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) fresh[i] = update_pdsv(src, {verts[i].b, verts[i].e, h}, x, beta, p_);
    for (std::size_t i = 0; i < verts.size(); ++i)
        g.store.set(verts[i].b, verts[i].e, cfg_.clamp ? clamp_value(fresh[i], vmax_) : fresh[i]);
    ++sweeps_;
    return verts.size();
}

void GridLearner::observe(const SlotFeedback& fb) {
    updates_ = 0;
    if (slot_ % cfg_.period == 0) {
        const int h = fb.state.h;
        updates_ = sweep(h, fb.x, cfg_.beta(slot_));
        if (update_grid(grids_[static_cast<std::size_t>(h)], cfg_.delta).split) ++refinements_;
    }
    ++slot_;
}

std::size_t GridLearner::grid_points() const {
    return std::accumulate(grids_.begin(), grids_.end(), std::size_t{0},
                           [](std::size_t acc, const ChannelGrid& g) { return acc + g.vertex_count(); });
}

GridStats GridLearner::stats() const {
    GridStats s;
    for (const auto& g : grids_) {
        s.vertices_per_channel.push_back(g.vertex_count());
        s.tree_depths.push_back(g.tree.depth());
        s.leaf_counts.push_back(g.tree.leaf_count());
    }
    s.updates_this_slot = updates_;
    s.sweeps = sweeps_;
    s.refinements = refinements_;
    s.lookups = lookups_;
    s.vertex_hits = vertex_hits_;
    s.find_leaf_steps = steps_;
    s.steps_over_depth = steps_over_depth_;
    return s;
}

void GridLearner::save(std::ostream& os) const {
    char buf[64];
    os << "grid-learner 1\n";
    os << "model " << p_.N_b << ' ' << p_.N_e << ' ' << p_.N_h << '\n';
    os << "slot " << slot_ << '\n';
    std::snprintf(buf, sizeof buf, "%.17g %.17g", cfg_.beta.scale(), cfg_.beta.floor());
    os << "beta " << cfg_.beta.name() << ' ' << buf << '\n';
    for (int h = 0; h < p_.N_h; ++h) {
        os << "channel " << h << '\n';
        write_grid(os, grids_[static_cast<std::size_t>(h)]);
    }
}

void GridLearner::load(std::istream& is) {
    const auto fail = [](const std::string& what) { throw ContractError("grid-learner checkpoint: " + what); };
    std::string word;
    int version = 0;
    if (!(is >> word >> version) || word != "grid-learner" || version != 1) fail("bad header");
    int n_b = 0, n_e = 0, n_h = 0;
    if (!(is >> word >> n_b >> n_e >> n_h) || word != "model") fail("bad model line");
    if (n_b != p_.N_b || n_e != p_.N_e || n_h != p_.N_h) fail("model sizes differ from the configured model");
    long slot = 0;
    if (!(is >> word >> slot) || word != "slot" || slot < 0) fail("bad slot line");
    std::string kind, scale, floor;
    if (!(is >> word >> kind >> scale >> floor) || word != "beta") fail("bad beta line");
    const Schedule beta = Schedule::make(Schedule::parse_kind(kind), std::strtod(scale.c_str(), nullptr),
                                         std::strtod(floor.c_str(), nullptr));
    std::vector<ChannelGrid> grids;
    for (int h = 0; h < n_h; ++h) {
        int id = -1;
        if (!(is >> word >> id) || word != "channel" || id != h) fail("bad channel header");
        grids.push_back(read_grid(is, n_b, n_e));
    }
    grids_ = std::move(grids);
    slot_ = slot;
    cfg_.beta = beta;
    updates_ = 0;
}

} // namespace ehs
