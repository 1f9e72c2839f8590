#pragma once

// Adaptive quadtree over the buffer x battery lattice and the piecewise
// planar approximation of one channel's post-decision value function.
//
// Child order is NW, NE, SW, SE where "north" is high battery and "west" is
// low buffer. A leaf is split into a NW triangle {NW, SW, NE} and an SE
// triangle {SE, SW, NE}.

#include "ehsched/model.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ehs {

struct LatticePoint {
    int b = 0;
    int e = 0;
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

struct BoundingBox {
    int b_minus = 0;
    int b_plus = 1;
    int e_minus = 0;
    int e_plus = 1;

    /// Throws ContractError unless b_minus < b_plus and e_minus < e_plus.
    void validate() const;

    int b_mid() const { return (b_minus + b_plus) / 2; }
    int e_mid() const { return (e_minus + e_plus) / 2; }
    bool subdividable() const { return b_plus - b_minus >= 2 && e_plus - e_minus >= 2; }
    bool contains(int b, int e) const { return b >= b_minus && b <= b_plus && e >= e_minus && e <= e_plus; }

    LatticePoint nw() const { return {b_minus, e_plus}; }
    LatticePoint ne() const { return {b_plus, e_plus}; }
    LatticePoint sw() const { return {b_minus, e_minus}; }
    LatticePoint se() const { return {b_plus, e_minus}; }
    std::array<LatticePoint, 4> corners() const { return {nw(), ne(), sw(), se()}; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class Quadrant : std::uint8_t { nw = 0, ne = 1, sw = 2, se = 3 };
enum class Triangle : std::uint8_t { nw, se };

/// Boxes of the four children, in NW, NE, SW, SE order.
std::array<BoundingBox, 4> child_boxes(const BoundingBox& bb);

class Quadtree {
public:
    struct Node {
        BoundingBox bb;
        int first_child = -1; ///< children occupy first_child .. first_child + 3
        int depth = 0;
        bool is_leaf() const { return first_child < 0; }
    };

    Quadtree() = default;
    explicit Quadtree(const BoundingBox& root);

    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& root() const { return nodes_.front(); }
    int child(int id, Quadrant q) const { return node(id).first_child + static_cast<int>(q); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const { return leaves_; }
    int depth() const { return depth_; }

    /// Splits a leaf at the floor midpoints. Throws ContractError for an
    /// internal node or a leaf with a side shorter than 2.
    int subdivide(int leaf);

    /// Leaf owning (b, e). The point is clamped into the root box, then each
    /// level sends coordinates below the midpoint to the low child and ties to
    /// the high child. `steps` receives the number of descents.
    int find_leaf(int b, int e, int* steps = nullptr) const;

    /// Leaf ids in preorder (children visited NW, NE, SW, SE).
    std::vector<int> leaves() const;

private:
    std::vector<Node> nodes_;
    std::size_t leaves_ = 0;
    int depth_ = 0;
};

/// Values at the vertices of one channel's tree, stored densely over
/// [0, N_b] x [0, N_e] with a presence mask.
class VertexStore {
public:
    VertexStore() = default;
    VertexStore(int n_b, int n_e);

    bool has(int b, int e) const { return in_range(b, e) && present_[index(b, e)] != 0; }
    prec_t get(int b, int e) const;
    prec_t get(const LatticePoint& v) const { return get(v.b, v.e); }
    /// Adds the vertex if missing.
    void set(int b, int e, prec_t value);
    std::size_t size() const { return count_; }
    /// Vertices sorted by (b, e).
    std::vector<LatticePoint> vertices() const;

    int n_b() const { return n_b_; }
    int n_e() const { return n_e_; }

private:
    bool in_range(int b, int e) const { return b >= 0 && b <= n_b_ && e >= 0 && e <= n_e_; }
    std::size_t index(int b, int e) const { return static_cast<std::size_t>(b * (n_e_ + 1) + e); }

    int n_b_ = 0;
    int n_e_ = 0;
    std::vector<prec_t> values_;
    std::vector<std::uint8_t> present_;
    std::size_t count_ = 0;
};

struct PlanePoint {
    double b = 0.0;
    double e = 0.0;
    double v = 0.0;
};

/// Value at (b, e) of the plane through three non-collinear points.
double plane_value(const std::array<PlanePoint, 3>& pts, double b, double e);

/// NW triangle when the point is strictly closer to the NW corner than to the
/// SE corner (Euclidean), SE triangle otherwise.
Triangle select_triangle(const BoundingBox& bb, int b, int e);

std::array<LatticePoint, 3> triangle_vertices(const BoundingBox& bb, Triangle t);

/// Max minus min of the stored values at the four corners.
prec_t leaf_error(const BoundingBox& bb, const VertexStore& store);

/// Tree plus vertex values for one channel.
struct ChannelGrid {
    Quadtree tree;
    VertexStore store;

    /// Root leaf over bb, corners seeded with `init`. The store spans
    /// [0, n_b] x [0, n_e], which must contain bb.
    static ChannelGrid new_root(const BoundingBox& bb, int n_b, int n_e, prec_t init = 0.0);

    std::size_t vertex_count() const { return store.size(); }
};

/// Planar estimate from a leaf's own triangles (no vertex shortcut).
prec_t leaf_estimate(const ChannelGrid& g, int leaf, int b, int e);

/// Stored value at a vertex, otherwise find_leaf -> select_triangle ->
/// plane_value. Points outside the root box are extrapolated.
prec_t approximate_pdsv(const ChannelGrid& g, int b, int e, int* steps = nullptr);

/// Splits a leaf; vertices that do not exist yet get the parent's planar
/// estimate. Returns the number of vertices added (0..5).
int subdivide(ChannelGrid& g, int leaf);

struct GridUpdate {
    prec_t max_error = 0.0;  ///< max leaf error over all leaves before the call
    std::optional<int> split; ///< leaf that was subdivided, if any
    int new_vertices = 0;
};

/// Subdivides the subdividable leaf with the largest error (first in preorder
/// on ties) when that error exceeds delta.
GridUpdate update_grid(ChannelGrid& g, prec_t delta);

/// Largest leaf error over all leaves.
prec_t max_leaf_error(const ChannelGrid& g);

/// Text checkpoint of one channel grid:
///   bb <b-> <b+> <e-> <e+>
///   layout <preorder string, S = split node, L = leaf>
///   vertices <count>
///   <b> <e> <value>        (one per line, sorted by (b, e), %.17g)
void write_grid(std::ostream& os, const ChannelGrid& g);
/// Reads what write_grid produced into a store of size n_b x n_e.
/// Throws ContractError on malformed input.
ChannelGrid read_grid(std::istream& is, int n_b, int n_e);

} // namespace ehs
