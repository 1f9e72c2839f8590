#include "ehsched/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace ehs {

void BoundingBox::validate() const {
    if (b_minus < 0 || e_minus < 0 || b_minus >= b_plus || e_minus >= e_plus) {
        std::ostringstream os;
        os << "degenerate bounding box [" << b_minus << "," << b_plus << "]x[" << e_minus << "," << e_plus << "]";
        throw ContractError(os.str());
    }
}

std::array<BoundingBox, 4> child_boxes(const BoundingBox& bb) {
    const int bm = bb.b_mid(), em = bb.e_mid();
    return {BoundingBox{bb.b_minus, bm, em, bb.e_plus}, BoundingBox{bm, bb.b_plus, em, bb.e_plus},
            BoundingBox{bb.b_minus, bm, bb.e_minus, em}, BoundingBox{bm, bb.b_plus, bb.e_minus, em}};
}

Quadtree::Quadtree(const BoundingBox& root) {
    root.validate();
    nodes_.push_back({root, -1, 0});
    leaves_ = 1;
}

int Quadtree::subdivide(int leaf) {
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= nodes_.size()) throw ContractError("subdivide: no such node");
    const Node parent = node(leaf);
    if (!parent.is_leaf()) throw ContractError("subdivide: node is not a leaf");
    if (!parent.bb.subdividable()) throw ContractError("subdivide: cell has a side shorter than 2");
    const int first = static_cast<int>(nodes_.size());
    for (const auto& bb : child_boxes(parent.bb)) nodes_.push_back({bb, -1, parent.depth + 1});
    nodes_[static_cast<std::size_t>(leaf)].first_child = first;
    leaves_ += 3;
    depth_ = std::max(depth_, parent.depth + 1);
    return first;
}

int Quadtree::find_leaf(int b, int e, int* steps) const {
    const auto& rb = root().bb;
    b = std::clamp(b, rb.b_minus, rb.b_plus);
    e = std::clamp(e, rb.e_minus, rb.e_plus);
    int id = 0;
    int n = 0;
    while (!node(id).is_leaf()) {
        const auto& bb = node(id).bb;
        const bool west = b < bb.b_mid();
        const bool south = e < bb.e_mid();
        const Quadrant q = south ? (west ? Quadrant::sw : Quadrant::se) : (west ? Quadrant::nw : Quadrant::ne);
        id = child(id, q);
        ++n;
    }
    if (steps) *steps = n;
    return id;
}

std::vector<int> Quadtree::leaves() const {
    std::vector<int> out;
    out.reserve(leaves_);
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (node(id).is_leaf()) {
            out.push_back(id);
            continue;
        }
        for (int q = 3; q >= 0; --q) stack.push_back(node(id).first_child + q);
    }
    return out;
}

VertexStore::VertexStore(int n_b, int n_e)
    : n_b_(n_b), n_e_(n_e), values_(static_cast<std::size_t>((n_b + 1) * (n_e + 1)), 0.0),
      present_(values_.size(), 0) {
    if (n_b < 0 || n_e < 0) throw ContractError("vertex store needs non-negative sizes");
}

prec_t VertexStore::get(int b, int e) const {
    if (!has(b, e)) throw ContractError("no vertex at (" + std::to_string(b) + "," + std::to_string(e) + ")");
    return values_[index(b, e)];
}

void VertexStore::set(int b, int e, prec_t value) {
    if (!in_range(b, e))
        throw ContractError("vertex (" + std::to_string(b) + "," + std::to_string(e) + ") outside the lattice");
    const auto i = index(b, e);
    if (!present_[i]) {
        present_[i] = 1;
        ++count_;
    }
    values_[i] = value;
}

std::vector<LatticePoint> VertexStore::vertices() const {
    std::vector<LatticePoint> out;
    out.reserve(count_);
    for (int b = 0; b <= n_b_; ++b)
        for (int e = 0; e <= n_e_; ++e)
            if (present_[index(b, e)]) out.push_back({b, e});
    return out;
}

double plane_value(const std::array<PlanePoint, 3>& x, double b, double e) {
    // n = (x1 - x2) x (x1 - x3)
    const double ub = x[0].b - x[1].b, ue = x[0].e - x[1].e, uv = x[0].v - x[1].v;
    const double wb = x[0].b - x[2].b, we = x[0].e - x[2].e, wv = x[0].v - x[2].v;
    const double n1 = ue * wv - uv * we;
    const double n2 = uv * wb - ub * wv;
    const double n3 = ub * we - ue * wb;
    if (n3 == 0.0) throw ContractError("plane_value: collinear points");
    return x[0].v - (n1 * (b - x[0].b) + n2 * (e - x[0].e)) / n3;
}

Triangle select_triangle(const BoundingBox& bb, int b, int e) {
    const double d1 = std::hypot(b - bb.b_minus, e - bb.e_plus);
    const double d2 = std::hypot(b - bb.b_plus, e - bb.e_minus);
    return d1 < d2 ? Triangle::nw : Triangle::se;
}

std::array<LatticePoint, 3> triangle_vertices(const BoundingBox& bb, Triangle t) {
    return {t == Triangle::nw ? bb.nw() : bb.se(), bb.sw(), bb.ne()};
}

prec_t leaf_error(const BoundingBox& bb, const VertexStore& store) {
    prec_t lo = store.get(bb.nw()), hi = lo;
    for (const auto& c : bb.corners()) {
        lo = std::min(lo, store.get(c));
        hi = std::max(hi, store.get(c));
    }
    return hi - lo;
}

ChannelGrid ChannelGrid::new_root(const BoundingBox& bb, int n_b, int n_e, prec_t init) {
    bb.validate();
    if (bb.b_plus > n_b || bb.e_plus > n_e) throw ContractError("root box exceeds the state lattice");
    ChannelGrid g{Quadtree(bb), VertexStore(n_b, n_e)};
    for (const auto& c : bb.corners()) g.store.set(c.b, c.e, init);
    return g;
}

prec_t leaf_estimate(const ChannelGrid& g, int leaf, int b, int e) {
    const auto& bb = g.tree.node(leaf).bb;
    const auto tri = triangle_vertices(bb, select_triangle(bb, b, e));
    std::array<PlanePoint, 3> pts;
    for (std::size_t i = 0; i < 3; ++i) pts[i] = {double(tri[i].b), double(tri[i].e), g.store.get(tri[i])};
    return plane_value(pts, b, e);
}

prec_t approximate_pdsv(const ChannelGrid& g, int b, int e, int* steps) {
    if (g.store.has(b, e)) {
        if (steps) *steps = 0;
        return g.store.get(b, e);
    }
    return leaf_estimate(g, g.tree.find_leaf(b, e, steps), b, e);
}

int subdivide(ChannelGrid& g, int leaf) {
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= g.tree.node_count())
        throw ContractError("subdivide: no such node");
    const BoundingBox bb = g.tree.node(leaf).bb;
    if (!g.tree.node(leaf).is_leaf()) throw ContractError("subdivide: node is not a leaf");
    if (!bb.subdividable()) throw ContractError("subdivide: cell has a side shorter than 2");
    const int bm = bb.b_mid(), em = bb.e_mid();
    const std::array<LatticePoint, 5> fresh{
        LatticePoint{bm, bb.e_minus}, {bm, bb.e_plus}, {bb.b_minus, em}, {bb.b_plus, em}, {bm, em}};
    std::array<std::optional<prec_t>, 5> values;
    for (std::size_t i = 0; i < fresh.size(); ++i)
        if (!g.store.has(fresh[i].b, fresh[i].e)) values[i] = leaf_estimate(g, leaf, fresh[i].b, fresh[i].e);
    g.tree.subdivide(leaf);
    int added = 0;
    for (std::size_t i = 0; i < fresh.size(); ++i)
        if (values[i]) {
            g.store.set(fresh[i].b, fresh[i].e, *values[i]);
            ++added;
        }
    return added;
}

prec_t max_leaf_error(const ChannelGrid& g) {
    prec_t worst = 0.0;
    for (int id : g.tree.leaves()) worst = std::max(worst, leaf_error(g.tree.node(id).bb, g.store));
    return worst;
}

GridUpdate update_grid(ChannelGrid& g, prec_t delta) {
    GridUpdate out;
    int best = -1;
    prec_t best_err = -1.0;
    for (int id : g.tree.leaves()) {
        const auto& bb = g.tree.node(id).bb;
        const prec_t err = leaf_error(bb, g.store);
        out.max_error = std::max(out.max_error, err);
        if (bb.subdividable() && err > best_err) {
            best_err = err;
            best = id;
        }
    }
    if (best >= 0 && best_err > delta) {
        out.new_vertices = subdivide(g, best);
        out.split = best;
    }
    return out;
}

void write_grid(std::ostream& os, const ChannelGrid& g) {
    const auto& rb = g.tree.root().bb;
    os << "bb " << rb.b_minus << ' ' << rb.b_plus << ' ' << rb.e_minus << ' ' << rb.e_plus << '\n';
    std::string layout;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (g.tree.node(id).is_leaf()) {
            layout += 'L';
            continue;
        }
        layout += 'S';
        for (int q = 3; q >= 0; --q) stack.push_back(g.tree.node(id).first_child + q);
    }
    os << "layout " << layout << '\n';
    const auto verts = g.store.vertices();
    os << "vertices " << verts.size() << '\n';
    char buf[64];
    for (const auto& v : verts) {
        std::snprintf(buf, sizeof buf, "%.17g", g.store.get(v));
        os << v.b << ' ' << v.e << ' ' << buf << '\n';
    }
}

namespace {

void expect_word(std::istream& is, const char* word) {
    std::string got;
    if (!(is >> got) || got != word) throw ContractError(std::string("grid checkpoint: expected '") + word + "'");
}

} // namespace

ChannelGrid read_grid(std::istream& is, int n_b, int n_e) {
    BoundingBox bb;
    expect_word(is, "bb");
    if (!(is >> bb.b_minus >> bb.b_plus >> bb.e_minus >> bb.e_plus)) throw ContractError("grid checkpoint: bad bb");
    ChannelGrid g{Quadtree(bb), VertexStore(n_b, n_e)};
    if (bb.b_plus > n_b || bb.e_plus > n_e) throw ContractError("grid checkpoint: bb exceeds the lattice");

    expect_word(is, "layout");
    std::string layout;
    if (!(is >> layout)) throw ContractError("grid checkpoint: missing layout");
    // Replay the preorder layout: a split at position i applies to the next
    // pending node, whose children are then visited NW first.
    std::vector<int> pending{0};
    for (char c : layout) {
        if (pending.empty()) throw ContractError("grid checkpoint: layout too long");
        const int id = pending.back();
        pending.pop_back();
        if (c == 'S') {
            if (!g.tree.node(id).bb.subdividable()) throw ContractError("grid checkpoint: split of a unit cell");
            const int first = g.tree.subdivide(id);
            for (int q = 3; q >= 0; --q) pending.push_back(first + q);
        } else if (c != 'L') {
            throw ContractError("grid checkpoint: bad layout symbol");
        }
    }
    if (!pending.empty()) throw ContractError("grid checkpoint: layout too short");

    expect_word(is, "vertices");
    std::size_t count = 0;
    if (!(is >> count)) throw ContractError("grid checkpoint: bad vertex count");
    for (std::size_t i = 0; i < count; ++i) {
        int b = 0, e = 0;
        std::string value;
        if (!(is >> b >> e >> value)) throw ContractError("grid checkpoint: truncated vertex list");
        g.store.set(b, e, std::strtod(value.c_str(), nullptr));
    }
    for (int id : g.tree.leaves())
        for (const auto& c : g.tree.node(id).bb.corners())
            if (!g.store.has(c.b, c.e)) throw ContractError("grid checkpoint: leaf corner without a value");
    return g;
}

} // namespace ehs
