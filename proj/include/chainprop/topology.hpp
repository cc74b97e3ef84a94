#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chainprop {

// Lattice point. Coordinates are 1-based.
struct NodeId {
    int x = 1;
    int y = 1;

    friend constexpr bool operator==(const NodeId&, const NodeId&) = default;
    friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

std::ostream& operator<<(std::ostream& os, const NodeId& n);

// Manhattan distance: the number of lattice steps separating two nodes.
constexpr int lattice_distance(const NodeId& a, const NodeId& b) {
    const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return dx + dy;
}

// d^-beta for a pair at distance >= 2.
// Throws InvalidPair for d < 2 and InvalidParameter for beta <= 0.
double long_link_probability(const NodeId& a, const NodeId& b, double beta);
double long_link_probability(int distance, double beta);

// Layer index of a node at `distance` from the creator: 0 for d = 1,
// j >= 1 for 2^(j-1) < d <= 2^j. Returns -1 for d = 0.
int layer_index(int distance);

class GridShape {
public:
    enum class Kind { square, diamond };

    static GridShape square(int n);
    // All lattice points within Manhattan distance r of the centre (r+1, r+1).
    static GridShape diamond(int radius);
    // "square:N" or "diamond:R".
    static GridShape parse(const std::string& text);

    Kind kind() const { return kind_; }
    int size() const { return size_; }
    // Side length of the bounding box.
    int extent() const { return kind_ == Kind::square ? size_ : 2 * size_ + 1; }
    std::size_t node_count() const;
    bool contains(const NodeId& n) const;
    // Diamond centre, or the (upper-left of the) square centre.
    NodeId center() const;
    std::string to_string() const;

    friend bool operator==(const GridShape&, const GridShape&) = default;

private:
    GridShape(Kind kind, int size) : kind_(kind), size_(size) {}

    Kind kind_;
    int size_;
};

struct LongRangeScope {
    enum class Kind { all_pairs, adjacent_layers };

    Kind kind = Kind::all_pairs;
    // Only meaningful for adjacent_layers.
    NodeId source{};

    static LongRangeScope all_pairs() { return {}; }
    static LongRangeScope adjacent_layers(NodeId source) {
        return {Kind::adjacent_layers, source};
    }
    // "all_pairs" or "adjacent_layers:X:Y".
    static LongRangeScope parse(const std::string& text);
    std::string to_string() const;

    friend bool operator==(const LongRangeScope&, const LongRangeScope&) = default;
};

enum class EdgeKind { short_range, long_range };

struct Edge {
    std::size_t a = 0;  // node index, a < b
    std::size_t b = 0;
    EdgeKind kind = EdgeKind::short_range;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    std::size_t node;
    EdgeKind kind;
};

// Immutable lattice overlay: deterministic short-range links plus long-range
// links sampled once per eligible pair. Nodes are indexed in row-major order
// (by y, then x).
class Topology {
public:
    // One uniform draw per eligible pair, in canonical pair order; the pair
    // carries a long edge iff draw < d^-beta.
    static Topology build(const GridShape& shape, double beta, LongRangeScope scope, std::uint64_t seed);

    // Explicit edge list; used by import and by tests that need hand-made overlays.
    // Short edges are always generated; `long_pairs` must be at distance >= 2.
    static Topology from_long_edges(const GridShape& shape, double beta, LongRangeScope scope,
                                    std::uint64_t seed,
                                    const std::vector<std::pair<NodeId, NodeId>>& long_pairs);

    const GridShape& shape() const { return shape_; }
    double beta() const { return beta_; }
    const LongRangeScope& scope() const { return scope_; }
    std::uint64_t seed() const { return seed_; }

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<NodeId>& nodes() const { return nodes_; }
    const NodeId& node(std::size_t i) const { return nodes_.at(i); }
    std::optional<std::size_t> index_of(const NodeId& n) const;
    // Throws OutOfBounds.
    std::size_t require_index(const NodeId& n) const;

    const std::vector<Edge>& short_edges() const { return short_edges_; }
    const std::vector<Edge>& long_edges() const { return long_edges_; }
    const std::vector<Neighbor>& neighbors(std::size_t i) const { return adjacency_.at(i); }

    std::optional<EdgeKind> edge_between(const NodeId& a, const NodeId& b) const;

    // Stable 64-bit digest of shape, beta, scope, seed and the edge set.
    std::uint64_t fingerprint() const;

    // Plain-text edge list: one header line, then `x1,y1,x2,y2,S|L` per edge.
    void write_edge_list(std::ostream& os) const;
    static Topology read_edge_list(std::istream& is);

private:
    Topology(GridShape shape, double beta, LongRangeScope scope, std::uint64_t seed);
    void add_edge(std::size_t a, std::size_t b, EdgeKind kind);

    GridShape shape_;
    double beta_;
    LongRangeScope scope_;
    std::uint64_t seed_;
    std::vector<NodeId> nodes_;
    std::vector<std::ptrdiff_t> lookup_;  // extent*extent, -1 when outside the shape
    std::vector<Edge> short_edges_;
    std::vector<Edge> long_edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

// Population of layer j on an unbounded lattice: 4 for j = 0,
// 3*2^(2j-1) + 2^j for j >= 1.
std::uint64_t analytic_layer_population(int j);

// Source-relative partition of the non-source nodes into layers.
struct LayerDecomposition {
    NodeId source;
    std::vector<int> layer_of;  // per node index; -1 for the source
    std::map<int, std::size_t> actual_counts;
    std::map<int, std::uint64_t> analytic_counts;
    int max_layer = 0;  // J = ceil(log2(max distance from source))
};

LayerDecomposition decompose_layers(const Topology& topology, const NodeId& source);

// P_long(u,v) times the layer index of v relative to u; 0 for short-range edges.
// Throws NoSuchEdge when the pair is not linked.
double expansivity(const Topology& topology, const NodeId& u, const NodeId& v);

}  // namespace chainprop
