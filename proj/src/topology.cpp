#include "chainprop/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "chainprop/errors.hpp"
#include "chainprop/rng.hpp"

namespace chainprop {

namespace {

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidParameter("malformed " + what + ": '" + text + "'");
    }
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class T>
std::uint64_t fnv1a(std::uint64_t h, const T& value) {
    return fnv1a(h, &value, sizeof(T));
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const NodeId& n) {
    return os << '(' << n.x << ',' << n.y << ')';
}

double long_link_probability(int distance, double beta) {
    if (distance < 2) {
        throw InvalidPair("long-range links need lattice distance >= 2, got " + std::to_string(distance));
    }
    if (!(beta > 0.0)) throw InvalidParameter("long-range factor beta must be > 0");
    return std::pow(static_cast<double>(distance), -beta);
}

double long_link_probability(const NodeId& a, const NodeId& b, double beta) {
    return long_link_probability(lattice_distance(a, b), beta);
}

int layer_index(int distance) {
    if (distance <= 0) return -1;
    if (distance == 1) return 0;
    int j = 0;
    int bound = 1;
    while (bound < distance) {
        bound *= 2;
        ++j;
    }
    return j;
}

GridShape GridShape::square(int n) {
    if (n < 1) throw InvalidParameter("square side must be >= 1");
    return {Kind::square, n};
}

GridShape GridShape::diamond(int radius) {
    if (radius < 0) throw InvalidParameter("diamond radius must be >= 0");
    return {Kind::diamond, radius};
}

GridShape GridShape::parse(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw InvalidParameter("shape must be 'square:N' or 'diamond:R', got '" + text + "'");
    const int size = parse_int(parts[1], "shape size");
    if (parts[0] == "square") return square(size);
    if (parts[0] == "diamond") return diamond(size);
    throw InvalidParameter("unknown shape kind '" + parts[0] + "'");
}

std::size_t GridShape::node_count() const {
    const auto s = static_cast<std::size_t>(size_);
    return kind_ == Kind::square ? s * s : 2 * s * s + 2 * s + 1;
}

bool GridShape::contains(const NodeId& n) const {
    const int e = extent();
    if (n.x < 1 || n.y < 1 || n.x > e || n.y > e) return false;
    if (kind_ == Kind::square) return true;
    return lattice_distance(n, center()) <= size_;
}

NodeId GridShape::center() const {
    if (kind_ == Kind::diamond) return {size_ + 1, size_ + 1};
    return {(size_ + 1) / 2, (size_ + 1) / 2};
}

std::string GridShape::to_string() const {
    return (kind_ == Kind::square ? "square:" : "diamond:") + std::to_string(size_);
}

LongRangeScope LongRangeScope::parse(const std::string& text) {
    if (text == "all_pairs") return all_pairs();
    const auto parts = split(text, ':');
    if (parts.size() == 3 && parts[0] == "adjacent_layers") {
        return adjacent_layers({parse_int(parts[1], "scope source x"), parse_int(parts[2], "scope source y")});
    }
    throw InvalidParameter("scope must be 'all_pairs' or 'adjacent_layers:X:Y', got '" + text + "'");
}

std::string LongRangeScope::to_string() const {
    if (kind == Kind::all_pairs) return "all_pairs";
    return "adjacent_layers:" + std::to_string(source.x) + ":" + std::to_string(source.y);
}

Topology::Topology(GridShape shape, double beta, LongRangeScope scope, std::uint64_t seed)
    : shape_(shape), beta_(beta), scope_(scope), seed_(seed) {
    if (!(beta > 0.0)) throw InvalidParameter("long-range factor beta must be > 0");
    if (scope.kind == LongRangeScope::Kind::adjacent_layers && !shape.contains(scope.source)) {
        throw OutOfBounds("adjacent-layer source is outside the grid");
    }
    const int e = shape.extent();
    lookup_.assign(static_cast<std::size_t>(e) * static_cast<std::size_t>(e), -1);
    nodes_.reserve(shape.node_count());
    for (int y = 1; y <= e; ++y) {
        for (int x = 1; x <= e; ++x) {
            if (!shape.contains({x, y})) continue;
            lookup_[static_cast<std::size_t>(y - 1) * e + (x - 1)] = static_cast<std::ptrdiff_t>(nodes_.size());
            nodes_.push_back({x, y});
        }
    }
    adjacency_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NodeId n = nodes_[i];
        // Right and down neighbours only, so each short edge is added once.
        for (const NodeId m : {NodeId{n.x + 1, n.y}, NodeId{n.x, n.y + 1}}) {
            if (const auto j = index_of(m)) add_edge(i, *j, EdgeKind::short_range);
        }
    }
}

std::optional<std::size_t> Topology::index_of(const NodeId& n) const {
    const int e = shape_.extent();
    if (n.x < 1 || n.y < 1 || n.x > e || n.y > e) return std::nullopt;
    const auto v = lookup_[static_cast<std::size_t>(n.y - 1) * e + (n.x - 1)];
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
}

std::size_t Topology::require_index(const NodeId& n) const {
    if (const auto i = index_of(n)) return *i;
    std::ostringstream msg;
    msg << "node " << n << " is outside " << shape_.to_string();
    throw OutOfBounds(msg.str());
}

void Topology::add_edge(std::size_t a, std::size_t b, EdgeKind kind) {
    if (a > b) std::swap(a, b);
    (kind == EdgeKind::short_range ? short_edges_ : long_edges_).push_back({a, b, kind});
    adjacency_[a].push_back({b, kind});
    adjacency_[b].push_back({a, kind});
}

Topology Topology::build(const GridShape& shape, double beta, LongRangeScope scope, std::uint64_t seed) {
    Topology topo(shape, beta, scope, seed);
    const bool layered = scope.kind == LongRangeScope::Kind::adjacent_layers;
    std::vector<int> layer(topo.nodes_.size(), -1);
    if (layered) {
        for (std::size_t i = 0; i < layer.size(); ++i) {
            layer[i] = layer_index(lattice_distance(scope.source, topo.nodes_[i]));
        }
    }

    Rng rng(seed);
    const std::size_t n = topo.nodes_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const int d = lattice_distance(topo.nodes_[i], topo.nodes_[j]);
            if (d < 2) continue;
            // The source has no layer, so it never carries a long link in layered mode.
            if (layered && (layer[i] < 0 || layer[j] < 0 || std::abs(layer[i] - layer[j]) != 1)) continue;
            if (rng.uniform() < long_link_probability(d, beta)) topo.add_edge(i, j, EdgeKind::long_range);
        }
    }
    return topo;
}

Topology Topology::from_long_edges(const GridShape& shape, double beta, LongRangeScope scope,
                                   std::uint64_t seed,
                                   const std::vector<std::pair<NodeId, NodeId>>& long_pairs) {
    Topology topo(shape, beta, scope, seed);
    for (const auto& [u, v] : long_pairs) {
        const std::size_t a = topo.require_index(u);
        const std::size_t b = topo.require_index(v);
        if (lattice_distance(u, v) < 2) throw InvalidPair("long edge endpoints must be at distance >= 2");
        if (topo.edge_between(u, v)) throw InvalidPair("duplicate long edge");
        topo.add_edge(a, b, EdgeKind::long_range);
    }
    return topo;
}

std::optional<EdgeKind> Topology::edge_between(const NodeId& a, const NodeId& b) const {
    const auto ia = index_of(a);
    const auto ib = index_of(b);
    if (!ia || !ib) return std::nullopt;
    for (const Neighbor& nb : adjacency_[*ia]) {
        if (nb.node == *ib) return nb.kind;
    }
    return std::nullopt;
}

std::uint64_t Topology::fingerprint() const {
    std::uint64_t h = fnv_offset;
    const std::string header = shape_.to_string() + "|" + scope_.to_string();
    h = fnv1a(h, header.data(), header.size());
    h = fnv1a(h, beta_);
    h = fnv1a(h, seed_);
    for (const auto* list : {&short_edges_, &long_edges_}) {
        for (const Edge& e : *list) {
            h = fnv1a(h, e.a);
            h = fnv1a(h, e.b);
        }
    }
    return h;
}

void Topology::write_edge_list(std::ostream& os) const {
    std::ostringstream beta;
    beta.precision(17);
    beta << beta_;
    os << "# shape=" << shape_.to_string() << " beta=" << beta.str() << " scope=" << scope_.to_string()
       << " seed=" << seed_ << '\n';
    for (const auto* list : {&short_edges_, &long_edges_}) {
        for (const Edge& e : *list) {
            const NodeId& a = nodes_[e.a];
            const NodeId& b = nodes_[e.b];
            os << a.x << ',' << a.y << ',' << b.x << ',' << b.y << ','
               << (e.kind == EdgeKind::short_range ? 'S' : 'L') << '\n';
        }
    }
}

Topology Topology::read_edge_list(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
        throw InvalidParameter("edge list must start with a '# shape=... beta=... scope=... seed=...' header");
    }
    std::map<std::string, std::string> fields;
    std::istringstream header(line.substr(2));
    std::string token;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw InvalidParameter("malformed header token '" + token + "'");
        fields[token.substr(0, eq)] = token.substr(eq + 1);
    }
    for (const char* key : {"shape", "beta", "scope", "seed"}) {
        if (!fields.count(key)) throw InvalidParameter(std::string("edge list header lacks '") + key + "'");
    }
    const GridShape shape = GridShape::parse(fields["shape"]);
    const LongRangeScope scope = LongRangeScope::parse(fields["scope"]);
    double beta = 0.0;
    std::uint64_t seed = 0;
    try {
        beta = std::stod(fields["beta"]);
        seed = std::stoull(fields["seed"]);
    } catch (const std::exception&) {
        throw InvalidParameter("malformed beta or seed in edge list header");
    }

    std::vector<std::pair<NodeId, NodeId>> long_pairs;
    std::size_t short_count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 5) throw InvalidParameter("edge line needs 5 columns: '" + line + "'");
        const NodeId a{parse_int(cols[0], "x1"), parse_int(cols[1], "y1")};
        const NodeId b{parse_int(cols[2], "x2"), parse_int(cols[3], "y2")};
        if (cols[4] == "L") {
            long_pairs.emplace_back(a, b);
        } else if (cols[4] == "S") {
            if (lattice_distance(a, b) != 1 || !shape.contains(a) || !shape.contains(b)) {
                throw InvalidPair("short edge must join in-bounds lattice neighbours: '" + line + "'");
            }
            ++short_count;
        } else {
            throw InvalidParameter("edge kind must be S or L: '" + line + "'");
        }
    }
    Topology topo = from_long_edges(shape, beta, scope, seed, long_pairs);
    if (short_count != topo.short_edges_.size()) {
        throw InvalidParameter("edge list short-edge count does not match the declared shape");
    }
    return topo;
}

std::uint64_t analytic_layer_population(int j) {
    if (j < 0) throw InvalidParameter("layer index must be >= 0");
    if (j == 0) return 4;
    return 3ULL * (1ULL << (2 * j - 1)) + (1ULL << j);
}

LayerDecomposition decompose_layers(const Topology& topology, const NodeId& source) {
    const std::size_t s = topology.require_index(source);
    LayerDecomposition out;
    out.source = source;
    out.layer_of.assign(topology.node_count(), -1);
    int max_distance = 0;
    for (std::size_t i = 0; i < topology.node_count(); ++i) {
        if (i == s) continue;
        const int d = lattice_distance(source, topology.node(i));
        max_distance = std::max(max_distance, d);
        const int j = layer_index(d);
        out.layer_of[i] = j;
        ++out.actual_counts[j];
    }
    out.max_layer = max_distance <= 1 ? 0 : layer_index(max_distance);
    for (int j = 0; j <= out.max_layer; ++j) out.analytic_counts[j] = analytic_layer_population(j);
    return out;
}

double expansivity(const Topology& topology, const NodeId& u, const NodeId& v) {
    const auto kind = topology.edge_between(u, v);
    if (!kind) {
        std::ostringstream msg;
        msg << "no edge between " << u << " and " << v;
        throw NoSuchEdge(msg.str());
    }
    if (*kind == EdgeKind::short_range) return 0.0;
    const int d = lattice_distance(u, v);
    return long_link_probability(d, topology.beta()) * layer_index(d);
}

}  // namespace chainprop
