#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "chainprop/errors.hpp"
#include "chainprop/propsim.hpp"
#include "oracles.hpp"

using namespace chainprop;

TEST_CASE("pure grid receive time is the lattice distance") {
    const auto shape = GridShape::diamond(6);
    const Topology t = Topology::build(shape, 1000.0, LongRangeScope::all_pairs(), 0);
    REQUIRE(t.long_edges().empty());
    const PropagationTrace tr = simulate_propagation(t, shape.center(), 1.0, 1.5);
    for (std::size_t i = 0; i < t.node_count(); ++i) {
        CHECK(tr.receive_time[i] == lattice_distance(shape.center(), t.node(i)));
    }
    CHECK(tr.time_of(shape.center()) == 0.0);
    CHECK(tr.max_receive_time() == 6.0);
}

TEST_CASE("a single long edge shortcuts its endpoint") {
    const auto shape = GridShape::diamond(8);
    const NodeId s = shape.center();
    const NodeId w{s.x + 3, s.y + 3};
    const Topology t = Topology::from_long_edges(shape, 1.0, LongRangeScope::all_pairs(), 0, {{s, w}});
    const PropagationTrace tr = simulate_propagation(t, s, 1.0, 1.5);
    CHECK(tr.time_of(w) == 1.5);
    CHECK(tr.time_of({s.x + 4, s.y + 3}) == 2.5);
    CHECK(tr.time_of({s.x - 3, s.y - 3}) == 6.0);
}

TEST_CASE("propagation preconditions") {
    const Topology t = Topology::build(GridShape::square(4), 1.0, LongRangeScope::all_pairs(), 0);
    CHECK_THROWS_AS(simulate_propagation(t, {9, 9}, 1.0, 1.5), OutOfBounds);
    CHECK_THROWS_AS(simulate_propagation(t, {1, 1}, 0.0, 1.5), InvalidParameter);
    CHECK_THROWS_AS(simulate_propagation(t, {1, 1}, 2.0, 1.5), InvalidParameter);
}

TEST_CASE("5x5 grid with three random long edges matches the event-loop oracle") {
    const auto shape = GridShape::square(5);
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<int> coord(1, 5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<NodeId, NodeId>> edges;
        while (edges.size() < 3) {
            const NodeId a{coord(gen), coord(gen)};
            const NodeId b{coord(gen), coord(gen)};
            if (lattice_distance(a, b) < 2) continue;
            bool dup = false;
            for (const auto& [u, v] : edges) dup = dup || (u == a && v == b) || (u == b && v == a);
            if (!dup) edges.emplace_back(a, b);
        }
        const Topology t = Topology::from_long_edges(shape, 1.0, LongRangeScope::all_pairs(), trial, edges);
        const NodeId src{coord(gen), coord(gen)};
        const PropagationTrace tr = simulate_propagation(t, src, 1.0, 1.5);
        CHECK(tr.receive_time == oracle::naive_event_propagation(t, *t.index_of(src), 1.0, 1.5));
    }
}

TEST_CASE("priority-queue propagation equals the event loop on small diamonds") {
    std::mt19937_64 gen(77);
    const double betas[] = {0.5, 1.0, 2.0, 10.0};
    for (int r = 1; r <= 4; ++r) {
        const auto shape = GridShape::diamond(r);
        for (int k = 0; k < 8; ++k) {
            const double beta = betas[gen() % 4];
            const Topology t = Topology::build(shape, beta, LongRangeScope::all_pairs(), gen());
            const std::size_t src = gen() % t.node_count();
            const PropagationTrace tr = simulate_propagation(t, t.node(src), 1.0, 2.25);
            CHECK(tr.receive_time == oracle::naive_event_propagation(t, src, 1.0, 2.25));
        }
    }
}

TEST_CASE("receive times satisfy the relaxation identity") {
    const auto shape = GridShape::diamond(7);
    const Topology t = Topology::build(shape, 1.0, LongRangeScope::all_pairs(), 8);
    const PropagationTrace tr = simulate_propagation(t, shape.center(), 1.0, 1.5);
    const std::size_t s = *t.index_of(shape.center());
    for (std::size_t v = 0; v < t.node_count(); ++v) {
        CHECK(std::isfinite(tr.receive_time[v]));
        if (v == s) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const Neighbor& nb : t.neighbors(v)) {
            best = std::min(best, tr.receive_time[nb.node] + (nb.kind == EdgeKind::short_range ? 1.0 : 1.5));
        }
        CHECK(tr.receive_time[v] == best);
    }
}

TEST_CASE("adding a long edge never delays any node") {
    const auto shape = GridShape::diamond(6);
    std::mt19937_64 gen(3);
    const auto n = shape.node_count();
    for (int trial = 0; trial < 20; ++trial) {
        const Topology base = Topology::build(shape, 2.0, LongRangeScope::all_pairs(), gen());
        std::vector<std::pair<NodeId, NodeId>> pairs;
        for (const Edge& e : base.long_edges()) pairs.emplace_back(base.node(e.a), base.node(e.b));
        NodeId a{}, b{};
        do {
            a = base.node(gen() % n);
            b = base.node(gen() % n);
        } while (lattice_distance(a, b) < 2 || base.edge_between(a, b));
        pairs.emplace_back(a, b);
        const Topology more = Topology::from_long_edges(shape, 2.0, LongRangeScope::all_pairs(), 0, pairs);
        const auto before = simulate_propagation(base, shape.center(), 1.0, 1.5);
        const auto after = simulate_propagation(more, shape.center(), 1.0, 1.5);
        for (std::size_t i = 0; i < n; ++i) CHECK(after.receive_time[i] <= before.receive_time[i]);
    }
}

TEST_CASE("empirical activation degree") {
    const auto shape = GridShape::diamond(8);
    const Topology grid = Topology::build(shape, 1000.0, LongRangeScope::all_pairs(), 0);
    const PropagationTrace tr = simulate_propagation(grid, shape.center(), 1.0, 1.5);
    CHECK(empirical_activation_degree(tr, 0.0) == 1);
    CHECK(empirical_activation_degree(tr, 1.0) == 5);
    CHECK(empirical_activation_degree(tr, 2.0) == 13);
    CHECK(empirical_activation_degree(tr, 8.0) == 145);
    CHECK(empirical_activation_degree(tr, 50.0) == 145);
    CHECK_THROWS_AS(empirical_activation_degree(tr, -1.0), DomainError);
}

TEST_CASE("empirical layer activation times") {
    const auto shape = GridShape::diamond(8);
    const NodeId s = shape.center();
    const Topology grid = Topology::build(shape, 1000.0, LongRangeScope::all_pairs(), 0);
    const PropagationTrace tr = simulate_propagation(grid, s, 1.0, 1.5);
    const LayerDecomposition layers = decompose_layers(grid, s);
    const auto times = empirical_layer_activation_times(tr, layers);
    CHECK(times.at(0) == 1.0);
    CHECK(times.at(1) == 2.0);
    CHECK(times.at(2) == 3.0);
    CHECK(times.at(3) == 5.0);
    CHECK(times.count(4) == 0);
    for (int j = 1; j <= 3; ++j) CHECK(times.at(j) > times.at(j - 1));

    const LayerDecomposition other = decompose_layers(grid, {s.x + 1, s.y});
    CHECK_THROWS_AS(empirical_layer_activation_times(tr, other), MismatchError);
}

TEST_CASE("pure-grid layer activation times increase on every shape") {
    for (const auto& shape : {GridShape::diamond(10), GridShape::square(12)}) {
        const Topology grid = Topology::build(shape, 1000.0, LongRangeScope::all_pairs(), 0);
        const NodeId s = shape.center();
        const auto times = empirical_layer_activation_times(simulate_propagation(grid, s, 1.0, 1.5),
                                                            decompose_layers(grid, s));
        double prev = 0.0;
        for (const auto& [j, t] : times) {
            CHECK(t > prev);
            prev = t;
        }
    }
}

TEST_CASE("smaller beta activates the network faster on average") {
    const auto shape = GridShape::diamond(8);
    const NodeId s = shape.center();
    std::vector<double> grid_t;
    for (double t = 0.0; t <= 9.0; t += 0.5) grid_t.push_back(t);
    std::vector<double> mean1(grid_t.size(), 0.0), mean10(grid_t.size(), 0.0);
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto t1 = simulate_propagation(Topology::build(shape, 1.0, LongRangeScope::all_pairs(), r + 1000), s, 1.0, 1.5);
        const auto t10 = simulate_propagation(Topology::build(shape, 10.0, LongRangeScope::all_pairs(), r + 5000), s, 1.0, 1.5);
        for (std::size_t k = 0; k < grid_t.size(); ++k) {
            mean1[k] += static_cast<double>(empirical_activation_degree(t1, grid_t[k])) / 50.0;
            mean10[k] += static_cast<double>(empirical_activation_degree(t10, grid_t[k])) / 50.0;
        }
    }
    std::size_t dominated = 0;
    for (std::size_t k = 0; k < grid_t.size(); ++k) dominated += mean1[k] >= mean10[k];
    CHECK(static_cast<double>(dominated) >= 0.9 * static_cast<double>(grid_t.size()));
}

TEST_CASE("trace export format") {
    const Topology t = Topology::build(GridShape::square(2), 1000.0, LongRangeScope::all_pairs(), 0);
    const PropagationTrace tr = simulate_propagation(t, {1, 1}, 1.0, 1.5);
    std::ostringstream os;
    tr.write(os);
    const std::string text = os.str();
    CHECK(text.rfind("# source=1,1 delta_s=1 delta_l=1.5 topology=", 0) == 0);
    CHECK(text.find("\n1,1,0\n2,1,1\n1,2,1\n2,2,2\n") != std::string::npos);
}
