#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "chainprop/topology.hpp"

namespace chainprop {

// First-receive time of the main chain at every node for one run.
struct PropagationTrace {
    NodeId source;
    std::vector<NodeId> nodes;         // topology order
    std::vector<double> receive_time;  // aligned with `nodes`; source is 0
    double delta_s = 0.0;
    double delta_l = 0.0;
    std::uint64_t topology_fingerprint = 0;

    std::size_t size() const { return nodes.size(); }
    double max_receive_time() const;
    double time_of(const NodeId& n) const;

    // `x,y,receive_time` per node after a one-line header.
    void write(std::ostream& os) const;
};

// Flooding with fixed per-link delays: each node forwards to every neighbour the
// moment it first hears the chain. The result is the weighted shortest-path
// distance from `source` with weights delta_s (short) and delta_l (long).
PropagationTrace simulate_propagation(const Topology& topology, const NodeId& source, double delta_s,
                                      double delta_l);

// |{v : receive_time(v) <= t}|, the source included.
std::size_t empirical_activation_degree(const PropagationTrace& trace, double t);

// Per layer, the earliest receive time over its nodes. Empty layers are absent.
std::map<int, double> empirical_layer_activation_times(const PropagationTrace& trace,
                                                       const LayerDecomposition& layers);

}  // namespace chainprop
