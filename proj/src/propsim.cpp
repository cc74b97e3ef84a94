#include "chainprop/propsim.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include "chainprop/errors.hpp"

namespace chainprop {

double PropagationTrace::max_receive_time() const {
    return receive_time.empty() ? 0.0 : *std::max_element(receive_time.begin(), receive_time.end());
}

double PropagationTrace::time_of(const NodeId& n) const {
    const auto it = std::find(nodes.begin(), nodes.end(), n);
    if (it == nodes.end()) throw OutOfBounds("node is not part of this trace");
    return receive_time[static_cast<std::size_t>(it - nodes.begin())];
}

void PropagationTrace::write(std::ostream& os) const {
    os.precision(17);
    os << "# source=" << source.x << ',' << source.y << " delta_s=" << delta_s << " delta_l=" << delta_l
       << " topology=" << std::hex << topology_fingerprint << std::dec << '\n';
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        os << nodes[i].x << ',' << nodes[i].y << ',' << receive_time[i] << '\n';
    }
}

PropagationTrace simulate_propagation(const Topology& topology, const NodeId& source, double delta_s,
                                      double delta_l) {
    if (!(delta_s > 0.0)) throw InvalidParameter("delta_s must be > 0");
    if (!(delta_l >= delta_s)) throw InvalidParameter("delta_l must be >= delta_s");
    const std::size_t s = topology.require_index(source);

    PropagationTrace trace;
    trace.source = source;
    trace.nodes = topology.nodes();
    trace.delta_s = delta_s;
    trace.delta_l = delta_l;
    trace.topology_fingerprint = topology.fingerprint();

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double>& dist = trace.receive_time;
    dist.assign(topology.node_count(), inf);
    dist[s] = 0.0;

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    queue.emplace(0.0, s);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (const Neighbor& nb : topology.neighbors(u)) {
            const double arrival = d + (nb.kind == EdgeKind::short_range ? delta_s : delta_l);
            if (arrival < dist[nb.node]) {
                dist[nb.node] = arrival;
                queue.emplace(arrival, nb.node);
            }
        }
    }
    return trace;
}

std::size_t empirical_activation_degree(const PropagationTrace& trace, double t) {
    if (t < 0.0) throw DomainError("t must be >= 0");
    return static_cast<std::size_t>(
        std::count_if(trace.receive_time.begin(), trace.receive_time.end(), [t](double r) { return r <= t; }));
}

std::map<int, double> empirical_layer_activation_times(const PropagationTrace& trace,
                                                       const LayerDecomposition& layers) {
    if (!(trace.source == layers.source)) throw MismatchError("trace and layer decomposition use different sources");
    if (layers.layer_of.size() != trace.size()) throw MismatchError("trace and layer decomposition differ in size");
    std::map<int, double> out;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const int j = layers.layer_of[i];
        if (j < 0) continue;
        const auto [it, inserted] = out.emplace(j, trace.receive_time[i]);
        if (!inserted) it->second = std::min(it->second, trace.receive_time[i]);
    }
    return out;
}

}  // namespace chainprop
