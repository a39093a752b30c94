#include "lmt/control.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include "lmt/errors.hpp"

namespace lmt {

namespace {
std::size_t idx(NodeId v) { return static_cast<std::size_t>(v); }
} // namespace

const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::hello: return "hello";
        case MsgKind::eid_flood: return "eid_flood";
        case MsgKind::parent_claim: return "parent_claim";
        case MsgKind::central_report: return "central_report";
        case MsgKind::central_assign: return "central_assign";
    }
    return "?";
}

long long ControlTrace::total_source_bytes() const {
    long long total = 0;
    for (const auto& [node, bytes] : bytes_by_source) total += bytes;
    return total;
}

void ControlTrace::append(const ControlTrace& other) {
    messages.insert(messages.end(), other.messages.begin(), other.messages.end());
    for (const auto& [node, bytes] : other.bytes_by_source) bytes_by_source[node] += bytes;
}

namespace {

// BFS hop distances within the induced source subgraph.
std::vector<int> hops_from(const Topology& topo, const std::vector<char>& mask, NodeId start) {
    std::vector<int> dist(static_cast<std::size_t>(topo.node_count()), -1);
    std::deque<NodeId> queue{start};
    dist[idx(start)] = 0;
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId u : topo.adjacency[idx(v)])
            if (mask[idx(u)] && dist[idx(u)] < 0) {
                dist[idx(u)] = dist[idx(v)] + 1;
                queue.push_back(u);
            }
    }
    return dist;
}

void push(ControlTrace& trace, const Topology& topo, NodeId sender, NodeId receiver, MsgKind kind,
          int size, int round) {
    trace.messages.push_back({sender, receiver, kind, size, round});
    if (topo.is_source(sender)) trace.bytes_by_source[sender] += size;
}

} // namespace

ControlTrace simulate_control(const Topology& topo, const std::vector<NodeId>& sources,
                              Scheme scheme, const SimConfig& config, int round) {
    ControlTrace trace;
    trace.discount = config.discount;
    if (sources.empty()) return trace;

    std::vector<NodeId> ids = sources;
    std::sort(ids.begin(), ids.end());
    std::vector<char> mask(static_cast<std::size_t>(topo.node_count()), 0);
    for (NodeId v : ids) mask[idx(v)] = 1;

    switch (scheme) {
        case Scheme::espan: {
            // One one-hop broadcast per source per construction round.
            for (NodeId v : ids)
                push(trace, topo, v, kBroadcast, MsgKind::parent_claim, config.espan_control_size,
                     round);
            break;
        }
        case Scheme::dlmt: {
            for (NodeId v : ids)
                push(trace, topo, v, kBroadcast, MsgKind::hello, config.dlmt_hello_size, round);
            // Every source rebroadcasts each distinct eid exactly once. A
            // rebroadcast at flood depth d carries the d+1 path entries
            // accumulated since the originator.
            for (NodeId origin : ids) {
                auto depth = hops_from(topo, mask, origin);
                std::vector<NodeId> order = ids;
                std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
                    return depth[idx(a)] < depth[idx(b)];
                });
                for (NodeId v : order) {
                    if (depth[idx(v)] < 0) continue; // unreachable: flood never arrives
                    int size = config.dlmt_header_size + config.dlmt_entry_size * (depth[idx(v)] + 1);
                    push(trace, topo, v, kBroadcast, MsgKind::eid_flood, size, round);
                }
            }
            break;
        }
        case Scheme::clmt: {
            // Computation node: the source with the most source neighbors,
            // lowest id on ties.
            NodeId comp = ids.front();
            int comp_deg = -1;
            for (NodeId v : ids) {
                int deg = 0;
                for (NodeId u : topo.adjacency[idx(v)])
                    if (mask[idx(u)]) ++deg;
                if (deg > comp_deg) {
                    comp = v;
                    comp_deg = deg;
                }
            }
            auto dist = hops_from(topo, mask, comp);
            // Next hop toward the computation node: lower id among the
            // neighbors one hop closer.
            auto next_hop = [&](NodeId v) {
                NodeId best = -1;
                for (NodeId u : topo.adjacency[idx(v)])
                    if (mask[idx(u)] && dist[idx(u)] == dist[idx(v)] - 1 && (best < 0 || u < best))
                        best = u;
                return best;
            };
            // Each source reports toward the computation node, hop by hop.
            for (NodeId s : ids) {
                if (s == comp || dist[idx(s)] < 0) continue;
                NodeId v = s;
                while (v != comp) {
                    NodeId n = next_hop(v);
                    push(trace, topo, v, n, MsgKind::central_report, config.dlmt_hello_size, round);
                    v = n;
                }
            }
            // One assignment per source, unicast back along the same paths.
            int assign_size =
                config.dlmt_header_size + config.dlmt_entry_size * static_cast<int>(ids.size());
            for (NodeId s : ids) {
                if (s == comp || dist[idx(s)] < 0) continue;
                // Path comp -> s is the reverse of the report path.
                std::vector<NodeId> path{s};
                NodeId v = s;
                while (v != comp) {
                    v = next_hop(v);
                    path.push_back(v);
                }
                std::reverse(path.begin(), path.end());
                for (std::size_t i = 0; i + 1 < path.size(); ++i)
                    push(trace, topo, path[i], path[i + 1], MsgKind::central_assign, assign_size,
                         round);
            }
            break;
        }
    }
    return trace;
}

double message_cost(double distance, double interference) {
    if (!(interference > 0.0))
        throw InvalidConfigError("message_cost: interference must be > 0");
    return distance / interference;
}

double asc(const ControlTrace& trace, int source_count) {
    if (source_count < 1) throw InvalidConfigError("asc: source_count must be >= 1");
    return trace.discount * static_cast<double>(trace.total_source_bytes()) /
           static_cast<double>(source_count);
}

void write_control_csv(std::ostream& os, const ControlTrace& trace) {
    os << "round,kind,sender,receiver,bytes\n";
    for (const auto& m : trace.messages)
        os << m.round << "," << to_string(m.kind) << "," << m.sender << "," << m.receiver << ","
           << m.size << "\n";
}

} // namespace lmt
