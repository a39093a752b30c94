#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lmt/topology.hpp"

namespace lmt {

enum class MsgKind { hello, eid_flood, parent_claim, central_report, central_assign };

const char* to_string(MsgKind k);

constexpr NodeId kBroadcast = -1;

struct ControlMessage {
    NodeId sender = -1;
    NodeId receiver = kBroadcast; // kBroadcast for one-hop broadcasts
    MsgKind kind = MsgKind::hello;
    int size = 0; // bytes
    int round = 0;
};

struct ControlTrace {
    std::vector<ControlMessage> messages;
    std::map<NodeId, long long> bytes_by_source; // bytes transmitted per source
    double discount = 1.0;                       // delta in the ASC definition

    long long total_source_bytes() const;
    void append(const ControlTrace& other);
};

// Byte accounting of one construction round.
//
//   espan: every source broadcasts one fixed-size control, one hop.
//   dlmt:  every source broadcasts one hello, then each distinct eid is
//          rebroadcast exactly once per source; a rebroadcast at flood depth d
//          carries d+1 path entries on top of the header.
//   clmt:  every source forwards one report hop-by-hop to the computation
//          node (the source adjacent to the most sources, lowest id on ties),
//          which answers each source with an assignment of header + one entry
//          per source, unicast back along the same shortest-path tree.
ControlTrace simulate_control(const Topology& topo, const std::vector<NodeId>& sources,
                              Scheme scheme, const SimConfig& config, int round = 0);

// Transmission cost of one hop: distance over interference.
double message_cost(double distance, double interference);

// Average per-source control: discount * source bytes / source count.
double asc(const ControlTrace& trace, int source_count);

// CSV with columns round,kind,sender,receiver,bytes (receiver -1 = broadcast).
void write_control_csv(std::ostream& os, const ControlTrace& trace);

} // namespace lmt
