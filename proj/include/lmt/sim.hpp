#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmt/control.hpp"
#include "lmt/tree.hpp"

namespace lmt {

// All event times are integer microseconds so traces serialize bit-exactly.
using Micros = std::int64_t;

constexpr Micros kMicrosPerSecond = 1'000'000;

inline double to_seconds(Micros t) { return static_cast<double>(t) * 1e-6; }
inline Micros to_micros(double seconds) {
    return static_cast<Micros>(seconds * 1e6 + 0.5);
}

// One sensor report, or the fusion of several. Size stays fixed at the data
// packet size no matter how many reports were averaged in.
struct DataReport {
    NodeId origin = -1;   // generating source (fusing node for fused packets)
    long seq = 0;
    double value = 0.0;   // running average of all constituent readings
    Micros created_at = 0;
    int size = 0;         // bytes
    int fused_count = 1;  // reports averaged into this packet
};

// Fuse received reports with the node's own reading: weighted mean by
// fused_count, counts add up, size stays fixed.
DataReport aggregate_reports(const std::vector<DataReport>& reports, double self_value,
                             Micros now, int packet_size, NodeId self, long seq);

// Point arithmetic of one link transmission under the power model.
struct TransmitCost {
    double duration_s;
    double tx_energy_j;
    double rx_energy_j;
};
TransmitCost transmit_cost(int size_bytes, const SimConfig& config);

enum class TxKind { tree_data, sink_data };
const char* to_string(TxKind k);

enum class RebuildReason { periodic, repair };
const char* to_string(RebuildReason r);

enum class DropReason { dead_receiver, dead_sender, stale_edge, no_route };
const char* to_string(DropReason r);

struct Transmission {
    Micros time = 0; // completion time
    NodeId sender = -1;
    NodeId receiver = -1;
    int size = 0;
    TxKind kind = TxKind::tree_data;
    Micros queued_at = 0; // when the payload became ready at the sender
};

struct DeathRecord {
    Micros time = 0;
    NodeId node = -1;
};

struct RebuildRecord {
    Micros time = 0;
    RebuildReason reason = RebuildReason::periodic;
    NodeId root = -1;
    double tree_energy = 0.0;
    double average_depth = 0.0;
    int component_count = 1;
};

struct EnergySample {
    Micros time = 0;
    NodeId node = -1;
    double residual_j = 0.0;
};

struct Delivery {
    Micros created_at = 0; // fused packet creation (root dispatch) time
    NodeId sink = -1;
    Micros delivered_at = 0;
    int fused_count = 1;
};

struct DropRecord {
    Micros time = 0;
    NodeId sender = -1;
    NodeId receiver = -1;
    DropReason reason = DropReason::dead_receiver;
};

struct PartitionRecord {
    Micros time = 0;
    int component_count = 0;
};

struct UnreachableSinkRecord {
    Micros time = 0;
    NodeId sink = -1;
};

// Per-source-transmission residual snapshot; feeds the drain-rate estimators.
struct TxEnergySample {
    Micros time = 0;
    NodeId node = -1;
    double residual_j = 0.0;
};

// Complete record of one run.
struct SimTrace {
    std::vector<Transmission> transmissions;
    std::vector<DeathRecord> deaths;
    std::vector<RebuildRecord> rebuilds;
    std::vector<EnergySample> energy_log;
    std::vector<Delivery> deliveries;
    std::vector<DropRecord> drops;
    std::vector<PartitionRecord> partitions;
    std::vector<UnreachableSinkRecord> unreachable_sinks;
    std::vector<TxEnergySample> source_tx_energy;
    ControlTrace control;

    Micros end_time = 0;
    int root_dispatch_count = 0; // distinct fused packets the root sent out
    std::vector<double> initial_energy;
    std::vector<double> final_energy;
    std::vector<double> tx_energy_by_node;   // joules spent transmitting
    std::vector<double> rx_energy_by_node;   // joules spent receiving
    std::vector<double> busy_time_by_node_s; // tx+rx occupied seconds
    std::vector<Micros> death_time;          // -1 while alive at end
    AggregationTree initial_tree;
    double initial_tree_energy = 0.0;

    // Time-weighted average of the in-effect tree's mean source depth.
    double time_weighted_depth = 0.0;
};

// Run one simulation. The topology must come with assigned energies.
SimTrace run(const SimConfig& config, const Topology& topo, const EnergyView& energies,
             Scheme scheme);

// CSV writers. Times are integer microseconds except the energy log, which
// reports milliseconds to match its 550 ms cadence.
void write_transmissions_csv(std::ostream& os, const SimTrace& trace);
void write_deaths_csv(std::ostream& os, const SimTrace& trace);
void write_energylog_csv(std::ostream& os, const SimTrace& trace);
void write_deliveries_csv(std::ostream& os, const SimTrace& trace);

} // namespace lmt
