#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmt/config.hpp"

namespace lmt {

using NodeId = int;

enum class Role { source, sink, relay };

// Residual energy per node id, in joules. Index = node id.
using EnergyView = std::vector<double>;

// An immutable deployed field: positions, radio-range adjacency and the
// source/sink designation. Node ids are dense 0..n-1.
struct Topology {
    double width = 0.0; // field is the square [0, width]^2
    std::vector<double> x;
    std::vector<double> y;
    std::vector<std::vector<NodeId>> adjacency; // per node, sorted, irreflexive
    std::vector<NodeId> sources;                // sorted
    std::vector<NodeId> sinks;                  // sorted
    std::vector<Role> role;

    int node_count() const { return static_cast<int>(x.size()); }
    bool adjacent(NodeId a, NodeId b) const;
    double distance(NodeId a, NodeId b) const;
    bool is_source(NodeId v) const { return role[static_cast<std::size_t>(v)] == Role::source; }
    bool is_sink(NodeId v) const { return role[static_cast<std::size_t>(v)] == Role::sink; }

    // Neighbors of v restricted to sources (used by the tree builders).
    std::vector<NodeId> source_neighbors(NodeId v) const;
};

// Side length of the square field holding n nodes at the given density.
double field_width(int n, double density); // throws InvalidConfigError

// Random deployment: n uniform positions, adjacency within radio range,
// interconnected source set, sinks among the non-sources, all driven by
// derived streams of config.seed.
Topology deploy(const SimConfig& config);

// Grow a connected source set of size round(fraction * n) by randomized BFS;
// retries up to 100 times before declaring the seed infeasible.
std::vector<NodeId> select_sources(const Topology& topo, double fraction, std::uint64_t seed);

// `count` distinct non-source ids.
std::vector<NodeId> select_sinks(const Topology& topo, int count, std::uint64_t seed);

// Sources draw uniform energy in [source_energy_min, source_energy_max];
// every other node gets the fixed non_source_energy.
EnergyView assign_energy(const Topology& topo, const SimConfig& config, std::uint64_t seed);

// True iff the subgraph induced by `ids` is connected (BFS check).
bool induced_connected(const Topology& topo, const std::vector<NodeId>& ids);

// Line-oriented text format:
//   nodes N width X
//   node <id> <x> <y> <energy> <source|sink|relay>
//   edge <a> <b>           (a < b)
void write_topology(std::ostream& os, const Topology& topo, const EnergyView& energy);
void read_topology(std::istream& is, Topology& topo, EnergyView& energy);
void save_topology(const std::string& path, const Topology& topo, const EnergyView& energy);
void load_topology(const std::string& path, Topology& topo, EnergyView& energy);

} // namespace lmt
