#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lmt/topology.hpp"

namespace lmt {

// Rooted aggregation tree over the event sources. Parent edges always lie in
// the topology adjacency; depth(root) = 0 and depth(v) = depth(parent(v)) + 1.
struct AggregationTree {
    NodeId root = -1;
    std::vector<NodeId> parent; // indexed by node id, -1 for root/non-members
    std::vector<int> depth;     // -1 for non-members
    std::vector<NodeId> members; // sorted

    bool is_member(NodeId v) const;
    bool is_internal(NodeId v) const; // has at least one child
    std::vector<NodeId> leaves() const;
    std::vector<NodeId> children_of(NodeId v) const;
    double average_depth() const; // mean member depth, root counts 0
    int max_depth() const;
};

// Ordered node list from a leaf up to the root.
struct BranchPath {
    NodeId leaf = -1;
    std::vector<NodeId> nodes; // leaf first, root last
};

struct TreeBuildResult {
    AggregationTree tree;
    double tree_energy = 0.0;
    NodeId bottleneck_node = -1; // the aggregator attaining the minimum
    int candidate_count = 0;     // trees compared (DLMT: one per source)
};

BranchPath branch_path(const AggregationTree& tree, NodeId leaf);

// Minimum residual energy on the leaf-to-root path excluding the leaf itself.
// A branch consisting of the root alone yields the root's own energy.
double branch_energy(const AggregationTree& tree, const EnergyView& energies, NodeId leaf);

// Minimum residual energy over the aggregating (non-leaf) nodes; a
// single-node tree yields that node's energy.
double tree_energy(const AggregationTree& tree, const EnergyView& energies);

// Baseline: root at the highest-energy source; every other source parents on
// the highest-energy neighbor that is strictly closer to the root in hops.
TreeBuildResult build_espan(const Topology& topo, const EnergyView& energies,
                            const std::vector<NodeId>& sources);

// Maximin ("widest") tree rooted at `root`: every source's branch energy
// equals the best achievable minimum over any path to the root, excluding the
// source itself. Best-first label expansion with label(v) = min(label(parent), e_v).
AggregationTree widest_tree(const Topology& topo, const EnergyView& energies,
                            NodeId root, const std::vector<NodeId>& sources);

// One widest tree per candidate root; keeps the highest tree energy, breaking
// ties toward lower average depth, then lower root id.
TreeBuildResult build_dlmt(const Topology& topo, const EnergyView& energies,
                           const std::vector<NodeId>& sources);

// Threshold construction: finds the highest theta such that the sources at or
// above it form a connected set dominating the rest; the minimum-energy member
// of that set is the bottleneck node and the achieved tree energy is theta.
TreeBuildResult build_clmt(const Topology& topo, const EnergyView& energies,
                           const std::vector<NodeId>& sources);

// Exhaustive reference: enumerates every spanning tree of the induced source
// graph under every rooting and returns a tree-energy maximizer. Refuses
// instances with more sources than `limit`.
std::pair<AggregationTree, double> oracle_best_tree(const Topology& topo,
                                                    const EnergyView& energies,
                                                    const std::vector<NodeId>& sources,
                                                    int limit = 8);

// Text export: `root <id>` then `edge <child> <parent> depth=<d>` lines.
void write_tree(std::ostream& os, const AggregationTree& tree);
void save_tree(const std::string& path, const AggregationTree& tree);

// Validates the structural invariants (acyclic, adjacency-backed parents,
// depth bookkeeping, covers all sources); throws on violation. Used by tests
// and the oracle cross-checks.
void check_tree(const AggregationTree& tree, const Topology& topo,
                const std::vector<NodeId>& sources);

} // namespace lmt
