#include "lmt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "lmt/errors.hpp"

namespace lmt {

namespace {

std::size_t idx(NodeId v) { return static_cast<std::size_t>(v); }

// BFS hop distances from `start` within the induced source subgraph.
// Unreachable nodes keep -1.
std::vector<int> source_hops(const Topology& topo, const std::vector<char>& is_member,
                             NodeId start) {
    std::vector<int> dist(static_cast<std::size_t>(topo.node_count()), -1);
    std::deque<NodeId> queue{start};
    dist[idx(start)] = 0;
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId u : topo.adjacency[idx(v)]) {
            if (is_member[idx(u)] && dist[idx(u)] < 0) {
                dist[idx(u)] = dist[idx(v)] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

std::vector<char> member_mask(int n, const std::vector<NodeId>& members) {
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    for (NodeId v : members) mask[idx(v)] = 1;
    return mask;
}

NodeId lowest_min_energy(const std::vector<NodeId>& ids, const EnergyView& e) {
    NodeId best = ids.front();
    for (NodeId v : ids)
        if (e[idx(v)] < e[idx(best)] || (e[idx(v)] == e[idx(best)] && v < best)) best = v;
    return best;
}

NodeId min_energy_internal(const AggregationTree& tree, const EnergyView& e) {
    std::vector<NodeId> internals;
    for (NodeId v : tree.members)
        if (tree.is_internal(v)) internals.push_back(v);
    if (internals.empty()) return tree.root; // single-node tree
    return lowest_min_energy(internals, e);
}

} // namespace

bool AggregationTree::is_member(NodeId v) const {
    return v >= 0 && v < static_cast<NodeId>(depth.size()) && depth[idx(v)] >= 0;
}

bool AggregationTree::is_internal(NodeId v) const {
    for (NodeId u : members)
        if (parent[idx(u)] == v) return true;
    return false;
}

std::vector<NodeId> AggregationTree::children_of(NodeId v) const {
    std::vector<NodeId> out;
    for (NodeId u : members)
        if (parent[idx(u)] == v) out.push_back(u);
    return out;
}

std::vector<NodeId> AggregationTree::leaves() const {
    std::vector<char> has_child(depth.size(), 0);
    for (NodeId u : members)
        if (parent[idx(u)] >= 0) has_child[idx(parent[idx(u)])] = 1;
    std::vector<NodeId> out;
    for (NodeId v : members)
        if (!has_child[idx(v)]) out.push_back(v);
    return out;
}

double AggregationTree::average_depth() const {
    if (members.empty()) return 0.0;
    long long total = 0;
    for (NodeId v : members) total += depth[idx(v)];
    return static_cast<double>(total) / static_cast<double>(members.size());
}

int AggregationTree::max_depth() const {
    int d = 0;
    for (NodeId v : members) d = std::max(d, depth[idx(v)]);
    return d;
}

BranchPath branch_path(const AggregationTree& tree, NodeId leaf) {
    if (!tree.is_member(leaf))
        throw NotAMemberError("branch_path: node " + std::to_string(leaf) + " is not in the tree");
    BranchPath path;
    path.leaf = leaf;
    NodeId v = leaf;
    path.nodes.push_back(v);
    while (v != tree.root) {
        v = tree.parent[idx(v)];
        path.nodes.push_back(v);
    }
    return path;
}

double branch_energy(const AggregationTree& tree, const EnergyView& energies, NodeId leaf) {
    BranchPath path = branch_path(tree, leaf);
    if (path.nodes.size() == 1) return energies[idx(leaf)]; // leaf is the root
    double be = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < path.nodes.size(); ++i)
        be = std::min(be, energies[idx(path.nodes[i])]);
    return be;
}

double tree_energy(const AggregationTree& tree, const EnergyView& energies) {
    if (tree.members.size() == 1) return energies[idx(tree.root)];
    std::vector<char> has_child(tree.depth.size(), 0);
    for (NodeId u : tree.members)
        if (tree.parent[idx(u)] >= 0) has_child[idx(tree.parent[idx(u)])] = 1;
    double et = std::numeric_limits<double>::infinity();
    for (NodeId v : tree.members)
        if (has_child[idx(v)]) et = std::min(et, energies[idx(v)]);
    return et;
}

TreeBuildResult build_espan(const Topology& topo, const EnergyView& energies,
                            const std::vector<NodeId>& sources) {
    if (sources.empty()) throw NotConnectedError("build_espan: empty source set");

    // Root: highest energy, lower id on ties.
    NodeId root = sources.front();
    for (NodeId v : sources)
        if (energies[idx(v)] > energies[idx(root)] ||
            (energies[idx(v)] == energies[idx(root)] && v < root))
            root = v;

    auto mask = member_mask(topo.node_count(), sources);
    auto hops = source_hops(topo, mask, root);
    for (NodeId v : sources)
        if (hops[idx(v)] < 0)
            throw NotConnectedError("build_espan: source " + std::to_string(v) +
                                    " cannot reach the root");

    AggregationTree tree;
    tree.root = root;
    tree.parent.assign(static_cast<std::size_t>(topo.node_count()), -1);
    tree.depth.assign(static_cast<std::size_t>(topo.node_count()), -1);
    tree.members = sources;
    std::sort(tree.members.begin(), tree.members.end());
    tree.depth[idx(root)] = 0;

    for (NodeId v : tree.members) {
        if (v == root) continue;
        // Parent: among neighbors one hop closer to the root, the one with
        // the highest residual energy (lower id on ties).
        NodeId best = -1;
        for (NodeId u : topo.adjacency[idx(v)]) {
            if (!mask[idx(u)] || hops[idx(u)] != hops[idx(v)] - 1) continue;
            if (best < 0 || energies[idx(u)] > energies[idx(best)] ||
                (energies[idx(u)] == energies[idx(best)] && u < best))
                best = u;
        }
        tree.parent[idx(v)] = best;
        tree.depth[idx(v)] = hops[idx(v)];
    }

    TreeBuildResult result;
    result.tree = std::move(tree);
    result.tree_energy = tree_energy(result.tree, energies);
    result.bottleneck_node = min_energy_internal(result.tree, energies);
    result.candidate_count = 1;
    return result;
}

AggregationTree widest_tree(const Topology& topo, const EnergyView& energies, NodeId root,
                            const std::vector<NodeId>& sources) {
    if (std::find(sources.begin(), sources.end(), root) == sources.end())
        throw NotAMemberError("widest_tree: root " + std::to_string(root) +
                              " is not in the source set");

    auto mask = member_mask(topo.node_count(), sources);

    std::vector<char> settled(static_cast<std::size_t>(topo.node_count()), 0);
    std::vector<double> label(static_cast<std::size_t>(topo.node_count()), 0.0);

    AggregationTree tree;
    tree.root = root;
    tree.parent.assign(static_cast<std::size_t>(topo.node_count()), -1);
    tree.depth.assign(static_cast<std::size_t>(topo.node_count()), -1);
    tree.members = sources;
    std::sort(tree.members.begin(), tree.members.end());

    settled[idx(root)] = 1;
    label[idx(root)] = energies[idx(root)];
    tree.depth[idx(root)] = 0;

    // Preference order for a settled parent candidate: the widest label wins;
    // ties fall to higher parent energy, then fewer hops, then lower id. The
    // label comes first so every branch realizes its exhaustive widest-path
    // value, which the tie clauses alone would not guarantee.
    auto better_parent = [&](NodeId a, NodeId b) { // true if a beats b
        if (b < 0) return true;
        if (label[idx(a)] != label[idx(b)]) return label[idx(a)] > label[idx(b)];
        if (energies[idx(a)] != energies[idx(b)]) return energies[idx(a)] > energies[idx(b)];
        if (tree.depth[idx(a)] != tree.depth[idx(b)]) return tree.depth[idx(a)] < tree.depth[idx(b)];
        return a < b;
    };

    std::size_t remaining = tree.members.size() - 1;
    while (remaining > 0) {
        NodeId best_v = -1;
        NodeId best_parent = -1;
        double best_label = -std::numeric_limits<double>::infinity();
        for (NodeId v : tree.members) {
            if (settled[idx(v)]) continue;
            NodeId cand = -1;
            for (NodeId u : topo.adjacency[idx(v)])
                if (mask[idx(u)] && settled[idx(u)] && better_parent(u, cand)) cand = u;
            if (cand < 0) continue;
            double tentative = std::min(label[idx(cand)], energies[idx(v)]);
            if (tentative > best_label) { // ties keep the lower id (members are sorted)
                best_label = tentative;
                best_v = v;
                best_parent = cand;
            }
        }
        if (best_v < 0)
            throw NotConnectedError("widest_tree: some source cannot reach root " +
                                    std::to_string(root));
        settled[idx(best_v)] = 1;
        label[idx(best_v)] = best_label;
        tree.parent[idx(best_v)] = best_parent;
        tree.depth[idx(best_v)] = tree.depth[idx(best_parent)] + 1;
        --remaining;
    }
    return tree;
}

TreeBuildResult build_dlmt(const Topology& topo, const EnergyView& energies,
                           const std::vector<NodeId>& sources) {
    if (sources.empty()) throw NotConnectedError("build_dlmt: empty source set");
    std::vector<NodeId> roots = sources;
    std::sort(roots.begin(), roots.end());

    TreeBuildResult best;
    bool have = false;
    double best_energy = 0.0, best_depth = 0.0;
    for (NodeId r : roots) {
        AggregationTree t = widest_tree(topo, energies, r, sources);
        double et = tree_energy(t, energies);
        double ad = t.average_depth();
        // Highest tree energy; lower average depth, then lower root id on ties.
        if (!have || et > best_energy ||
            (et == best_energy && (ad < best_depth || (ad == best_depth && r < best.tree.root)))) {
            best.tree = std::move(t);
            best_energy = et;
            best_depth = ad;
            have = true;
        }
    }
    best.tree_energy = best_energy;
    best.bottleneck_node = min_energy_internal(best.tree, energies);
    best.candidate_count = static_cast<int>(roots.size());
    return best;
}

TreeBuildResult build_clmt(const Topology& topo, const EnergyView& energies,
                           const std::vector<NodeId>& sources) {
    if (sources.empty()) throw NotConnectedError("build_clmt: empty source set");
    std::vector<NodeId> all = sources;
    std::sort(all.begin(), all.end());

    if (!induced_connected(topo, all))
        throw NotConnectedError("build_clmt: source set is not interconnected");

    // Candidate thresholds: distinct source energies, highest first. The
    // lowest one always works (the whole set is connected), so the loop
    // terminates with the maximum feasible threshold.
    std::vector<double> thresholds;
    for (NodeId v : all) thresholds.push_back(energies[idx(v)]);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<NodeId> backbone;
    int examined = 0;
    for (double theta : thresholds) {
        ++examined;
        backbone.clear();
        for (NodeId v : all)
            if (energies[idx(v)] >= theta) backbone.push_back(v);
        if (!induced_connected(topo, backbone)) continue;
        std::vector<char> in_backbone = member_mask(topo.node_count(), backbone);
        bool dominated = true;
        for (NodeId v : all) {
            if (in_backbone[idx(v)]) continue;
            bool has = false;
            for (NodeId u : topo.adjacency[idx(v)])
                if (in_backbone[idx(u)]) { has = true; break; }
            if (!has) { dominated = false; break; }
        }
        if (dominated) break;
    }

    // Collection root: the backbone member with the smallest total hop
    // distance to the sources (the most central choice); ties prefer higher
    // energy, then lower id. Any backbone member yields the optimal tree
    // energy, so centrality is a free win for depth and delay.
    auto all_mask = member_mask(topo.node_count(), all);
    NodeId root = -1;
    long long best_dist = 0;
    for (NodeId r : backbone) {
        auto hops = source_hops(topo, all_mask, r);
        long long total = 0;
        for (NodeId v : all) total += hops[idx(v)] < 0 ? topo.node_count() : hops[idx(v)];
        if (root < 0 || total < best_dist ||
            (total == best_dist && (energies[idx(r)] > energies[idx(root)] ||
                                    (energies[idx(r)] == energies[idx(root)] && r < root))))
        {
            root = r;
            best_dist = total;
        }
    }

    // Backbone carries the aggregation; everything below the threshold hangs
    // off it as leaves on the highest-energy backbone neighbor.
    AggregationTree tree = widest_tree(topo, energies, root, backbone);
    tree.members = all;
    std::vector<char> in_backbone = member_mask(topo.node_count(), backbone);
    for (NodeId v : all) {
        if (in_backbone[idx(v)]) continue;
        NodeId best = -1;
        for (NodeId u : topo.adjacency[idx(v)]) {
            if (!in_backbone[idx(u)]) continue;
            if (best < 0 || energies[idx(u)] > energies[idx(best)] ||
                (energies[idx(u)] == energies[idx(best)] && u < best))
                best = u;
        }
        tree.parent[idx(v)] = best;
        tree.depth[idx(v)] = tree.depth[idx(best)] + 1;
    }

    TreeBuildResult result;
    result.tree = std::move(tree);
    result.tree_energy = tree_energy(result.tree, energies);
    result.bottleneck_node = lowest_min_energy(backbone, energies);
    result.candidate_count = examined;
    return result;
}

namespace {

// Spanning-tree enumeration state: include/exclude recursion over the edge
// list with cycle and connectivity pruning, so each spanning tree of the
// induced source graph is visited exactly once.
struct OracleSearch {
    int n = 0;
    std::vector<std::pair<int, int>> edges; // local indices
    std::vector<double> energy;             // by local index
    std::vector<int> chosen;
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<int> best_edges;

    struct Dsu {
        std::vector<int> p;
        explicit Dsu(int n) : p(static_cast<std::size_t>(n)) {
            std::iota(p.begin(), p.end(), 0);
        }
        int find(int v) { return p[static_cast<std::size_t>(v)] == v ? v : p[static_cast<std::size_t>(v)] = find(p[static_cast<std::size_t>(v)]); }
        bool join(int a, int b) {
            a = find(a);
            b = find(b);
            if (a == b) return false;
            p[static_cast<std::size_t>(a)] = b;
            return true;
        }
    };

    bool can_still_connect(std::size_t next) const {
        Dsu dsu(n);
        int comps = n;
        for (int e : chosen)
            if (dsu.join(edges[static_cast<std::size_t>(e)].first,
                         edges[static_cast<std::size_t>(e)].second))
                --comps;
        for (std::size_t i = next; i < edges.size() && comps > 1; ++i)
            if (dsu.join(edges[i].first, edges[i].second)) --comps;
        return comps == 1;
    }

    void evaluate() {
        std::vector<int> deg(static_cast<std::size_t>(n), 0);
        for (int e : chosen) {
            ++deg[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].first)];
            ++deg[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].second)];
        }
        // Internal nodes of any rooting are the degree>=2 nodes plus the
        // root; the best rooting takes the maximum-energy node.
        double internal_min = std::numeric_limits<double>::infinity();
        for (int v = 0; v < n; ++v)
            if (deg[static_cast<std::size_t>(v)] >= 2)
                internal_min = std::min(internal_min, energy[static_cast<std::size_t>(v)]);
        double e_max = *std::max_element(energy.begin(), energy.end());
        double value = std::min(internal_min, e_max);
        if (value > best_value) {
            best_value = value;
            best_edges = chosen;
        }
    }

    void search(std::size_t next) {
        if (static_cast<int>(chosen.size()) == n - 1) {
            evaluate();
            return;
        }
        if (next >= edges.size()) return;
        if (!can_still_connect(next)) return;

        // Include edges[next] unless it closes a cycle.
        Dsu dsu(n);
        bool cycle = false;
        for (int e : chosen)
            dsu.join(edges[static_cast<std::size_t>(e)].first,
                     edges[static_cast<std::size_t>(e)].second);
        if (!dsu.join(edges[next].first, edges[next].second)) cycle = true;
        if (!cycle) {
            chosen.push_back(static_cast<int>(next));
            search(next + 1);
            chosen.pop_back();
        }
        search(next + 1);
    }
};

} // namespace

std::pair<AggregationTree, double> oracle_best_tree(const Topology& topo,
                                                    const EnergyView& energies,
                                                    const std::vector<NodeId>& sources,
                                                    int limit) {
    if (static_cast<int>(sources.size()) > limit)
        throw OracleLimitError("oracle_best_tree: " + std::to_string(sources.size()) +
                               " sources exceed the limit of " + std::to_string(limit));
    if (sources.empty()) throw NotConnectedError("oracle_best_tree: empty source set");

    std::vector<NodeId> ids = sources;
    std::sort(ids.begin(), ids.end());
    const int n = static_cast<int>(ids.size());

    if (n == 1) {
        AggregationTree tree;
        tree.root = ids.front();
        tree.parent.assign(static_cast<std::size_t>(topo.node_count()), -1);
        tree.depth.assign(static_cast<std::size_t>(topo.node_count()), -1);
        tree.depth[idx(ids.front())] = 0;
        tree.members = ids;
        return {tree, energies[idx(ids.front())]};
    }

    OracleSearch search;
    search.n = n;
    std::vector<int> local(static_cast<std::size_t>(topo.node_count()), -1);
    for (int i = 0; i < n; ++i) {
        local[idx(ids[static_cast<std::size_t>(i)])] = i;
        search.energy.push_back(energies[idx(ids[static_cast<std::size_t>(i)])]);
    }
    for (NodeId a : ids)
        for (NodeId b : topo.adjacency[idx(a)])
            if (a < b && local[idx(b)] >= 0)
                search.edges.emplace_back(local[idx(a)], local[idx(b)]);

    search.search(0);
    if (search.best_edges.empty())
        throw NotConnectedError("oracle_best_tree: source set is not interconnected");

    // Rebuild the winning tree rooted at its best root (maximum energy,
    // lower id on ties).
    int root_local = 0;
    for (int v = 1; v < n; ++v)
        if (search.energy[static_cast<std::size_t>(v)] > search.energy[static_cast<std::size_t>(root_local)])
            root_local = v;

    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
    for (int e : search.best_edges) {
        auto [a, b] = search.edges[static_cast<std::size_t>(e)];
        nbrs[static_cast<std::size_t>(a)].push_back(b);
        nbrs[static_cast<std::size_t>(b)].push_back(a);
    }

    AggregationTree tree;
    tree.root = ids[static_cast<std::size_t>(root_local)];
    tree.parent.assign(static_cast<std::size_t>(topo.node_count()), -1);
    tree.depth.assign(static_cast<std::size_t>(topo.node_count()), -1);
    tree.members = ids;
    std::deque<int> queue{root_local};
    tree.depth[idx(tree.root)] = 0;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[static_cast<std::size_t>(root_local)] = 1;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : nbrs[static_cast<std::size_t>(v)]) {
            if (seen[static_cast<std::size_t>(u)]) continue;
            seen[static_cast<std::size_t>(u)] = 1;
            NodeId gu = ids[static_cast<std::size_t>(u)];
            NodeId gv = ids[static_cast<std::size_t>(v)];
            tree.parent[idx(gu)] = gv;
            tree.depth[idx(gu)] = tree.depth[idx(gv)] + 1;
            queue.push_back(u);
        }
    }
    return {tree, search.best_value};
}

void write_tree(std::ostream& os, const AggregationTree& tree) {
    os << "root " << tree.root << "\n";
    for (NodeId v : tree.members) {
        if (v == tree.root) continue;
        os << "edge " << v << " " << tree.parent[idx(v)] << " depth=" << tree.depth[idx(v)]
           << "\n";
    }
}

void save_tree(const std::string& path, const AggregationTree& tree) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tree file: " + path);
    write_tree(out, tree);
}

void check_tree(const AggregationTree& tree, const Topology& topo,
                const std::vector<NodeId>& sources) {
    if (!tree.is_member(tree.root)) throw Error("check_tree: root is not a member");
    if (tree.depth[idx(tree.root)] != 0) throw Error("check_tree: root depth must be 0");
    for (NodeId s : sources)
        if (!tree.is_member(s))
            throw Error("check_tree: source " + std::to_string(s) + " missing from the tree");
    for (NodeId v : tree.members) {
        if (v == tree.root) {
            if (tree.parent[idx(v)] >= 0) throw Error("check_tree: root has a parent");
            continue;
        }
        NodeId p = tree.parent[idx(v)];
        if (p < 0 || !tree.is_member(p))
            throw Error("check_tree: node " + std::to_string(v) + " has no valid parent");
        if (!topo.adjacent(v, p))
            throw Error("check_tree: edge " + std::to_string(v) + "-" + std::to_string(p) +
                        " is not in the adjacency");
        if (tree.depth[idx(v)] != tree.depth[idx(p)] + 1)
            throw Error("check_tree: depth bookkeeping broken at node " + std::to_string(v));
        // Following parents must reach the root without revisiting.
        std::set<NodeId> seen{v};
        NodeId w = v;
        while (w != tree.root) {
            w = tree.parent[idx(w)];
            if (w < 0 || !seen.insert(w).second)
                throw Error("check_tree: cycle above node " + std::to_string(v));
        }
    }
}

} // namespace lmt
