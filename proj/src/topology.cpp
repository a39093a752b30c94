#include "lmt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lmt/errors.hpp"
#include "lmt/rng.hpp"

namespace lmt {

bool Topology::adjacent(NodeId a, NodeId b) const {
    const auto& nbrs = adjacency[static_cast<std::size_t>(a)];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

double Topology::distance(NodeId a, NodeId b) const {
    double dx = x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)];
    double dy = y[static_cast<std::size_t>(a)] - y[static_cast<std::size_t>(b)];
    return std::sqrt(dx * dx + dy * dy);
}

std::vector<NodeId> Topology::source_neighbors(NodeId v) const {
    std::vector<NodeId> out;
    for (NodeId u : adjacency[static_cast<std::size_t>(v)])
        if (is_source(u)) out.push_back(u);
    return out;
}

double field_width(int n, double density) {
    if (n < 1) throw InvalidConfigError("field_width: node count must be >= 1");
    if (!(density > 0.0)) throw InvalidConfigError("field_width: density must be > 0");
    return std::sqrt(static_cast<double>(n) / density);
}

bool induced_connected(const Topology& topo, const std::vector<NodeId>& ids) {
    if (ids.empty()) return true;
    std::vector<char> in_set(static_cast<std::size_t>(topo.node_count()), 0);
    for (NodeId v : ids) in_set[static_cast<std::size_t>(v)] = 1;
    std::vector<char> seen(static_cast<std::size_t>(topo.node_count()), 0);
    std::deque<NodeId> queue{ids.front()};
    seen[static_cast<std::size_t>(ids.front())] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId u : topo.adjacency[static_cast<std::size_t>(v)]) {
            if (in_set[static_cast<std::size_t>(u)] && !seen[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = 1;
                ++reached;
                queue.push_back(u);
            }
        }
    }
    return reached == ids.size();
}

std::vector<NodeId> select_sources(const Topology& topo, double fraction, std::uint64_t seed) {
    const int n = topo.node_count();
    const int quota = static_cast<int>(std::lround(fraction * n));
    if (quota < 1) throw InvalidConfigError("select_sources: quota rounds to zero");
    if (quota > n) throw InvalidConfigError("select_sources: quota exceeds node count");

    Rng rng = derive_rng(seed, RngPurpose::source_pick);
    constexpr int kMaxRetries = 100;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        // Randomized BFS growth: start anywhere, repeatedly pull a random
        // frontier node until the quota is met.
        std::vector<char> selected(static_cast<std::size_t>(n), 0);
        std::vector<NodeId> picked;
        std::vector<NodeId> frontier;
        std::vector<char> in_frontier(static_cast<std::size_t>(n), 0);

        NodeId start = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        picked.push_back(start);
        selected[static_cast<std::size_t>(start)] = 1;
        for (NodeId u : topo.adjacency[static_cast<std::size_t>(start)]) {
            frontier.push_back(u);
            in_frontier[static_cast<std::size_t>(u)] = 1;
        }
        while (static_cast<int>(picked.size()) < quota && !frontier.empty()) {
            std::size_t idx = rng.pick_index(frontier);
            NodeId v = frontier[idx];
            frontier[idx] = frontier.back();
            frontier.pop_back();
            in_frontier[static_cast<std::size_t>(v)] = 0;
            if (selected[static_cast<std::size_t>(v)]) continue;
            selected[static_cast<std::size_t>(v)] = 1;
            picked.push_back(v);
            for (NodeId u : topo.adjacency[static_cast<std::size_t>(v)]) {
                if (!selected[static_cast<std::size_t>(u)] && !in_frontier[static_cast<std::size_t>(u)]) {
                    frontier.push_back(u);
                    in_frontier[static_cast<std::size_t>(u)] = 1;
                }
            }
        }
        if (static_cast<int>(picked.size()) == quota) {
            std::sort(picked.begin(), picked.end());
            return picked;
        }
    }
    throw DeploymentInfeasibleError(
        "select_sources: could not grow a connected source set of size " +
            std::to_string(quota) + " after " + std::to_string(kMaxRetries) + " attempts",
        seed);
}

std::vector<NodeId> select_sinks(const Topology& topo, int count, std::uint64_t seed) {
    if (count < 0) throw InvalidConfigError("select_sinks: count must be >= 0");
    std::vector<NodeId> candidates;
    for (NodeId v = 0; v < topo.node_count(); ++v)
        if (!topo.is_source(v)) candidates.push_back(v);
    if (count > static_cast<int>(candidates.size()))
        throw InvalidConfigError("select_sinks: not enough non-source nodes for " +
                                 std::to_string(count) + " sinks");
    Rng rng = derive_rng(seed, RngPurpose::sink_pick);
    rng.shuffle(candidates);
    candidates.resize(static_cast<std::size_t>(count));
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

EnergyView assign_energy(const Topology& topo, const SimConfig& config, std::uint64_t seed) {
    Rng rng = derive_rng(seed, RngPurpose::energy);
    EnergyView energy(static_cast<std::size_t>(topo.node_count()), config.non_source_energy);
    // Draw in id order so the assignment is stable.
    for (NodeId v : topo.sources)
        energy[static_cast<std::size_t>(v)] =
            rng.uniform(config.source_energy_min, config.source_energy_max);
    return energy;
}

Topology deploy(const SimConfig& config) {
    config.validate();
    const int n = config.node_count;

    Topology topo;
    topo.width = field_width(n, config.node_density);
    topo.x.resize(static_cast<std::size_t>(n));
    topo.y.resize(static_cast<std::size_t>(n));
    topo.role.assign(static_cast<std::size_t>(n), Role::relay);

    Rng rng = derive_rng(config.seed, RngPurpose::deployment);
    for (int v = 0; v < n; ++v) {
        topo.x[static_cast<std::size_t>(v)] = rng.uniform(0.0, topo.width);
        topo.y[static_cast<std::size_t>(v)] = rng.uniform(0.0, topo.width);
    }

    topo.adjacency.assign(static_cast<std::size_t>(n), {});
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            if (topo.distance(a, b) <= config.radio_range) {
                topo.adjacency[static_cast<std::size_t>(a)].push_back(b);
                topo.adjacency[static_cast<std::size_t>(b)].push_back(a);
            }
        }
    }

    topo.sources = select_sources(topo, config.source_fraction, config.seed);
    for (NodeId v : topo.sources) topo.role[static_cast<std::size_t>(v)] = Role::source;
    topo.sinks = select_sinks(topo, config.sink_count, config.seed);
    for (NodeId v : topo.sinks) topo.role[static_cast<std::size_t>(v)] = Role::sink;
    return topo;
}

namespace {

std::string fmt17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

const char* role_name(Role r) {
    switch (r) {
        case Role::source: return "source";
        case Role::sink: return "sink";
        case Role::relay: return "relay";
    }
    return "?";
}

Role role_from(const std::string& s) {
    if (s == "source") return Role::source;
    if (s == "sink") return Role::sink;
    if (s == "relay") return Role::relay;
    throw IoError("topology file: unknown role '" + s + "'");
}

} // namespace

void write_topology(std::ostream& os, const Topology& topo, const EnergyView& energy) {
    os << "nodes " << topo.node_count() << " width " << fmt17(topo.width) << "\n";
    for (NodeId v = 0; v < topo.node_count(); ++v) {
        os << "node " << v << " " << fmt17(topo.x[static_cast<std::size_t>(v)]) << " "
           << fmt17(topo.y[static_cast<std::size_t>(v)]) << " "
           << fmt17(energy[static_cast<std::size_t>(v)]) << " "
           << role_name(topo.role[static_cast<std::size_t>(v)]) << "\n";
    }
    for (NodeId a = 0; a < topo.node_count(); ++a)
        for (NodeId b : topo.adjacency[static_cast<std::size_t>(a)])
            if (a < b) os << "edge " << a << " " << b << "\n";
}

void read_topology(std::istream& is, Topology& topo, EnergyView& energy) {
    std::string tag;
    int n = 0;
    if (!(is >> tag) || tag != "nodes" || !(is >> n)) throw IoError("topology file: bad header");
    if (!(is >> tag) || tag != "width" || !(is >> topo.width))
        throw IoError("topology file: bad header");
    if (n < 1) throw IoError("topology file: node count must be >= 1");

    topo.x.assign(static_cast<std::size_t>(n), 0.0);
    topo.y.assign(static_cast<std::size_t>(n), 0.0);
    topo.role.assign(static_cast<std::size_t>(n), Role::relay);
    topo.adjacency.assign(static_cast<std::size_t>(n), {});
    topo.sources.clear();
    topo.sinks.clear();
    energy.assign(static_cast<std::size_t>(n), 0.0);

    while (is >> tag) {
        if (tag == "node") {
            NodeId id;
            double px, py, e;
            std::string role;
            if (!(is >> id >> px >> py >> e >> role)) throw IoError("topology file: bad node line");
            if (id < 0 || id >= n) throw IoError("topology file: node id out of range");
            topo.x[static_cast<std::size_t>(id)] = px;
            topo.y[static_cast<std::size_t>(id)] = py;
            energy[static_cast<std::size_t>(id)] = e;
            topo.role[static_cast<std::size_t>(id)] = role_from(role);
        } else if (tag == "edge") {
            NodeId a, b;
            if (!(is >> a >> b)) throw IoError("topology file: bad edge line");
            if (a < 0 || a >= n || b < 0 || b >= n || a == b)
                throw IoError("topology file: edge endpoints out of range");
            topo.adjacency[static_cast<std::size_t>(a)].push_back(b);
            topo.adjacency[static_cast<std::size_t>(b)].push_back(a);
        } else {
            throw IoError("topology file: unexpected tag '" + tag + "'");
        }
    }
    for (auto& nbrs : topo.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    for (NodeId v = 0; v < n; ++v) {
        if (topo.role[static_cast<std::size_t>(v)] == Role::source) topo.sources.push_back(v);
        if (topo.role[static_cast<std::size_t>(v)] == Role::sink) topo.sinks.push_back(v);
    }
}

void save_topology(const std::string& path, const Topology& topo, const EnergyView& energy) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write topology file: " + path);
    write_topology(out, topo, energy);
}

void load_topology(const std::string& path, Topology& topo, EnergyView& energy) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open topology file: " + path);
    read_topology(in, topo, energy);
}

} // namespace lmt
