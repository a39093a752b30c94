#pragma once

#include <algorithm>
#include <cmath>

#include "lmt/rng.hpp"
#include "lmt/topology.hpp"

namespace lmt {

// Small random instances for randomized oracle checks: every node is a
// source and the graph is connected by construction. Half the instances are
// geometric (cluster growth within radio range), half are abstract random
// graphs seeded with a random spanning tree; a third of them quantize the
// energies to force ties.
struct RandomInstance {
    Topology topo;
    EnergyView energy;
};

inline RandomInstance random_small_instance(Rng& rng, int max_sources) {
    const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_sources - 1)));
    RandomInstance inst;
    Topology& topo = inst.topo;
    topo.width = 100.0;
    topo.x.assign(static_cast<std::size_t>(n), 0.0);
    topo.y.assign(static_cast<std::size_t>(n), 0.0);
    topo.role.assign(static_cast<std::size_t>(n), Role::source);
    topo.adjacency.assign(static_cast<std::size_t>(n), {});
    for (NodeId v = 0; v < n; ++v) topo.sources.push_back(v);

    auto add_edge = [&](NodeId a, NodeId b) {
        if (a == b || topo.adjacent(a, b)) return;
        topo.adjacency[static_cast<std::size_t>(a)].push_back(b);
        topo.adjacency[static_cast<std::size_t>(b)].push_back(a);
        std::sort(topo.adjacency[static_cast<std::size_t>(a)].begin(),
                  topo.adjacency[static_cast<std::size_t>(a)].end());
        std::sort(topo.adjacency[static_cast<std::size_t>(b)].begin(),
                  topo.adjacency[static_cast<std::size_t>(b)].end());
    };

    if (rng.below(2) == 0) {
        // Geometric: each node lands within range of an already placed one.
        const double range = 45.0;
        topo.x[0] = rng.uniform(0.0, topo.width);
        topo.y[0] = rng.uniform(0.0, topo.width);
        for (NodeId v = 1; v < n; ++v) {
            NodeId anchor = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(v)));
            double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            double radius = rng.uniform(0.0, range);
            topo.x[static_cast<std::size_t>(v)] = topo.x[static_cast<std::size_t>(anchor)] +
                                                  radius * std::cos(angle);
            topo.y[static_cast<std::size_t>(v)] = topo.y[static_cast<std::size_t>(anchor)] +
                                                  radius * std::sin(angle);
        }
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (topo.distance(a, b) <= range) add_edge(a, b);
    } else {
        // Abstract: a random spanning tree plus extra edges.
        for (NodeId v = 1; v < n; ++v)
            add_edge(v, static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(v))));
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (rng.next_double() < 0.35) add_edge(a, b);
    }

    inst.energy.assign(static_cast<std::size_t>(n), 0.0);
    bool quantize = rng.below(3) == 0;
    for (NodeId v = 0; v < n; ++v) {
        double e = rng.uniform(1.0, 10.0);
        if (quantize) e = 1.0 + std::floor(e / 2.0); // coarse levels force ties
        inst.energy[static_cast<std::size_t>(v)] = e;
    }
    return inst;
}

} // namespace lmt
