#include "lmt/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>

#include "lmt/errors.hpp"
#include "lmt/rng.hpp"

namespace lmt {

namespace {
std::size_t idx(NodeId v) { return static_cast<std::size_t>(v); }
} // namespace

DataReport aggregate_reports(const std::vector<DataReport>& reports, double self_value,
                             Micros now, int packet_size, NodeId self, long seq) {
    DataReport out;
    out.origin = self;
    out.seq = seq;
    out.created_at = now;
    out.size = packet_size;
    double weighted = self_value;
    int count = 1;
    for (const auto& r : reports) {
        weighted += r.value * r.fused_count;
        count += r.fused_count;
    }
    out.value = weighted / count;
    out.fused_count = count;
    return out;
}

TransmitCost transmit_cost(int size_bytes, const SimConfig& config) {
    assert(size_bytes > 0 && "zero-byte packets are not transmittable");
    TransmitCost c;
    c.duration_s = static_cast<double>(size_bytes) * 8.0 / config.mac_bandwidth;
    c.tx_energy_j = config.tx_power * c.duration_s;
    c.rx_energy_j = config.rx_power * c.duration_s;
    return c;
}

const char* to_string(TxKind k) {
    switch (k) {
        case TxKind::tree_data: return "tree";
        case TxKind::sink_data: return "sink";
    }
    return "?";
}

const char* to_string(RebuildReason r) {
    switch (r) {
        case RebuildReason::periodic: return "periodic";
        case RebuildReason::repair: return "repair";
    }
    return "?";
}

const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::dead_receiver: return "dead_receiver";
        case DropReason::dead_sender: return "dead_sender";
        case DropReason::stale_edge: return "stale_edge";
        case DropReason::no_route: return "no_route";
    }
    return "?";
}

namespace {

// Event ranks fix the processing order inside one microsecond: deaths first
// so nobody acts while dead, rebuilds next so data always sees a fresh tree,
// transfer completions before new transmission attempts.
enum EvKind : int {
    ev_death = 0,
    ev_repair = 1,
    ev_periodic = 2,
    ev_report = 3,
    ev_complete = 4,
    ev_try = 5,
    ev_sample = 6,
    ev_end = 7,
};

struct Event {
    Micros t = 0;
    int kind = 0;
    NodeId node = -1;
    std::uint64_t seq = 0;
    std::int64_t aux = 0;

    bool operator>(const Event& o) const {
        if (t != o.t) return t > o.t;
        if (kind != o.kind) return kind > o.kind;
        if (node != o.node) return node > o.node;
        return seq > o.seq;
    }
};

struct PoolEntry {
    DataReport report;
    Micros ready_at = 0;
    std::uint64_t origin_mask = 0;
};

struct SinkPacket {
    DataReport report;
    int sink_index = -1;
    Micros ready_at = 0;
};

struct Transfer {
    NodeId sender = -1;
    NodeId receiver = -1;
    Micros start = 0;
    Micros end = 0;
    Micros queued_at = 0;
    TxKind kind = TxKind::tree_data;
    DataReport report;
    std::uint64_t origin_mask = 0;
    int sink_index = -1;
    bool done = false;
};

struct NodeState {
    bool alive = true;
    double residual = 0.0;
    Micros last_update = 0;       // idle accounting anchor
    Micros busy_until = 0;        // transceiver free time
    bool busy = false;
    int active_transfer = -1;
    std::uint64_t death_version = 0;
    std::vector<PoolEntry> pool;  // tree-bound payloads
    std::deque<SinkPacket> relay_q;
    std::vector<std::pair<Micros, NodeId>> waiters; // senders blocked on this receiver
    long next_seq = 0;
    Micros jitter = 0;
};

class Engine {
public:
    Engine(const SimConfig& config, const Topology& topo, const EnergyView& energies,
           Scheme scheme)
        : cfg_(config), topo_(topo), scheme_(scheme) {
        n_ = topo.node_count();
        nodes_.resize(static_cast<std::size_t>(n_));
        for (NodeId v = 0; v < n_; ++v) {
            nodes_[idx(v)].residual = energies[idx(v)];
        }
        trace_.initial_energy = energies;
        trace_.tx_energy_by_node.assign(static_cast<std::size_t>(n_), 0.0);
        trace_.rx_energy_by_node.assign(static_cast<std::size_t>(n_), 0.0);
        trace_.busy_time_by_node_s.assign(static_cast<std::size_t>(n_), 0.0);
        trace_.death_time.assign(static_cast<std::size_t>(n_), -1);
        parent_.assign(static_cast<std::size_t>(n_), -1);
        member_.assign(static_cast<std::size_t>(n_), 0);
        source_index_.assign(static_cast<std::size_t>(n_), -1);
        for (std::size_t i = 0; i < topo_.sources.size(); ++i)
            source_index_[idx(topo_.sources[i])] = static_cast<int>(i);

        idle_per_us_ = cfg_.idle_power * 1e-6;
        report_period_us_ = to_micros(1.0 / cfg_.data_rate);
        duration_us_ = to_micros(cfg_.sim_duration);
        // packet air time rounded to the microsecond grid the engine runs on
        data_duration_us_ = static_cast<Micros>(
            std::llround(8.0 * cfg_.data_packet_size / cfg_.mac_bandwidth * 1e6));
        if (data_duration_us_ < 1) data_duration_us_ = 1;
        trace_.control.discount = cfg_.discount;

        Rng jitter_rng = derive_rng(cfg_.seed, RngPurpose::data_jitter);
        Micros jmax = to_micros(cfg_.start_jitter_max);
        for (NodeId s : topo_.sources)
            nodes_[idx(s)].jitter =
                jmax > 0 ? static_cast<Micros>(jitter_rng.below(static_cast<std::uint64_t>(jmax) + 1))
                         : 0;
    }

    SimTrace run() {
        rebuild_trees(0, RebuildReason::periodic, /*initial=*/true);
        recompute_routes();
        for (NodeId s : topo_.sources) schedule(nodes_[idx(s)].jitter, ev_report, s);
        schedule(to_micros(cfg_.energy_log_period), ev_sample, -1);
        if (!cfg_.run_to_extinction) schedule(duration_us_, ev_end, -1);
        Micros next_periodic = to_micros(cfg_.timeframe);
        schedule(next_periodic, ev_periodic, -1);
        for (NodeId v = 0; v < n_; ++v) schedule_death_forecast(v);

        while (!heap_.empty()) {
            Event ev = heap_.top();
            heap_.pop();
            now_ = ev.t;
            switch (ev.kind) {
                case ev_death: handle_death(ev); break;
                case ev_repair: handle_repair(ev); break;
                case ev_periodic:
                    handle_periodic(ev);
                    next_periodic += to_micros(cfg_.timeframe);
                    schedule(next_periodic, ev_periodic, -1);
                    break;
                case ev_report: handle_report(ev); break;
                case ev_complete: handle_complete(ev); break;
                case ev_try: try_start(ev.node); break;
                case ev_sample: handle_sample(ev); break;
                case ev_end: finished_ = true; break;
            }
            if (finished_) break;
        }
        finalize();
        return std::move(trace_);
    }

private:
    // ---- scheduling ---------------------------------------------------------

    void schedule(Micros t, int kind, NodeId node, std::int64_t aux = 0) {
        heap_.push(Event{t, kind, node, seq_counter_++, aux});
    }

    void schedule_death_forecast(NodeId v) {
        NodeState& s = nodes_[idx(v)];
        if (!s.alive || s.busy) return;
        ++s.death_version;
        Micros steps = static_cast<Micros>(std::floor(s.residual / idle_per_us_));
        schedule(s.last_update + steps, ev_death, v, static_cast<std::int64_t>(s.death_version));
    }

    // ---- energy -------------------------------------------------------------

    // Idle drain between a node's bookkeeping anchor and t. Never called for
    // busy nodes: their energy settles at transfer completion.
    void settle_idle(NodeId v, Micros t) {
        NodeState& s = nodes_[idx(v)];
        if (!s.alive || s.busy || t <= s.last_update) return;
        double drain = idle_per_us_ * static_cast<double>(t - s.last_update);
        s.residual = std::max(0.0, s.residual - drain);
        s.last_update = t;
    }

    double observed_residual(NodeId v, Micros t) const {
        const NodeState& s = nodes_[idx(v)];
        if (!s.alive || t <= s.last_update) return s.residual;
        return std::max(0.0, s.residual - idle_per_us_ * static_cast<double>(t - s.last_update));
    }

    // ---- deaths -------------------------------------------------------------

    void handle_death(const Event& ev) {
        NodeState& s = nodes_[idx(ev.node)];
        if (!s.alive || s.busy) return;
        if (static_cast<std::uint64_t>(ev.aux) != s.death_version) return; // stale forecast
        settle_idle(ev.node, now_);
        if (s.residual >= idle_per_us_) { // drifted; try again later
            schedule_death_forecast(ev.node);
            return;
        }
        s.alive = false;
        trace_.deaths.push_back({now_, ev.node});
        trace_.death_time[idx(ev.node)] = now_;
        for (std::size_t i = 0; i < s.pool.size(); ++i)
            trace_.drops.push_back({now_, ev.node, parent_[idx(ev.node)], DropReason::dead_sender});
        s.pool.clear();
        for (std::size_t i = 0; i < s.relay_q.size(); ++i)
            trace_.drops.push_back({now_, ev.node, -1, DropReason::dead_sender});
        s.relay_q.clear();
        s.waiters.clear();

        if (member_[idx(ev.node)]) {
            if (!repair_pending_) {
                repair_pending_ = true;
                schedule(now_, ev_repair, -1);
            }
        } else {
            recompute_routes();
        }

        if (cfg_.run_to_extinction) {
            bool any = false;
            for (NodeId src : topo_.sources)
                if (nodes_[idx(src)].alive) { any = true; break; }
            if (!any) finished_ = true;
        }
    }

    void handle_repair(const Event&) {
        repair_pending_ = false;
        rebuild_trees(now_, RebuildReason::repair, false);
        recompute_routes();
    }

    void handle_periodic(const Event&) {
        rebuild_trees(now_, RebuildReason::periodic, false);
        recompute_routes();
    }

    // ---- tree maintenance ---------------------------------------------------

    std::vector<NodeId> alive_sources() const {
        std::vector<NodeId> out;
        for (NodeId s : topo_.sources)
            if (nodes_[idx(s)].alive) out.push_back(s);
        return out;
    }

    TreeBuildResult build(const std::vector<NodeId>& sources, const EnergyView& view) const {
        switch (scheme_) {
            case Scheme::espan: return build_espan(topo_, view, sources);
            case Scheme::dlmt: return build_dlmt(topo_, view, sources);
            case Scheme::clmt: return build_clmt(topo_, view, sources);
        }
        throw InvalidConfigError("unknown scheme");
    }

    void rebuild_trees(Micros t, RebuildReason reason, bool initial) {
        accumulate_depth(t);
        std::vector<NodeId> alive = alive_sources();
        std::fill(parent_.begin(), parent_.end(), -1);
        std::fill(member_.begin(), member_.end(), 0);
        reporting_root_ = -1;
        reporting_atd_ = 0.0;
        if (alive.empty()) return; // field idles on, nothing to rebuild

        // Current residual energies drive every rebuild.
        EnergyView view(static_cast<std::size_t>(n_), 0.0);
        for (NodeId v = 0; v < n_; ++v) view[idx(v)] = observed_residual(v, t);

        // Connected components of the surviving sources; each elects its own
        // tree and the largest one reports to the sinks.
        std::vector<std::vector<NodeId>> comps = components(alive);
        if (comps.size() > 1)
            trace_.partitions.push_back({t, static_cast<int>(comps.size())});

        std::size_t largest = 0;
        for (std::size_t i = 1; i < comps.size(); ++i)
            if (comps[i].size() > comps[largest].size()) largest = i;

        double reported_energy = 0.0;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            TreeBuildResult r = build(comps[i], view);
            for (NodeId v : r.tree.members) {
                member_[idx(v)] = 1;
                parent_[idx(v)] = r.tree.parent[idx(v)];
            }
            if (i == largest) {
                reporting_root_ = r.tree.root;
                reporting_atd_ = r.tree.average_depth();
                reported_energy = r.tree_energy;
                if (initial) {
                    trace_.initial_tree = r.tree;
                    trace_.initial_tree_energy = r.tree_energy;
                }
            }
            ControlTrace ct = simulate_control(topo_, comps[i], scheme_, cfg_, round_);
            trace_.control.append(ct);
        }
        ++round_;
        if (!initial)
            trace_.rebuilds.push_back({t, reason, reporting_root_, reported_energy, reporting_atd_,
                                       static_cast<int>(comps.size())});
        depth_anchor_ = t;

        // Anything already pooled flows toward the new parents.
        for (NodeId v : alive)
            if (!nodes_[idx(v)].pool.empty() || !nodes_[idx(v)].relay_q.empty())
                schedule(t, ev_try, v);
    }

    std::vector<std::vector<NodeId>> components(const std::vector<NodeId>& alive) const {
        std::vector<char> mask(static_cast<std::size_t>(n_), 0);
        for (NodeId v : alive) mask[idx(v)] = 1;
        std::vector<char> seen(static_cast<std::size_t>(n_), 0);
        std::vector<std::vector<NodeId>> comps;
        for (NodeId v : alive) {
            if (seen[idx(v)]) continue;
            std::vector<NodeId> comp;
            std::deque<NodeId> queue{v};
            seen[idx(v)] = 1;
            while (!queue.empty()) {
                NodeId w = queue.front();
                queue.pop_front();
                comp.push_back(w);
                for (NodeId u : topo_.adjacency[idx(w)])
                    if (mask[idx(u)] && !seen[idx(u)]) {
                        seen[idx(u)] = 1;
                        queue.push_back(u);
                    }
            }
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
        return comps;
    }

    void accumulate_depth(Micros t) {
        if (reporting_root_ >= 0 && t > depth_anchor_) {
            depth_acc_ += reporting_atd_ * static_cast<double>(t - depth_anchor_);
            depth_time_ += static_cast<double>(t - depth_anchor_);
        }
        depth_anchor_ = t;
    }

    // ---- routing ------------------------------------------------------------

    void recompute_routes() {
        next_hop_.assign(topo_.sinks.size(), std::vector<NodeId>(static_cast<std::size_t>(n_), -1));
        for (std::size_t si = 0; si < topo_.sinks.size(); ++si) {
            NodeId sink = topo_.sinks[si];
            if (!nodes_[idx(sink)].alive) continue;
            std::vector<int> dist(static_cast<std::size_t>(n_), -1);
            std::deque<NodeId> queue{sink};
            dist[idx(sink)] = 0;
            while (!queue.empty()) {
                NodeId v = queue.front();
                queue.pop_front();
                for (NodeId u : topo_.adjacency[idx(v)]) {
                    if (!nodes_[idx(u)].alive || dist[idx(u)] >= 0) continue;
                    dist[idx(u)] = dist[idx(v)] + 1;
                    queue.push_back(u);
                }
            }
            // Lowest-id neighbor one hop closer wins ties.
            auto& hops = next_hop_[si];
            for (NodeId v = 0; v < n_; ++v) {
                if (dist[idx(v)] <= 0) continue;
                for (NodeId u : topo_.adjacency[idx(v)]) {
                    if (nodes_[idx(u)].alive && dist[idx(u)] == dist[idx(v)] - 1) {
                        if (hops[idx(v)] < 0 || u < hops[idx(v)]) hops[idx(v)] = u;
                    }
                }
            }
        }
    }

    // ---- data plane ---------------------------------------------------------

    void handle_report(const Event& ev) {
        NodeState& s = nodes_[idx(ev.node)];
        if (!s.alive) return;
        DataReport r;
        r.origin = ev.node;
        r.seq = s.next_seq++;
        r.value = static_cast<double>(ev.node) + 0.001 * static_cast<double>(r.seq);
        r.created_at = now_;
        r.size = cfg_.data_packet_size;
        r.fused_count = 1;
        std::uint64_t mask = source_mask(ev.node);
        s.pool.push_back({r, now_, mask});

        if (ev.node == reporting_root_) {
            flush_root(ev.node);
        } else {
            try_start(ev.node);
        }
        schedule(now_ + report_period_us_, ev_report, ev.node);
    }

    std::uint64_t source_mask(NodeId v) const {
        int i = source_index_[idx(v)];
        if (i < 0 || i >= 64) return 0;
        return std::uint64_t{1} << i;
    }

    // The root empties its pool toward the sinks once per reporting interval.
    // Packets whose origins overlap something already taken wait for the next
    // interval so one fused packet never counts a source twice.
    void flush_root(NodeId root) {
        NodeState& s = nodes_[idx(root)];
        if (s.pool.empty()) return;
        if (cfg_.aggregation) {
            std::vector<PoolEntry> taken;
            std::vector<PoolEntry> kept;
            std::uint64_t mask = 0;
            for (auto& e : s.pool) {
                if (e.origin_mask != 0 && (mask & e.origin_mask) != 0) {
                    kept.push_back(std::move(e));
                } else {
                    mask |= e.origin_mask;
                    taken.push_back(std::move(e));
                }
            }
            s.pool = std::move(kept);
            if (taken.empty()) return;
            DataReport fused = fuse(taken, root);
            dispatch_to_sinks(root, fused);
        } else {
            for (auto& e : s.pool) dispatch_to_sinks(root, e.report);
            s.pool.clear();
        }
        try_start(root);
    }

    DataReport fuse(const std::vector<PoolEntry>& entries, NodeId self) {
        double weighted = 0.0;
        int count = 0;
        for (const auto& e : entries) {
            weighted += e.report.value * e.report.fused_count;
            count += e.report.fused_count;
        }
        DataReport out;
        out.origin = self;
        out.seq = nodes_[idx(self)].next_seq; // not consumed, diagnostic only
        out.value = weighted / count;
        out.created_at = now_;
        out.size = cfg_.data_packet_size;
        out.fused_count = count;
        return out;
    }

    void dispatch_to_sinks(NodeId root, const DataReport& packet) {
        ++trace_.root_dispatch_count;
        NodeState& s = nodes_[idx(root)];
        for (std::size_t si = 0; si < topo_.sinks.size(); ++si) {
            if (next_hop_[si][idx(root)] < 0 && topo_.sinks[si] != root) {
                trace_.unreachable_sinks.push_back({now_, topo_.sinks[si]});
                continue;
            }
            SinkPacket sp;
            sp.report = packet;
            sp.report.created_at = now_;
            sp.sink_index = static_cast<int>(si);
            sp.ready_at = now_;
            s.relay_q.push_back(std::move(sp));
        }
    }

    void try_start(NodeId v) {
        NodeState& s = nodes_[idx(v)];
        if (!s.alive || s.busy) return;

        while (true) {
            // Tree payload first, then sink relaying.
            bool have_tree = member_[idx(v)] && v != reporting_root_ && !s.pool.empty() &&
                             parent_[idx(v)] >= 0;
            if (have_tree) {
                NodeId parent = parent_[idx(v)];
                if (!nodes_[idx(parent)].alive) {
                    // Repair already triggered by the death; drop this batch.
                    for (std::size_t i = 0; i < s.pool.size(); ++i)
                        trace_.drops.push_back({now_, v, parent, DropReason::dead_receiver});
                    s.pool.clear();
                    continue;
                }
                Transfer tr;
                tr.sender = v;
                tr.receiver = parent;
                tr.kind = TxKind::tree_data;
                if (cfg_.aggregation) {
                    Micros queued = s.pool.front().ready_at;
                    std::uint64_t mask = 0;
                    for (const auto& e : s.pool) {
                        queued = std::min(queued, e.ready_at);
                        mask |= e.origin_mask;
                    }
                    tr.report = fuse(s.pool, v);
                    tr.origin_mask = mask;
                    tr.queued_at = queued;
                    s.pool.clear();
                } else {
                    tr.report = s.pool.front().report;
                    tr.origin_mask = s.pool.front().origin_mask;
                    tr.queued_at = s.pool.front().ready_at;
                    s.pool.erase(s.pool.begin());
                }
                if (!begin_transfer(std::move(tr))) return;
                return;
            }
            if (!s.relay_q.empty()) {
                SinkPacket& head = s.relay_q.front();
                NodeId sink = topo_.sinks[static_cast<std::size_t>(head.sink_index)];
                NodeId hop = next_hop_[static_cast<std::size_t>(head.sink_index)][idx(v)];
                if (hop < 0) {
                    trace_.drops.push_back({now_, v, sink, DropReason::no_route});
                    s.relay_q.pop_front();
                    continue;
                }
                if (!nodes_[idx(hop)].alive) {
                    recompute_routes();
                    continue;
                }
                Transfer tr;
                tr.sender = v;
                tr.receiver = hop;
                tr.kind = TxKind::sink_data;
                tr.report = head.report;
                tr.sink_index = head.sink_index;
                tr.queued_at = head.ready_at;
                s.relay_q.pop_front();
                if (!begin_transfer(std::move(tr))) return;
                return;
            }
            return;
        }
    }

    // Returns false when the sender must wait (receiver busy or payload was
    // requeued); true when the transfer started or the payload was dropped.
    bool begin_transfer(Transfer tr) {
        NodeState& snd = nodes_[idx(tr.sender)];
        NodeState& rcv = nodes_[idx(tr.receiver)];
        if (rcv.busy) {
            requeue(tr);
            rcv.waiters.push_back({now_, tr.sender});
            return false;
        }
        settle_idle(tr.sender, now_);
        settle_idle(tr.receiver, now_);
        double tx_need = cfg_.tx_power * static_cast<double>(data_duration_us_) * 1e-6;
        double rx_need = cfg_.rx_power * static_cast<double>(data_duration_us_) * 1e-6;
        if (snd.residual < tx_need) {
            // Sender cannot afford the transmission; it is about to brown out.
            requeue(tr);
            return false;
        }
        if (rcv.residual < rx_need) {
            // Receiver will die first; retry once it is gone and let the
            // normal dead-receiver path sort the packet out.
            requeue(tr);
            schedule(rcv.last_update +
                         static_cast<Micros>(std::floor(rcv.residual / idle_per_us_)) + 1,
                     ev_try, tr.sender);
            return false;
        }

        Micros end = now_ + data_duration_us_;
        snd.busy = rcv.busy = true;
        snd.busy_until = rcv.busy_until = end;
        tr.start = now_;
        tr.end = end;
        int id = static_cast<int>(transfers_.size());
        snd.active_transfer = rcv.active_transfer = id;
        transfers_.push_back(std::move(tr));
        schedule(end, ev_complete, transfers_.back().receiver, id);
        return true;
    }

    void requeue(Transfer& tr) {
        NodeState& s = nodes_[idx(tr.sender)];
        if (tr.kind == TxKind::tree_data) {
            s.pool.insert(s.pool.begin(), {tr.report, tr.queued_at, tr.origin_mask});
        } else {
            SinkPacket sp;
            sp.report = tr.report;
            sp.sink_index = tr.sink_index;
            sp.ready_at = tr.queued_at;
            s.relay_q.push_front(std::move(sp));
        }
    }

    void handle_complete(const Event& ev) {
        Transfer& tr = transfers_[static_cast<std::size_t>(ev.aux)];
        if (tr.done) return;
        tr.done = true;
        NodeState& snd = nodes_[idx(tr.sender)];
        NodeState& rcv = nodes_[idx(tr.receiver)];

        double dur_s = static_cast<double>(tr.end - tr.start) * 1e-6;
        snd.residual -= cfg_.tx_power * dur_s;
        rcv.residual -= cfg_.rx_power * dur_s;
        trace_.tx_energy_by_node[idx(tr.sender)] += cfg_.tx_power * dur_s;
        trace_.rx_energy_by_node[idx(tr.receiver)] += cfg_.rx_power * dur_s;
        trace_.busy_time_by_node_s[idx(tr.sender)] += dur_s;
        trace_.busy_time_by_node_s[idx(tr.receiver)] += dur_s;
        snd.last_update = rcv.last_update = tr.end;
        snd.busy = rcv.busy = false;
        snd.active_transfer = rcv.active_transfer = -1;

        trace_.transmissions.push_back(
            {tr.end, tr.sender, tr.receiver, tr.report.size, tr.kind, tr.queued_at});
        if (topo_.is_source(tr.sender))
            trace_.source_tx_energy.push_back({tr.end, tr.sender, snd.residual});

        schedule_death_forecast(tr.sender);
        schedule_death_forecast(tr.receiver);

        deliver_payload(tr);

        release_waiters(tr.receiver);
        release_waiters(tr.sender);
        schedule(now_, ev_try, tr.sender);
        schedule(now_, ev_try, tr.receiver);
    }

    void deliver_payload(Transfer& tr) {
        NodeState& rcv = nodes_[idx(tr.receiver)];
        if (tr.kind == TxKind::tree_data) {
            // The tree may have been rebuilt mid-flight; payloads on edges
            // that are no longer tree edges are lost.
            bool edge_valid = member_[idx(tr.sender)] && member_[idx(tr.receiver)] &&
                              parent_[idx(tr.sender)] == tr.receiver;
            if (!edge_valid) {
                trace_.drops.push_back({now_, tr.sender, tr.receiver, DropReason::stale_edge});
                return;
            }
            rcv.pool.push_back({tr.report, now_, tr.origin_mask});
            return;
        }
        NodeId sink = topo_.sinks[static_cast<std::size_t>(tr.sink_index)];
        if (tr.receiver == sink) {
            trace_.deliveries.push_back(
                {tr.report.created_at, sink, now_, tr.report.fused_count});
        } else {
            SinkPacket sp;
            sp.report = tr.report;
            sp.sink_index = tr.sink_index;
            sp.ready_at = tr.queued_at;
            rcv.relay_q.push_back(std::move(sp));
        }
    }

    void release_waiters(NodeId v) {
        NodeState& s = nodes_[idx(v)];
        if (s.waiters.empty()) return;
        std::sort(s.waiters.begin(), s.waiters.end());
        for (const auto& [t, sender] : s.waiters) schedule(now_, ev_try, sender);
        s.waiters.clear();
    }

    void handle_sample(const Event&) {
        for (NodeId v = 0; v < n_; ++v)
            trace_.energy_log.push_back({now_, v, observed_residual(v, now_)});
        schedule(now_ + to_micros(cfg_.energy_log_period), ev_sample, -1);
    }

    void finalize() {
        Micros end = cfg_.run_to_extinction ? now_ : duration_us_;
        trace_.end_time = end;
        accumulate_depth(end);
        trace_.final_energy.assign(static_cast<std::size_t>(n_), 0.0);
        for (NodeId v = 0; v < n_; ++v) {
            NodeState& s = nodes_[idx(v)];
            if (s.alive && s.busy) {
                // A transfer still in the air at the end never happened:
                // no energy moved, no transmission recorded, the endpoints
                // idled through it.
                s.busy = false;
                s.last_update = transfers_[static_cast<std::size_t>(s.active_transfer)].start;
            }
            settle_idle(v, end);
            trace_.final_energy[idx(v)] = s.residual;
        }
        trace_.time_weighted_depth = depth_time_ > 0 ? depth_acc_ / depth_time_ : 0.0;
    }

    // ---- members ------------------------------------------------------------

    const SimConfig& cfg_;
    const Topology& topo_;
    Scheme scheme_;
    int n_ = 0;

    std::vector<NodeState> nodes_;
    std::vector<NodeId> parent_;
    std::vector<char> member_;
    std::vector<int> source_index_;
    NodeId reporting_root_ = -1;
    double reporting_atd_ = 0.0;
    std::vector<std::vector<NodeId>> next_hop_; // per sink index
    std::vector<Transfer> transfers_;

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
    std::uint64_t seq_counter_ = 0;
    Micros now_ = 0;
    bool finished_ = false;
    bool repair_pending_ = false;
    int round_ = 0;

    double idle_per_us_ = 0.0;
    Micros report_period_us_ = 0;
    Micros duration_us_ = 0;
    Micros data_duration_us_ = 0;

    double depth_acc_ = 0.0;
    double depth_time_ = 0.0;
    Micros depth_anchor_ = 0;

    SimTrace trace_;
};

} // namespace

SimTrace run(const SimConfig& config, const Topology& topo, const EnergyView& energies,
             Scheme scheme) {
    config.validate();
    if (static_cast<int>(energies.size()) != topo.node_count())
        throw InvalidConfigError("run: energy view does not match the topology");
    Engine engine(config, topo, energies, scheme);
    return engine.run();
}

void write_transmissions_csv(std::ostream& os, const SimTrace& trace) {
    os << "t_us,sender,receiver,bytes,kind,queued_t_us\n";
    for (const auto& t : trace.transmissions)
        os << t.time << "," << t.sender << "," << t.receiver << "," << t.size << ","
           << to_string(t.kind) << "," << t.queued_at << "\n";
}

void write_deaths_csv(std::ostream& os, const SimTrace& trace) {
    os << "t_us,node\n";
    for (const auto& d : trace.deaths) os << d.time << "," << d.node << "\n";
}

void write_energylog_csv(std::ostream& os, const SimTrace& trace) {
    os << "t_ms,node,residual_j\n";
    os.precision(17);
    for (const auto& e : trace.energy_log)
        os << (e.time / 1000) << "," << e.node << "," << e.residual_j << "\n";
}

void write_deliveries_csv(std::ostream& os, const SimTrace& trace) {
    os << "created_t_us,sink,delivered_t_us,fused_count\n";
    for (const auto& d : trace.deliveries)
        os << d.created_at << "," << d.sink << "," << d.delivered_at << "," << d.fused_count
           << "\n";
}

} // namespace lmt
