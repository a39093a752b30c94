#include "lmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lmt/errors.hpp"

namespace lmt {

namespace {
std::size_t idx(NodeId v) { return static_cast<std::size_t>(v); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}
} // namespace

double atd_formula(double H, double h1, double h2) {
    double denom = 2.0 * H + h1;
    if (denom == 0.0) throw UndefinedMetricError("atd_formula: 2H + h1 is zero");
    return (H * H + h1 * h1 + h2 * h2) / denom;
}

double econs_formula(double e_cir, double e_amp, double k, double d) {
    return e_cir + k * e_amp + d + 2.0 * k;
}

double avg_dly_formula(double rs, double sp, double atd, double rec_snk, double rec_src) {
    double denom = rec_snk + rec_src;
    if (denom == 0.0) throw UndefinedMetricError("avg_dly: rec_snk + rec_src is zero");
    return (rs * rec_snk + sp * atd + rs * rec_src) / denom;
}

double avg_dr_paper(long long sent_by_root, long long received_at_sinks) {
    if (received_at_sinks == 0)
        throw UndefinedMetricError("avg_dr_paper: nothing received at the sinks");
    return static_cast<double>(sent_by_root) / static_cast<double>(received_at_sinks);
}

double avg_dr(long long sent_by_root, long long received_at_sinks, int sink_count) {
    if (sent_by_root == 0) throw UndefinedMetricError("avg_dr: root sent nothing");
    if (sink_count == 0) throw UndefinedMetricError("avg_dr: no sinks");
    return static_cast<double>(received_at_sinks) /
           (static_cast<double>(sent_by_root) * static_cast<double>(sink_count));
}

double atd_empirical(const AggregationTree& tree) {
    if (tree.members.empty()) throw UndefinedMetricError("atd_empirical: empty tree");
    return tree.average_depth();
}

double ade_empirical(const SimTrace& trace, int n) {
    if (n < 1) throw UndefinedMetricError("ade_empirical: no nodes");
    double total = 0.0;
    for (std::size_t v = 0; v < trace.initial_energy.size(); ++v)
        total += trace.initial_energy[v] - trace.final_energy[v];
    return total / static_cast<double>(n);
}

double ade_delivery(const SimTrace& trace, int n) {
    if (n < 1) throw UndefinedMetricError("ade_delivery: no nodes");
    double total = 0.0;
    for (std::size_t v = 0; v < trace.tx_energy_by_node.size(); ++v)
        total += trace.tx_energy_by_node[v] + trace.rx_energy_by_node[v];
    return total / static_cast<double>(n);
}

void LifetimeEstimator::add_sample(double t_s, double residual_j) {
    samples_.emplace_back(t_s, residual_j);
    if (samples_.size() > window_) samples_.erase(samples_.begin());
}

double LifetimeEstimator::latest_drain() const {
    if (samples_.size() < 2)
        throw InsufficientDataError("drain_rate: need at least two samples");
    const auto& [t1, e1] = samples_[samples_.size() - 2];
    const auto& [t2, e2] = samples_.back();
    if (t2 == t1) throw InsufficientDataError("drain_rate: degenerate time step");
    return (e1 - e2) / (t2 - t1);
}

double LifetimeEstimator::mean_drain() const {
    if (samples_.size() < 2)
        throw InsufficientDataError("mean_drain: need at least two samples");
    double total = 0.0;
    int count = 0;
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        double dt = samples_[i].first - samples_[i - 1].first;
        if (dt <= 0) continue;
        total += (samples_[i - 1].second - samples_[i].second) / dt;
        ++count;
    }
    if (count == 0) throw InsufficientDataError("mean_drain: no usable sample pairs");
    return total / count;
}

double anlt_predicted(double residual_j, double mean_drain_j_per_s) {
    if (mean_drain_j_per_s < 0)
        throw UndefinedMetricError("anlt_predicted: negative drain");
    if (residual_j <= 0) return 0.0;
    if (mean_drain_j_per_s == 0.0) return std::numeric_limits<double>::infinity();
    return residual_j / mean_drain_j_per_s;
}

std::optional<double> LifetimeCurve::time_to_level(int level) const {
    if (initial <= level) return 0.0;
    for (const auto& [t, alive] : steps)
        if (alive <= level) return t;
    return std::nullopt;
}

AnltResult anlt_empirical(const SimTrace& trace, const Topology& topo) {
    AnltResult out;
    out.curve.initial = static_cast<int>(topo.sources.size());
    double end_s = to_seconds(trace.end_time);
    std::vector<std::pair<double, NodeId>> deaths;
    double total = 0.0;
    for (NodeId s : topo.sources) {
        Micros dt = trace.death_time[idx(s)];
        bool dead = dt >= 0;
        double t = dead ? to_seconds(dt) : end_s;
        out.death_times_s.push_back(t);
        out.censored.push_back(!dead);
        total += t;
        if (dead) deaths.emplace_back(to_seconds(dt), s);
    }
    out.mean_s = topo.sources.empty() ? 0.0 : total / static_cast<double>(topo.sources.size());
    std::sort(deaths.begin(), deaths.end());
    int alive = out.curve.initial;
    for (const auto& [t, node] : deaths) out.curve.steps.emplace_back(t, --alive);
    return out;
}

double lifetime_extension(double t_a, double t_b) {
    if (t_b == 0.0) throw NotComparableError("lifetime_extension: reference time is zero");
    return (t_a - t_b) / t_b * 100.0;
}

double lifetime_extension(const LifetimeCurve& a, const LifetimeCurve& b, int level) {
    auto ta = a.time_to_level(level);
    auto tb = b.time_to_level(level);
    if (!ta || !tb)
        throw NotComparableError("lifetime_extension: a curve never reaches level " +
                                 std::to_string(level));
    return lifetime_extension(*ta, *tb);
}

std::pair<double, double> ci95(const std::vector<double>& samples) {
    if (samples.size() < 2) throw InsufficientDataError("ci95: need at least two samples");
    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                  static_cast<double>(samples.size());
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    double half = 1.96 * sd / std::sqrt(static_cast<double>(samples.size()));
    return {mean, half};
}

MetricsReport compute_metrics(const SimConfig& config, const Topology& topo,
                              const SimTrace& trace, Scheme scheme) {
    MetricsReport m;
    m.n = topo.node_count();
    m.scheme = scheme;
    m.seed = config.seed;
    m.aggregation = config.aggregation;
    m.source_count = static_cast<int>(topo.sources.size());

    m.asc_bytes = asc(trace.control, m.source_count);
    m.atd_emp = trace.time_weighted_depth;

    // Literal formula inputs, chosen once and documented: H = mean source
    // depth, h1 = mean leaf depth, h2 = one hop (sources are interconnected).
    {
        const AggregationTree& t = trace.initial_tree;
        double H = t.members.empty() ? 0.0 : t.average_depth();
        double h1 = 0.0;
        auto lv = t.members.empty() ? std::vector<NodeId>{} : t.leaves();
        for (NodeId v : lv) h1 += t.depth[idx(v)];
        if (!lv.empty()) h1 /= static_cast<double>(lv.size());
        double h2 = t.members.size() > 1 ? 1.0 : 0.0;
        m.atd_paper = (2.0 * H + h1) == 0.0 ? 0.0 : atd_formula(H, h1, h2);
    }

    m.ade_total_j = ade_empirical(trace, m.n);
    m.ade_delivery_j = ade_delivery(trace, m.n);

    {
        TransmitCost c = transmit_cost(config.data_packet_size, config);
        double mean_dist = 0.0;
        for (const auto& t : trace.transmissions) mean_dist += topo.distance(t.sender, t.receiver);
        if (!trace.transmissions.empty()) mean_dist /= static_cast<double>(trace.transmissions.size());
        m.econs_paper = econs_formula(c.rx_energy_j, c.tx_energy_j,
                                      static_cast<double>(trace.transmissions.size()), mean_dist);
    }

    AnltResult anlt = anlt_empirical(trace, topo);
    m.anlt_mean_s = anlt.mean_s;

    // Predicted lifetime: observed death time for the dead, remaining energy
    // over the estimated drain for the living.
    {
        double end_s = to_seconds(trace.end_time);
        double total = 0.0;
        for (NodeId s : topo.sources) {
            if (trace.death_time[idx(s)] >= 0) {
                total += to_seconds(trace.death_time[idx(s)]);
                continue;
            }
            LifetimeEstimator est;
            for (const auto& smp : trace.source_tx_energy)
                if (smp.node == s) est.add_sample(to_seconds(smp.time), smp.residual_j);
            double drain;
            if (est.sample_count() >= 2) {
                drain = est.mean_drain();
            } else {
                drain = end_s > 0
                            ? (trace.initial_energy[idx(s)] - trace.final_energy[idx(s)]) / end_s
                            : 0.0;
            }
            double left = trace.final_energy[idx(s)];
            double pred = drain > 0 ? left / drain : 0.0;
            total += end_s + pred;
        }
        m.anlt_predicted_s =
            topo.sources.empty() ? 0.0 : total / static_cast<double>(topo.sources.size());
    }

    long long tree_rx = 0;
    double sp_total = 0.0;
    for (const auto& t : trace.transmissions) {
        if (t.kind != TxKind::tree_data) continue;
        ++tree_rx;
        sp_total += to_seconds(t.time - t.queued_at);
    }
    m.avg_dly_sp_s = tree_rx > 0 ? sp_total / static_cast<double>(tree_rx) : 0.0;

    double rs_total = 0.0;
    for (const auto& d : trace.deliveries) rs_total += to_seconds(d.delivered_at - d.created_at);
    m.deliveries = static_cast<long long>(trace.deliveries.size());
    m.avg_dly_rs_s = m.deliveries > 0 ? rs_total / static_cast<double>(m.deliveries) : 0.0;

    m.avg_dly_s = (m.deliveries + tree_rx) > 0
                      ? avg_dly_formula(m.avg_dly_rs_s, m.avg_dly_sp_s, m.atd_emp,
                                        static_cast<double>(m.deliveries),
                                        static_cast<double>(tree_rx))
                      : 0.0;

    long long sent = trace.root_dispatch_count;
    m.avg_dr_ratio = (sent > 0 && !topo.sinks.empty())
                         ? avg_dr(sent, m.deliveries, static_cast<int>(topo.sinks.size()))
                         : 0.0;
    m.avg_dr_paper_ratio = m.deliveries > 0 ? avg_dr_paper(sent, m.deliveries) : 0.0;

    m.drops = static_cast<long long>(trace.drops.size());
    m.deaths = static_cast<int>(trace.deaths.size());
    m.rebuilds = static_cast<int>(trace.rebuilds.size());
    m.control_bytes = trace.control.total_source_bytes();
    m.initial_tree_energy = trace.initial_tree_energy;
    m.sim_end_s = to_seconds(trace.end_time);
    return m;
}

std::string metrics_csv_header() {
    return "n,scheme,seed,aggregation,sources,asc_bytes,atd,atd_paper,ade_total_j,"
           "ade_delivery_j,econs_paper,anlt_mean_s,anlt_predicted_s,avg_dly_rs_s,avg_dly_sp_s,"
           "avg_dly_s,avg_dr,avg_dr_paper,deliveries,drops,deaths,rebuilds,control_bytes,"
           "tree_energy_j,sim_end_s";
}

std::string metrics_csv_row(const MetricsReport& m) {
    std::ostringstream os;
    os << m.n << "," << to_string(m.scheme) << "," << m.seed << "," << (m.aggregation ? 1 : 0)
       << "," << m.source_count << "," << fmt(m.asc_bytes) << "," << fmt(m.atd_emp) << ","
       << fmt(m.atd_paper) << "," << fmt(m.ade_total_j) << "," << fmt(m.ade_delivery_j) << ","
       << fmt(m.econs_paper) << "," << fmt(m.anlt_mean_s) << "," << fmt(m.anlt_predicted_s) << ","
       << fmt(m.avg_dly_rs_s) << "," << fmt(m.avg_dly_sp_s) << "," << fmt(m.avg_dly_s) << ","
       << fmt(m.avg_dr_ratio) << "," << fmt(m.avg_dr_paper_ratio) << "," << m.deliveries << ","
       << m.drops << "," << m.deaths << "," << m.rebuilds << "," << m.control_bytes << ","
       << fmt(m.initial_tree_energy) << "," << fmt(m.sim_end_s);
    return os.str();
}

double energy_conservation_error(const SimConfig& config, const SimTrace& trace) {
    const std::size_t n = trace.initial_energy.size();
    std::vector<double> tx(n, 0.0), rx(n, 0.0), busy(n, 0.0);
    for (const auto& t : trace.transmissions) {
        // Recompute costs from sizes alone; this audit must not trust the
        // engine's own energy ledgers.
        TransmitCost c = transmit_cost(t.size, config);
        double dur = std::llround(c.duration_s * 1e6) * 1e-6;
        tx[idx(t.sender)] += config.tx_power * dur;
        rx[idx(t.receiver)] += config.rx_power * dur;
        busy[idx(t.sender)] += dur;
        busy[idx(t.receiver)] += dur;
    }
    double worst = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        double alive_until = trace.death_time[v] >= 0 ? to_seconds(trace.death_time[v])
                                                      : to_seconds(trace.end_time);
        double expected = tx[v] + rx[v] + config.idle_power * (alive_until - busy[v]);
        double actual = trace.initial_energy[v] - trace.final_energy[v];
        double rel = std::abs(expected - actual) / std::max(trace.initial_energy[v], 1e-12);
        worst = std::max(worst, rel);
    }
    return worst;
}

} // namespace lmt
