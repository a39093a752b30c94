#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmt/sim.hpp"

namespace lmt {

// ---- printed formulas, implemented literally -------------------------------
// The published forms of ATD, E_cons, AvgDly and AvgDR are dimensionally
// inconsistent; they are computed verbatim under *_formula/*_paper names and
// trusted for nothing. Headline reporting uses the trace-derived metrics.

double atd_formula(double H, double h1, double h2);           // (H^2+h1^2+h2^2)/(2H+h1)
double econs_formula(double e_cir, double e_amp, double k, double d);
double avg_dly_formula(double rs, double sp, double atd, double rec_snk, double rec_src);
double avg_dr_paper(long long sent_by_root, long long received_at_sinks);

// ---- trace-derived metrics -------------------------------------------------

double atd_empirical(const AggregationTree& tree); // mean source depth

// Average drained energy per node: everything the field consumed.
double ade_empirical(const SimTrace& trace, int n);
// Average delivery work per node: transmit + receive energy only, the work
// actually spent moving data (the idle floor is identical across schemes and
// would mask any aggregation effect).
double ade_delivery(const SimTrace& trace, int n);

// Reported delivery ratio: receptions per dispatched copy.
double avg_dr(long long sent_by_root, long long received_at_sinks, int sink_count);

// Sliding window of (time, residual) samples for one node.
class LifetimeEstimator {
public:
    explicit LifetimeEstimator(std::size_t window = 32) : window_(window) {}
    void add_sample(double t_s, double residual_j);
    std::size_t sample_count() const { return samples_.size(); }
    // Drain over the latest sample pair. Throws InsufficientDataError with
    // fewer than two samples or a degenerate time step.
    double latest_drain() const;
    // Mean of the per-pair drains across the window.
    double mean_drain() const;

private:
    std::size_t window_;
    std::vector<std::pair<double, double>> samples_;
};

// Predicted seconds until depletion; infinity marker when drain is zero.
double anlt_predicted(double residual_j, double mean_drain_j_per_s);

// Step curve of sources alive over time; right-continuous, non-increasing.
struct LifetimeCurve {
    std::vector<std::pair<double, int>> steps; // (time_s, sources_alive after)
    int initial = 0;

    // Earliest time the curve is at or below `level`; nullopt if never.
    std::optional<double> time_to_level(int level) const;
};

struct AnltResult {
    double mean_s = 0.0;                 // censored deaths count at sim end
    std::vector<double> death_times_s;   // per source, censored at end
    std::vector<bool> censored;
    LifetimeCurve curve;
};

AnltResult anlt_empirical(const SimTrace& trace, const Topology& topo);

// Percent lifetime extension of curve_a over curve_b at the given
// sources-remaining level.
double lifetime_extension(const LifetimeCurve& a, const LifetimeCurve& b, int level);
double lifetime_extension(double t_a, double t_b); // plain (t_a - t_b)/t_b * 100

// Mean and 1.96 * stderr half-width (normal approximation).
std::pair<double, double> ci95(const std::vector<double>& samples);

// ---- per-run report --------------------------------------------------------

struct MetricsReport {
    int n = 0;
    Scheme scheme = Scheme::espan;
    std::uint64_t seed = 0;
    bool aggregation = true;
    int source_count = 0;

    double asc_bytes = 0.0;         // bytes per source
    double atd_emp = 0.0;           // time-weighted mean source depth
    double atd_paper = 0.0;
    double ade_total_j = 0.0;       // drained energy per node
    double ade_delivery_j = 0.0;    // tx+rx energy per node
    double econs_paper = 0.0;
    double anlt_mean_s = 0.0;
    double anlt_predicted_s = 0.0;
    double avg_dly_rs_s = 0.0;      // root dispatch -> sink arrival
    double avg_dly_sp_s = 0.0;      // payload ready -> parent reception
    double avg_dly_s = 0.0;         // printed formula over empirical inputs
    double avg_dr_ratio = 0.0;
    double avg_dr_paper_ratio = 0.0;
    long long deliveries = 0;
    long long drops = 0;
    int deaths = 0;
    int rebuilds = 0;
    long long control_bytes = 0;
    double initial_tree_energy = 0.0;
    double sim_end_s = 0.0;
};

MetricsReport compute_metrics(const SimConfig& config, const Topology& topo,
                              const SimTrace& trace, Scheme scheme);

// metrics.csv row format (header + one line per run).
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& m);

// Conservation audit: recomputes every node's expected drain from the
// transmission list and the power model and compares against the recorded
// initial/final energies. Returns the worst relative error.
double energy_conservation_error(const SimConfig& config, const SimTrace& trace);

} // namespace lmt
