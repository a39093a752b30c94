#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lmt/metrics.hpp"

namespace lmt {

// A sweep over network sizes x schemes x seeds. Cells are independent jobs;
// aggregation happens after a deterministic sort, so the output never depends
// on completion order.
struct ExperimentPlan {
    std::vector<int> node_counts = {50, 100, 150, 200, 250, 300};
    std::vector<Scheme> schemes = {Scheme::espan, Scheme::dlmt, Scheme::clmt};
    int seeds = 15;
    SimConfig base;
    std::string out_dir;
    int jobs = 0; // 0 = hardware concurrency

    void validate() const;
    int cell_count() const;
};

struct CellResult {
    MetricsReport metrics;
    LifetimeCurve curve;
    bool failed = false;
    std::string error;
};

// Runs one cell (deploy + simulate + metrics).
CellResult run_cell(const SimConfig& cfg, Scheme scheme);

struct SweepResult {
    std::vector<CellResult> cells; // sorted by (n, scheme, seed)
    int failures = 0;
};

// Executes the plan. When out_dir is set, completed cells persist as
// marker files and are skipped on re-run; final CSVs are rewritten from all
// cells either way, so resuming yields identical outputs.
SweepResult sweep(const ExperimentPlan& plan);

// Writers for the aggregate outputs.
void write_metrics_csv(std::ostream& os, const SweepResult& result);
void write_summary_csv(std::ostream& os, const SweepResult& result);
void write_lifetime_curve_csv(std::ostream& os, const SweepResult& result);
void write_figure_csvs(const std::string& out_dir, const SweepResult& result);

// summary.csv content as a key -> (metric -> (mean, ci95)) table.
struct SummaryTable {
    // (n, scheme) -> metric name -> (mean, ci95 halfwidth)
    std::map<std::pair<int, std::string>, std::map<std::string, std::pair<double, double>>> rows;
};

SummaryTable summarize(const SweepResult& result);
SummaryTable load_summary_csv(const std::string& path);

// Ratio/difference table between two summaries with matching keys; also
// derives per-file scheme-vs-espan ratios and the aggregation savings column.
struct CompareRow {
    int n = 0;
    std::string scheme;
    std::string metric;
    double value_a = 0.0;
    double value_b = 0.0;
    double ratio = 0.0;      // a / b
    double diff = 0.0;       // a - b
    double vs_espan_a = 0.0; // value_a / value_a(espan at same n), 0 if absent
    double savings = 0.0;    // 1 - a/b
};

std::vector<CompareRow> compare_summaries(const SummaryTable& a, const SummaryTable& b);
void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows);

} // namespace lmt
