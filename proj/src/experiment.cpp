#include "lmt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "lmt/errors.hpp"

namespace fs = std::filesystem;

namespace lmt {

void ExperimentPlan::validate() const {
    if (seeds < 1) throw InvalidConfigError("sweep: seeds must be >= 1");
    if (node_counts.empty()) throw InvalidConfigError("sweep: node_counts must be non-empty");
    if (schemes.empty()) throw InvalidConfigError("sweep: schemes must be non-empty");
}

int ExperimentPlan::cell_count() const {
    return static_cast<int>(node_counts.size() * schemes.size()) * seeds;
}

CellResult run_cell(const SimConfig& cfg, Scheme scheme) {
    CellResult cell;
    cell.metrics.n = cfg.node_count;
    cell.metrics.scheme = scheme;
    cell.metrics.seed = cfg.seed;
    cell.metrics.aggregation = cfg.aggregation;
    try {
        Topology topo = deploy(cfg);
        EnergyView energy = assign_energy(topo, cfg, cfg.seed);
        SimTrace trace = run(cfg, topo, energy, scheme);
        cell.metrics = compute_metrics(cfg, topo, trace, scheme);
        cell.curve = anlt_empirical(trace, topo).curve;
    } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
    }
    return cell;
}

namespace {

std::string cell_name(int n, Scheme scheme, std::uint64_t seed, bool aggregation) {
    std::ostringstream os;
    os << "n" << n << "_" << to_string(scheme) << "_s" << seed;
    if (!aggregation) os << "_noagg";
    return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

MetricsReport parse_metrics_row(const std::string& line) {
    auto f = split(line, ',');
    if (f.size() != 25) throw IoError("bad metrics row: " + line);
    MetricsReport m;
    std::size_t i = 0;
    m.n = std::stoi(f[i++]);
    m.scheme = scheme_from_string(f[i++]);
    m.seed = static_cast<std::uint64_t>(std::stoull(f[i++]));
    m.aggregation = f[i++] == "1";
    m.source_count = std::stoi(f[i++]);
    m.asc_bytes = std::stod(f[i++]);
    m.atd_emp = std::stod(f[i++]);
    m.atd_paper = std::stod(f[i++]);
    m.ade_total_j = std::stod(f[i++]);
    m.ade_delivery_j = std::stod(f[i++]);
    m.econs_paper = std::stod(f[i++]);
    m.anlt_mean_s = std::stod(f[i++]);
    m.anlt_predicted_s = std::stod(f[i++]);
    m.avg_dly_rs_s = std::stod(f[i++]);
    m.avg_dly_sp_s = std::stod(f[i++]);
    m.avg_dly_s = std::stod(f[i++]);
    m.avg_dr_ratio = std::stod(f[i++]);
    m.avg_dr_paper_ratio = std::stod(f[i++]);
    m.deliveries = std::stoll(f[i++]);
    m.drops = std::stoll(f[i++]);
    m.deaths = std::stoi(f[i++]);
    m.rebuilds = std::stoi(f[i++]);
    m.control_bytes = std::stoll(f[i++]);
    m.initial_tree_energy = std::stod(f[i++]);
    m.sim_end_s = std::stod(f[i++]);
    return m;
}

bool load_cell_file(const fs::path& path, CellResult& cell) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false; // header
    if (!std::getline(in, line)) return false;
    try {
        cell.metrics = parse_metrics_row(line);
    } catch (const std::exception&) {
        return false;
    }
    if (!std::getline(in, line)) return false;
    auto head = split(line, ' ');
    if (head.size() != 2 || head[0] != "curve") return false;
    cell.curve.initial = std::stoi(head[1]);
    cell.curve.steps.clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split(line, ' ');
        if (f.size() != 3 || f[0] != "step") return false;
        cell.curve.steps.emplace_back(std::stod(f[1]), std::stoi(f[2]));
    }
    cell.failed = false;
    return true;
}

void store_cell_file(const fs::path& path, const CellResult& cell) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write cell file: " + tmp.string());
        out << metrics_csv_header() << "\n" << metrics_csv_row(cell.metrics) << "\n";
        out << "curve " << cell.curve.initial << "\n";
        out.precision(17);
        for (const auto& [t, alive] : cell.curve.steps)
            out << "step " << t << " " << alive << "\n";
    }
    fs::rename(tmp, path); // completion marker: the file only appears whole
}

int scheme_rank(Scheme s) { return static_cast<int>(s); }

} // namespace

SweepResult sweep(const ExperimentPlan& plan) {
    plan.validate();
    fs::path cell_dir;
    if (!plan.out_dir.empty()) {
        cell_dir = fs::path(plan.out_dir) / "cells";
        fs::create_directories(cell_dir);
    }

    struct Job {
        int n;
        Scheme scheme;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int n : plan.node_counts)
        for (Scheme s : plan.schemes)
            for (int i = 0; i < plan.seeds; ++i)
                jobs.push_back({n, s, plan.base.seed + static_cast<std::uint64_t>(i)});

    SweepResult result;
    result.cells.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    int workers = plan.jobs > 0 ? plan.jobs
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(jobs.size()));

    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            SimConfig cfg = plan.base;
            cfg.node_count = job.n;
            cfg.seed = job.seed;
            CellResult cell;
            fs::path marker;
            if (!cell_dir.empty()) {
                marker = cell_dir / (cell_name(job.n, job.scheme, job.seed, cfg.aggregation) + ".csv");
                if (load_cell_file(marker, cell)) {
                    result.cells[i] = std::move(cell);
                    continue;
                }
            }
            cell = run_cell(cfg, job.scheme);
            if (!cell.failed && !marker.empty()) store_cell_file(marker, cell);
            result.cells[i] = std::move(cell);
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::stable_sort(result.cells.begin(), result.cells.end(),
                     [](const CellResult& a, const CellResult& b) {
                         if (a.metrics.n != b.metrics.n) return a.metrics.n < b.metrics.n;
                         if (a.metrics.scheme != b.metrics.scheme)
                             return scheme_rank(a.metrics.scheme) < scheme_rank(b.metrics.scheme);
                         return a.metrics.seed < b.metrics.seed;
                     });
    for (const auto& c : result.cells)
        if (c.failed) ++result.failures;

    if (!plan.out_dir.empty()) write_figure_csvs(plan.out_dir, result);
    return result;
}

void write_metrics_csv(std::ostream& os, const SweepResult& result) {
    os << metrics_csv_header() << "\n";
    for (const auto& c : result.cells)
        if (!c.failed) os << metrics_csv_row(c.metrics) << "\n";
}

namespace {

using MetricGetter = double (*)(const MetricsReport&);

const std::vector<std::pair<std::string, MetricGetter>>& metric_columns() {
    static const std::vector<std::pair<std::string, MetricGetter>> cols = {
        {"asc_bytes", [](const MetricsReport& m) { return m.asc_bytes; }},
        {"atd", [](const MetricsReport& m) { return m.atd_emp; }},
        {"atd_paper", [](const MetricsReport& m) { return m.atd_paper; }},
        {"ade_total_j", [](const MetricsReport& m) { return m.ade_total_j; }},
        {"ade_delivery_j", [](const MetricsReport& m) { return m.ade_delivery_j; }},
        {"econs_paper", [](const MetricsReport& m) { return m.econs_paper; }},
        {"anlt_mean_s", [](const MetricsReport& m) { return m.anlt_mean_s; }},
        {"anlt_predicted_s", [](const MetricsReport& m) { return m.anlt_predicted_s; }},
        {"avg_dly_rs_s", [](const MetricsReport& m) { return m.avg_dly_rs_s; }},
        {"avg_dly_sp_s", [](const MetricsReport& m) { return m.avg_dly_sp_s; }},
        {"avg_dly_s", [](const MetricsReport& m) { return m.avg_dly_s; }},
        {"avg_dr", [](const MetricsReport& m) { return m.avg_dr_ratio; }},
        {"avg_dr_paper", [](const MetricsReport& m) { return m.avg_dr_paper_ratio; }},
        {"deliveries", [](const MetricsReport& m) { return static_cast<double>(m.deliveries); }},
        {"drops", [](const MetricsReport& m) { return static_cast<double>(m.drops); }},
        {"deaths", [](const MetricsReport& m) { return static_cast<double>(m.deaths); }},
        {"rebuilds", [](const MetricsReport& m) { return static_cast<double>(m.rebuilds); }},
        {"control_bytes", [](const MetricsReport& m) { return static_cast<double>(m.control_bytes); }},
        {"tree_energy_j", [](const MetricsReport& m) { return m.initial_tree_energy; }},
        {"sim_end_s", [](const MetricsReport& m) { return m.sim_end_s; }},
    };
    return cols;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::pair<double, double> mean_ci(const std::vector<double>& samples) {
    if (samples.empty()) return {0.0, 0.0};
    if (samples.size() == 1) return {samples.front(), 0.0};
    return ci95(samples);
}

} // namespace

SummaryTable summarize(const SweepResult& result) {
    std::map<std::pair<int, std::string>, std::vector<const MetricsReport*>> groups;
    for (const auto& c : result.cells)
        if (!c.failed)
            groups[{c.metrics.n, to_string(c.metrics.scheme)}].push_back(&c.metrics);

    SummaryTable table;
    for (const auto& [key, rows] : groups) {
        for (const auto& [name, getter] : metric_columns()) {
            std::vector<double> samples;
            samples.reserve(rows.size());
            for (const MetricsReport* m : rows) samples.push_back(getter(*m));
            table.rows[key][name] = mean_ci(samples);
        }
    }
    return table;
}

void write_summary_csv(std::ostream& os, const SweepResult& result) {
    SummaryTable table = summarize(result);
    os << "n,scheme,metric,mean,ci95\n";
    for (const auto& [key, metrics] : table.rows)
        for (const auto& [name, mc] : metrics)
            os << key.first << "," << key.second << "," << name << "," << fmt(mc.first) << ","
               << fmt(mc.second) << "\n";
}

SummaryTable load_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open summary file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "n,scheme,metric,mean,ci95")
        throw IoError("bad summary header in " + path);
    SummaryTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 5) throw IoError("bad summary row in " + path + ": " + line);
        table.rows[{std::stoi(f[0]), f[1]}][f[2]] = {std::stod(f[3]), std::stod(f[4])};
    }
    return table;
}

void write_lifetime_curve_csv(std::ostream& os, const SweepResult& result) {
    os << "scheme,n,seed,t_ms,sources_alive\n";
    for (const auto& c : result.cells) {
        if (c.failed) continue;
        os << to_string(c.metrics.scheme) << "," << c.metrics.n << "," << c.metrics.seed << ",0,"
           << c.curve.initial << "\n";
        for (const auto& [t, alive] : c.curve.steps)
            os << to_string(c.metrics.scheme) << "," << c.metrics.n << "," << c.metrics.seed << ","
               << static_cast<long long>(t * 1000.0 + 0.5) << "," << alive << "\n";
    }
}

void write_figure_csvs(const std::string& out_dir, const SweepResult& result) {
    fs::create_directories(out_dir);
    SummaryTable table = summarize(result);

    auto figure = [&](const std::string& file, const std::vector<std::string>& metrics) {
        std::ofstream os(fs::path(out_dir) / file);
        os << "n,scheme";
        for (const auto& m : metrics) os << "," << m << "_mean," << m << "_ci95";
        os << "\n";
        for (const auto& [key, row] : table.rows) {
            os << key.first << "," << key.second;
            for (const auto& m : metrics) {
                auto it = row.find(m);
                double mean = it != row.end() ? it->second.first : 0.0;
                double ci = it != row.end() ? it->second.second : 0.0;
                os << "," << fmt(mean) << "," << fmt(ci);
            }
            os << "\n";
        }
    };

    figure("fig1_asc.csv", {"asc_bytes"});
    figure("fig2_atd.csv", {"atd"});
    figure("fig3_ade.csv", {"ade_delivery_j", "ade_total_j"});
    figure("fig5-7_delay.csv", {"avg_dly_rs_s", "avg_dly_sp_s", "avg_dly_s"});
    figure("fig8_dr.csv", {"avg_dr"});

    // fig4: per (n, scheme, sources-remaining level) the mean earliest time
    // the level is reached, so any extension headline can be recomputed.
    {
        std::ofstream os(fs::path(out_dir) / "fig4_lifetime.csv");
        os << "n,scheme,sources_remaining,mean_t_s,ci95_s,seeds_reaching\n";
        std::map<std::pair<int, std::string>, std::vector<const CellResult*>> groups;
        for (const auto& c : result.cells)
            if (!c.failed) groups[{c.metrics.n, to_string(c.metrics.scheme)}].push_back(&c);
        for (const auto& [key, cells] : groups) {
            int max_initial = 0;
            for (const CellResult* c : cells) max_initial = std::max(max_initial, c->curve.initial);
            for (int level = max_initial - 1; level >= 0; --level) {
                std::vector<double> times;
                for (const CellResult* c : cells)
                    if (auto t = c->curve.time_to_level(level)) times.push_back(*t);
                if (times.empty()) continue;
                auto [mean, ci] = mean_ci(times);
                os << key.first << "," << key.second << "," << level << "," << fmt(mean) << ","
                   << fmt(ci) << "," << times.size() << "\n";
            }
        }
    }

    {
        std::ofstream os(fs::path(out_dir) / "metrics.csv");
        write_metrics_csv(os, result);
    }
    {
        std::ofstream os(fs::path(out_dir) / "summary.csv");
        write_summary_csv(os, result);
    }
    {
        std::ofstream os(fs::path(out_dir) / "lifetime_curve.csv");
        write_lifetime_curve_csv(os, result);
    }
}

std::vector<CompareRow> compare_summaries(const SummaryTable& a, const SummaryTable& b) {
    std::set<std::pair<int, std::string>> only_a, only_b;
    for (const auto& [key, _] : a.rows)
        if (!b.rows.count(key)) only_a.insert(key);
    for (const auto& [key, _] : b.rows)
        if (!a.rows.count(key)) only_b.insert(key);
    if (!only_a.empty() || !only_b.empty()) {
        std::ostringstream os;
        os << "compare: key mismatch;";
        for (const auto& [n, s] : only_a) os << " only-in-a (" << n << "," << s << ")";
        for (const auto& [n, s] : only_b) os << " only-in-b (" << n << "," << s << ")";
        throw Error(os.str());
    }

    std::vector<CompareRow> rows;
    for (const auto& [key, metrics] : a.rows) {
        auto espan_it = a.rows.find({key.first, "espan"});
        for (const auto& [name, mc] : metrics) {
            CompareRow row;
            row.n = key.first;
            row.scheme = key.second;
            row.metric = name;
            row.value_a = mc.first;
            auto bit = b.rows.at(key).find(name);
            row.value_b = bit != b.rows.at(key).end() ? bit->second.first : 0.0;
            row.ratio = row.value_b != 0.0 ? row.value_a / row.value_b : 0.0;
            row.diff = row.value_a - row.value_b;
            row.savings = row.value_b != 0.0 ? 1.0 - row.value_a / row.value_b : 0.0;
            if (espan_it != a.rows.end()) {
                auto eit = espan_it->second.find(name);
                if (eit != espan_it->second.end() && eit->second.first != 0.0)
                    row.vs_espan_a = row.value_a / eit->second.first;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
    os << "n,scheme,metric,value_a,value_b,ratio,diff,vs_espan_a,savings\n";
    for (const auto& r : rows)
        os << r.n << "," << r.scheme << "," << r.metric << "," << fmt(r.value_a) << ","
           << fmt(r.value_b) << "," << fmt(r.ratio) << "," << fmt(r.diff) << ","
           << fmt(r.vs_espan_a) << "," << fmt(r.savings) << "\n";
}

} // namespace lmt
