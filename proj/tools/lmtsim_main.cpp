// lmtsim: lifetime-maximizing aggregation tree simulator.
//
// Subcommands:
//   run          one (nodes, scheme, seed) simulation, metrics row on stdout
//   sweep        grid of cells with aggregated CSVs and figure data files
//   compare      ratio/difference table between two summary.csv files
//   oracle-test  randomized check of the tree builders against brute force
//
// Exit codes: 0 ok, 1 check failed, 2 usage, 3 infeasible deployment,
// 4 sweep finished with failed cells.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lmt/experiment.hpp"
#include "lmt/instance_gen.hpp"
#include "lmt/tree.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    bool print_config = false;
    int nodes = 0;
    std::uint64_t seed = 0;
    bool have_seed = false;
    double duration = 0.0;
    bool no_aggregation = false;
    bool run_to_extinction = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "flat key = value config file");
    cmd->add_flag("--print-config", opts.print_config, "dump the effective config and exit");
    cmd->add_option("--seed", opts.seed, "master random seed")->each([&](const std::string&) {
        opts.have_seed = true;
    });
    cmd->add_option("--duration", opts.duration, "simulated seconds");
    cmd->add_flag("--no-aggregation", opts.no_aggregation,
                  "forward every report unfused (energy baseline)");
    cmd->add_flag("--run-to-extinction", opts.run_to_extinction,
                  "simulate until the last source dies");
}

lmt::SimConfig make_config(const CommonOpts& opts) {
    lmt::SimConfig cfg;
    if (!opts.config_path.empty()) cfg = lmt::load_config_file(opts.config_path, cfg);
    if (opts.nodes > 0) cfg.node_count = opts.nodes;
    if (opts.have_seed) cfg.seed = opts.seed;
    if (opts.duration > 0) cfg.sim_duration = opts.duration;
    if (opts.no_aggregation) cfg.aggregation = false;
    if (opts.run_to_extinction) cfg.run_to_extinction = true;
    return cfg;
}

int cmd_run(const CommonOpts& opts, const std::string& algo, const std::string& out_dir,
            const std::string& topology_in, const std::string& topology_out,
            const std::string& tree_out, bool oracle_check) {
    lmt::SimConfig cfg = make_config(opts);
    if (opts.print_config) {
        lmt::dump_config(std::cout, cfg);
        return 0;
    }
    lmt::Scheme scheme = lmt::scheme_from_string(algo);

    lmt::Topology topo;
    lmt::EnergyView energy;
    if (!topology_in.empty()) {
        lmt::load_topology(topology_in, topo, energy);
        cfg.node_count = topo.node_count();
    } else {
        try {
            topo = lmt::deploy(cfg);
        } catch (const lmt::DeploymentInfeasibleError& e) {
            std::cerr << "deployment infeasible: " << e.what() << "\n";
            return 3;
        }
        energy = lmt::assign_energy(topo, cfg, cfg.seed);
    }
    if (!topology_out.empty()) lmt::save_topology(topology_out, topo, energy);

    lmt::TreeBuildResult initial;
    switch (scheme) {
        case lmt::Scheme::espan: initial = lmt::build_espan(topo, energy, topo.sources); break;
        case lmt::Scheme::dlmt: initial = lmt::build_dlmt(topo, energy, topo.sources); break;
        case lmt::Scheme::clmt: initial = lmt::build_clmt(topo, energy, topo.sources); break;
    }
    if (!tree_out.empty()) lmt::save_tree(tree_out, initial.tree);

    if (oracle_check) {
        auto [oracle_tree, oracle_energy] =
            lmt::oracle_best_tree(topo, energy, topo.sources, cfg.oracle_source_limit);
        std::cout << "oracle-check: " << algo << " tree energy " << initial.tree_energy
                  << " vs oracle " << oracle_energy << "\n";
        if (scheme != lmt::Scheme::espan && initial.tree_energy != oracle_energy) {
            std::cerr << "oracle-check failed: tree energy mismatch\n";
            return 1;
        }
        if (initial.tree_energy > oracle_energy) {
            std::cerr << "oracle-check failed: tree energy exceeds the optimum\n";
            return 1;
        }
    }

    lmt::SimTrace trace = lmt::run(cfg, topo, energy, scheme);
    lmt::MetricsReport metrics = lmt::compute_metrics(cfg, topo, trace, scheme);
    std::cout << lmt::metrics_csv_header() << "\n" << lmt::metrics_csv_row(metrics) << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        auto write = [&](const std::string& name, auto writer) {
            std::ofstream os(fs::path(out_dir) / name);
            writer(os, trace);
        };
        write("transmissions.csv", [](std::ostream& os, const lmt::SimTrace& t) {
            lmt::write_transmissions_csv(os, t);
        });
        write("deaths.csv", [](std::ostream& os, const lmt::SimTrace& t) {
            lmt::write_deaths_csv(os, t);
        });
        write("energylog.csv", [](std::ostream& os, const lmt::SimTrace& t) {
            lmt::write_energylog_csv(os, t);
        });
        write("deliveries.csv", [](std::ostream& os, const lmt::SimTrace& t) {
            lmt::write_deliveries_csv(os, t);
        });
        {
            std::ofstream os(fs::path(out_dir) / "control.csv");
            lmt::write_control_csv(os, trace.control);
        }
        {
            std::ofstream os(fs::path(out_dir) / "metrics.csv");
            os << lmt::metrics_csv_header() << "\n" << lmt::metrics_csv_row(metrics) << "\n";
        }
    }
    return 0;
}

int cmd_sweep(const CommonOpts& opts, std::vector<int> nodes, std::vector<std::string> algos,
              int seeds, const std::string& out_dir, int jobs) {
    lmt::ExperimentPlan plan;
    plan.base = make_config(opts);
    if (opts.print_config) {
        lmt::dump_config(std::cout, plan.base);
        return 0;
    }
    if (!nodes.empty()) plan.node_counts = nodes;
    if (!algos.empty()) {
        plan.schemes.clear();
        for (const auto& a : algos) plan.schemes.push_back(lmt::scheme_from_string(a));
    }
    plan.seeds = seeds;
    plan.out_dir = out_dir;
    plan.jobs = jobs;

    lmt::SweepResult result = lmt::sweep(plan);
    std::cout << "sweep: " << result.cells.size() << " cells, " << result.failures
              << " failed; outputs in " << out_dir << "\n";
    for (const auto& c : result.cells)
        if (c.failed)
            std::cerr << "cell n=" << c.metrics.n << " scheme=" << to_string(c.metrics.scheme)
                      << " seed=" << c.metrics.seed << " failed: " << c.error << "\n";
    return result.failures > 0 ? 4 : 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out) {
    lmt::SummaryTable a = lmt::load_summary_csv(a_path);
    lmt::SummaryTable b = lmt::load_summary_csv(b_path);
    auto rows = lmt::compare_summaries(a, b);
    lmt::write_compare_csv(std::cout, rows);
    if (!out.empty()) {
        std::ofstream os(out);
        lmt::write_compare_csv(os, rows);
    }
    return 0;
}

int cmd_oracle_test(int instances, int max_sources, std::uint64_t seed) {
    lmt::Rng rng(seed);
    int clmt_mismatch = 0, dominance_break = 0;
    for (int i = 0; i < instances; ++i) {
        lmt::RandomInstance inst = lmt::random_small_instance(rng, max_sources);
        auto clmt = lmt::build_clmt(inst.topo, inst.energy, inst.topo.sources);
        auto dlmt = lmt::build_dlmt(inst.topo, inst.energy, inst.topo.sources);
        auto espan = lmt::build_espan(inst.topo, inst.energy, inst.topo.sources);
        auto [oracle_tree, oracle_energy] =
            lmt::oracle_best_tree(inst.topo, inst.energy, inst.topo.sources, max_sources);
        if (clmt.tree_energy != oracle_energy) ++clmt_mismatch;
        if (!(clmt.tree_energy >= dlmt.tree_energy && dlmt.tree_energy >= espan.tree_energy))
            ++dominance_break;
    }
    std::cout << "oracle-test: " << instances << " instances, " << clmt_mismatch
              << " clmt/oracle mismatches, " << dominance_break << " dominance violations\n";
    return (clmt_mismatch == 0 && dominance_break == 0) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lifetime-maximizing aggregation tree simulator"};
    app.require_subcommand(1);

    const std::vector<std::string> algo_names = {"espan", "dlmt", "clmt"};

    // run
    auto* run_cmd = app.add_subcommand("run", "simulate one network");
    CommonOpts run_opts;
    std::string algo = "dlmt", out_dir, topo_in, topo_out, tree_out;
    bool oracle_check = false;
    run_cmd->add_option("--nodes", run_opts.nodes, "number of nodes");
    run_cmd->add_option("--algo", algo, "tree scheme")->check(CLI::IsMember(algo_names));
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--out", out_dir, "directory for trace CSVs");
    run_cmd->add_option("--topology-in", topo_in, "load a topology file instead of deploying");
    run_cmd->add_option("--topology-out", topo_out, "write the deployed topology");
    run_cmd->add_option("--tree-out", tree_out, "write the initial aggregation tree");
    run_cmd->add_flag("--oracle-check", oracle_check,
                      "verify the tree energy against exhaustive search");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of simulations");
    CommonOpts sweep_opts;
    std::vector<int> sweep_nodes;
    std::vector<std::string> sweep_algos;
    int seeds = 15, jobs = 0;
    std::string sweep_out = "sweep_out";
    sweep_cmd->add_option("--nodes", sweep_nodes, "network sizes (default 50..300 step 50)");
    sweep_cmd->add_option("--algos", sweep_algos, "schemes to sweep")
        ->check(CLI::IsMember(algo_names));
    sweep_cmd->add_option("--seeds", seeds, "seeds per cell");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--out", sweep_out, "output directory");
    sweep_cmd->add_option("--jobs", jobs, "parallel workers (0 = all cores)");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "compare two summary.csv files");
    std::string cmp_a, cmp_b, cmp_out;
    cmp_cmd->add_option("summary_a", cmp_a, "first summary.csv")->required();
    cmp_cmd->add_option("summary_b", cmp_b, "second summary.csv")->required();
    cmp_cmd->add_option("--out", cmp_out, "write the table as CSV");

    // oracle-test
    auto* ot_cmd = app.add_subcommand("oracle-test", "randomized brute-force check");
    int instances = 500, max_sources = 8;
    std::uint64_t ot_seed = 1;
    ot_cmd->add_option("--instances", instances, "number of random instances");
    ot_cmd->add_option("--max-sources", max_sources, "largest source set (exhaustive limit)");
    ot_cmd->add_option("--seed", ot_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(run_opts, algo, out_dir, topo_in, topo_out, tree_out, oracle_check);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_opts, sweep_nodes, sweep_algos, seeds, sweep_out, jobs);
        if (cmp_cmd->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
        if (ot_cmd->parsed()) return cmd_oracle_test(instances, max_sources, ot_seed);
    } catch (const lmt::DeploymentInfeasibleError& e) {
        std::cerr << "deployment infeasible: " << e.what() << "\n";
        return 3;
    } catch (const lmt::InvalidConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
