#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fairgf/data.hpp"
#include "fairgf/experiment.hpp"
#include "fairgf/metrics.hpp"
#include "fairgf/nsgff.hpp"
#include "fairgf/rng.hpp"

namespace {

int do_run(const std::string& config_path, std::size_t workers) {
    fairgf::RunConfig config = fairgf::load_run_config(config_path);
    fairgf::RunStats stats = fairgf::run_experiments(config, workers, &std::cout);
    std::cout << "cells total=" << stats.cells_total << " executed=" << stats.cells_executed
              << " skipped=" << stats.cells_skipped << "\nresults: " << config.output << '\n';
    return 0;
}

int do_report(const std::string& results_path, const std::string& out_path) {
    auto rows = fairgf::read_results_csv(results_path);
    std::string report = fairgf::markdown_report(rows);
    if (out_path.empty()) {
        std::cout << report;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << '\n';
            return 1;
        }
        out << report;
        std::cout << "report: " << out_path << '\n';
    }
    return 0;
}

int do_synth(std::size_t n_per_group, double p_intra, double p_inter, std::uint64_t seed,
             const std::string& prefix) {
    fairgf::Dataset data = fairgf::synth_biased_graph(n_per_group, p_intra, p_inter, seed);
    fairgf::write_dataset(data, prefix + ".edges", prefix + ".attrs");
    std::cout << "nodes=" << data.graph.node_count << " edges=" << data.graph.edges.size()
              << " protected=" << fairgf::mask_count(data.sensitive) << "\nwrote " << prefix
              << ".edges and " << prefix << ".attrs\n";
    return 0;
}

int do_gradcheck() {
    using namespace fairgf;
    const double tolerance = 1e-4;
    double worst = 0.0;
    for (auto mode : {Normalization::Symmetric, Normalization::Column}) {
        Dataset data = synth_biased_graph(8, 0.3, 0.1, 11);
        NormalizedGraph sym = normalize(data.graph, Normalization::Symmetric);
        NormalizedGraph mode_graph =
            mode == Normalization::Symmetric ? sym : normalize(data.graph, mode);
        TaskInstance task = diffusion_task(data, 0.7, 5);
        NsgffProblem problem =
            make_nsgff_problem(mode_graph, sym, ppr_coefficients(0.85), task.q0, data.sensitive, 1.0);
        for (std::size_t depth : {std::size_t{3}, std::size_t{6}}) {
            NsgffTask surrogate = instantiate_task(problem, 1.0, NsgffVariant::Standard);
            Rng rng(mix_seed(mix_seed(42, "gradcheck"), depth));
            NsgffModel model = init_folded_normal(surrogate.features.width(), depth, rng);
            GradientCheck check = gradient_check(model, surrogate);
            worst = std::max(worst, check.max_rel_error);
            std::printf("mode=%s depth=%zu params=%zu max_rel_error=%.3g\n",
                        mode == Normalization::Symmetric ? "sym" : "col", depth, check.parameters,
                        check.max_rel_error);
        }
    }
    std::printf("%s (tolerance %.1g)\n", worst < tolerance ? "PASS" : "FAIL", tolerance);
    return worst < tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness-aware graph filtering toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t workers = 1;
    auto* run = app.add_subcommand("run", "execute an experiment matrix from a JSON config");
    run->add_option("config", config_path, "config JSON path")->required();
    run->add_option("--workers", workers, "parallel cell workers (results are worker-count independent)");

    std::string results_path, report_out;
    auto* report = app.add_subcommand("report", "aggregate a results CSV into Markdown tables");
    report->add_option("results", results_path, "results CSV path")->required();
    report->add_option("--out", report_out, "write the report here instead of stdout");

    std::size_t n_per_group = 100;
    double p_intra = 0.1, p_inter = 0.01;
    std::uint64_t synth_seed = 1;
    std::string prefix = "synth";
    auto* synth = app.add_subcommand("synth", "generate a synthetic biased dataset");
    synth->add_option("--n-per-group", n_per_group, "nodes per group");
    synth->add_option("--p-intra", p_intra, "intra-group edge probability");
    synth->add_option("--p-inter", p_inter, "inter-group edge probability");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out-prefix", prefix, "output file prefix");

    auto* gradcheck = app.add_subcommand("gradcheck", "verify surrogate gradients against finite differences");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(config_path, workers);
        if (report->parsed()) return do_report(results_path, report_out);
        if (synth->parsed()) return do_synth(n_per_group, p_intra, p_inter, synth_seed, prefix);
        if (gradcheck->parsed()) return do_gradcheck();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
