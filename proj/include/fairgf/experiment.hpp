#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairgf/data.hpp"

namespace fairgf {

enum class Method { None, Mult, Lfpro, Nsgff, NsgffNn, NsgffAppnp };

/// Parses a config/CSV method name. "lfprp" and "fp" are recognized and
/// rejected with an out-of-scope message; anything else unknown is an error.
Method method_from_name(const std::string& name);
std::string method_name(Method m);

struct SynthParams {
    std::size_t n_per_group = 100;
    double p_intra = 0.1;
    double p_inter = 0.01;
    std::uint64_t seed = 1;
};

struct DatasetConfig {
    std::string name;
    bool synthetic = false;
    SynthParams synth;
    std::string edges_path;
    std::string attributes_path;
};

struct TaskConfig {
    TaskInstance::Kind kind = TaskInstance::Kind::Diffusion;
    std::vector<double> fractions;
};

struct RunConfig {
    std::vector<DatasetConfig> datasets;
    std::vector<TaskConfig> tasks;
    std::vector<std::string> filters;
    std::vector<Method> methods;
    std::vector<std::uint64_t> seeds;
    double target_prule = 1.0;
    std::uint64_t config_seed = 0;
    std::string output = "results.csv";
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

inline constexpr const char* kResultsHeader =
    "graph,community,task,fraction,filter,method,seed,metric,value";

struct RunStats {
    std::size_t cells_total = 0;
    std::size_t cells_executed = 0;
    std::size_t cells_skipped = 0;  // already present in the results file
};

/// Executes the dataset x task x filter x method x seed matrix. Rows are
/// appended to config.output one cell at a time, always in canonical cell
/// order, so results are byte-identical for any worker count and an
/// interrupted run resumed over the same file converges to the same bytes.
/// Per-cell failures become rows with metric "error" and never abort the
/// matrix. Diagnostics go to "<output>.log".
RunStats run_experiments(const RunConfig& config, std::size_t workers = 1,
                         std::ostream* progress = nullptr);

struct ResultRow {
    std::string graph;
    std::string community;
    std::string task;
    double fraction = 0.0;
    std::string filter;
    std::string method;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

std::vector<ResultRow> read_results_csv(const std::string& path);

struct AggregateRow {
    std::string task;
    std::string filter;
    std::string method;
    std::string metric;
    double mean = 0.0;
};

/// Mean within each graph first, then an unweighted mean across graphs, per
/// (task, filter, method, metric). "error" rows are skipped.
std::vector<AggregateRow> aggregate_results(const std::vector<ResultRow>& rows);

/// Markdown tables (filters as rows, methods as column pairs), one per task
/// kind present; the best fairness-aware AUC / utility loss per row is
/// bolded.
std::string markdown_report(const std::vector<ResultRow>& rows);

}  // namespace fairgf
