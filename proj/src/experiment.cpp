#include "fairgf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fairgf/bounds.hpp"
#include "fairgf/filter.hpp"
#include "fairgf/metrics.hpp"
#include "fairgf/mitigation.hpp"
#include "fairgf/nsgff.hpp"
#include "fairgf/rng.hpp"

#include "json.hpp"

namespace fairgf {

Method method_from_name(const std::string& name) {
    if (name == "none") return Method::None;
    if (name == "mult") return Method::Mult;
    if (name == "lfpro") return Method::Lfpro;
    if (name == "nsgff") return Method::Nsgff;
    if (name == "nsgff-nn") return Method::NsgffNn;
    if (name == "nsgff-appnp") return Method::NsgffAppnp;
    if (name == "lfprp" || name == "fp") {
        throw std::invalid_argument("method '" + name +
                                    "' is out of scope: its defining algorithm lives in cited prior "
                                    "work and is not reconstructed here");
    }
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::None: return "none";
        case Method::Mult: return "mult";
        case Method::Lfpro: return "lfpro";
        case Method::Nsgff: return "nsgff";
        case Method::NsgffNn: return "nsgff-nn";
        case Method::NsgffAppnp: return "nsgff-appnp";
    }
    return "?";
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

std::string task_kind_name(TaskInstance::Kind kind) {
    return kind == TaskInstance::Kind::Community ? "community" : "diffusion";
}

struct Cell {
    std::size_t dataset = 0;
    TaskInstance::Kind kind = TaskInstance::Kind::Diffusion;
    double fraction = 0.0;
    std::string community;  // "-" for diffusion
    std::string filter;
    Method method = Method::None;
    std::uint64_t seed = 0;
};

std::string cell_key(const std::string& graph, const Cell& c) {
    std::ostringstream key;
    key << graph << ',' << c.community << ',' << task_kind_name(c.kind) << ','
        << format_double(c.fraction) << ',' << c.filter << ',' << method_name(c.method) << ','
        << c.seed;
    return key.str();
}

/// Everything shared between workers; read-only during the run.
struct RunEnv {
    const RunConfig* config = nullptr;
    std::vector<Dataset> datasets;
    // per dataset: normalized graphs by mode, plus smallest-component size
    std::vector<std::map<Normalization, NormalizedGraph>> normalized;
    std::vector<std::size_t> smallest_component;
};

RunEnv prepare_env(const RunConfig& config) {
    RunEnv env;
    env.config = &config;
    for (const auto& dc : config.datasets) {
        Dataset data = dc.synthetic
                           ? synth_biased_graph(dc.synth.n_per_group, dc.synth.p_intra,
                                                dc.synth.p_inter, dc.synth.seed)
                           : load_dataset(dc.edges_path, dc.attributes_path, dc.name);
        data.name = dc.name;
        env.smallest_component.push_back(connected_components(data.graph).smallest());
        env.datasets.push_back(std::move(data));
        env.normalized.emplace_back();
    }
    // Pre-normalize every mode any configured filter needs (plus the
    // symmetric twin the surrogate's transfer depends on).
    std::set<Normalization> modes{Normalization::Symmetric};
    for (const auto& name : config.filters) modes.insert(parse_filter_name(name).mode);
    for (std::size_t d = 0; d < env.datasets.size(); ++d) {
        for (auto mode : modes) {
            env.normalized[d].emplace(mode, normalize(env.datasets[d].graph, mode));
        }
    }
    return env;
}

std::vector<Cell> enumerate_cells(const RunConfig& config, const RunEnv& env) {
    std::vector<Cell> cells;
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        for (const auto& tc : config.tasks) {
            std::vector<std::string> communities{"-"};
            if (tc.kind == TaskInstance::Kind::Community) {
                communities.clear();
                for (const auto& [name, members] : env.datasets[d].communities) {
                    communities.push_back(name);
                }
                if (communities.empty()) continue;  // dataset carries no communities
            }
            for (double fraction : tc.fractions) {
                for (const auto& community : communities) {
                    for (const auto& filter : config.filters) {
                        for (Method method : config.methods) {
                            for (std::uint64_t seed : config.seeds) {
                                Cell c;
                                c.dataset = d;
                                c.kind = tc.kind;
                                c.fraction = fraction;
                                c.community = community;
                                c.filter = filter;
                                c.method = method;
                                c.seed = seed;
                                cells.push_back(std::move(c));
                            }
                        }
                    }
                }
            }
        }
    }
    return cells;
}

struct CellOutput {
    std::string rows;  // CSV lines, newline-terminated
    std::string log;   // diagnostics, newline-terminated
};

CellOutput run_cell(const RunEnv& env, const Cell& cell) {
    const RunConfig& config = *env.config;
    const Dataset& data = env.datasets[cell.dataset];
    const std::string key = cell_key(data.name, cell);

    CellOutput out;
    auto emit = [&out, &data, &cell](const std::string& metric, double value) {
        out.rows += data.name + ',' + cell.community + ',' + task_kind_name(cell.kind) + ',' +
                    format_double(cell.fraction) + ',' + cell.filter + ',' +
                    method_name(cell.method) + ',' + std::to_string(cell.seed) + ',' + metric +
                    ',' + format_double(value) + '\n';
    };

    try {
        NamedFilter named = parse_filter_name(cell.filter);
        const NormalizedGraph& mode_graph = env.normalized[cell.dataset].at(named.mode);
        const NormalizedGraph& sym_graph = env.normalized[cell.dataset].at(Normalization::Symmetric);

        const std::uint64_t task_seed =
            mix_seed(mix_seed(mix_seed(config.config_seed, "task"), data.name), cell.seed);
        TaskInstance task = cell.kind == TaskInstance::Kind::Community
                                ? community_task(data, cell.community, cell.fraction, task_seed)
                                : diffusion_task(data, cell.fraction, task_seed);

        FilterOutput base = apply_filter(named.spec, mode_graph, task.q0, PostProcessing::L1);
        if (base.zero_mass) {
            throw std::runtime_error("base filtering produced an all-zero posterior");
        }
        const GraphSignal& r_none = base.scores;
        const double prule_none = prule(r_none, data.sensitive);

        GraphSignal posterior;
        double report_delta0 = 0.0;
        std::string method_meta;
        switch (cell.method) {
            case Method::None:
                posterior = r_none;
                break;
            case Method::Mult: {
                FairnessTarget target =
                    resolve_fairness_target(r_none, data.sensitive, config.target_prule);
                posterior = mult_transform(r_none, data.sensitive, target.phi, MassScale::L1);
                if (target.swapped) method_meta = " mult_swapped=1";
                break;
            }
            case Method::Lfpro: {
                LfproResult res = lfpro(r_none, data.sensitive, config.target_prule);
                posterior = std::move(res.scores);
                // reconstruction of the published sketch, not the original code
                method_meta = " lfpro_reconstruction=1 lfpro_iters=" + std::to_string(res.iterations) +
                              " lfpro_converged=" + (res.converged ? "1" : "0");
                break;
            }
            case Method::Nsgff:
            case Method::NsgffNn:
            case Method::NsgffAppnp: {
                NsgffVariant variant = cell.method == Method::Nsgff ? NsgffVariant::Standard
                                       : cell.method == Method::NsgffNn
                                           ? NsgffVariant::NoPropagation
                                           : NsgffVariant::Appnp;
                NsgffProblem problem = make_nsgff_problem(mode_graph, sym_graph, named.spec,
                                                          task.q0, data.sensitive,
                                                          config.target_prule);
                const std::uint64_t train_seed = mix_seed(
                    mix_seed(mix_seed(task_seed, "nsgff"), cell.filter), method_name(cell.method));
                NsgffOutcome outcome = run_nsgff(problem, variant, train_seed);
                posterior = std::move(outcome.posterior);
                report_delta0 = outcome.delta0;
                method_meta = " nsgff_depth=" + std::to_string(outcome.depth) +
                              " nsgff_delta0=" + format_double(outcome.delta0) +
                              " nsgff_epochs=" + std::to_string(outcome.epochs) +
                              " nsgff_loss=" + format_double(outcome.final_loss);
                break;
            }
        }

        emit("prule", prule(posterior, data.sensitive));
        if (cell.kind == TaskInstance::Kind::Community) {
            emit("auc", auc(posterior, task.eval_positives, task.eval_mask));
        } else {
            emit("util_loss", utility_loss(posterior, r_none).value);
        }

        HorizonReport horizon =
            horizon_report(named.spec, env.smallest_component[cell.dataset], 1.0, report_delta0,
                           prule_none, config.target_prule);
        out.log += key + " " + horizon.summary() + method_meta + '\n';
    } catch (const std::exception& e) {
        emit("error", 1.0);
        out.log += key + " error=\"" + e.what() + "\"\n";
    }
    return out;
}

std::set<std::string> existing_cell_keys(const std::string& path, bool* has_content) {
    std::set<std::string> keys;
    *has_content = false;
    std::ifstream in(path);
    if (!in) return keys;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        *has_content = true;
        if (first) {
            first = false;
            if (line == kResultsHeader) continue;
        }
        if (line.empty()) continue;
        // strip the last two fields (metric, value) to recover the cell key
        auto pos = line.rfind(',');
        if (pos == std::string::npos) continue;
        pos = line.rfind(',', pos - 1);
        if (pos == std::string::npos) continue;
        keys.insert(line.substr(0, pos));
    }
    return keys;
}

}  // namespace

RunStats run_experiments(const RunConfig& config, std::size_t workers, std::ostream* progress) {
    if (config.datasets.empty() || config.tasks.empty() || config.filters.empty() ||
        config.methods.empty() || config.seeds.empty()) {
        throw std::invalid_argument("run config must name datasets, tasks, filters, methods and seeds");
    }
    for (const auto& name : config.filters) parse_filter_name(name);  // fail fast

    RunEnv env = prepare_env(config);
    std::vector<Cell> cells = enumerate_cells(config, env);

    RunStats stats;
    stats.cells_total = cells.size();

    bool file_has_content = false;
    std::set<std::string> done = existing_cell_keys(config.output, &file_has_content);
    const bool fresh = !file_has_content;

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (done.count(cell_key(env.datasets[cells[i].dataset].name, cells[i]))) {
            ++stats.cells_skipped;
        } else {
            pending.push_back(i);
        }
    }

    std::ofstream csv(config.output, std::ios::app);
    if (!csv) throw std::runtime_error("cannot open results file: " + config.output);
    if (fresh) {
        csv << kResultsHeader << '\n';
        csv.flush();
    }
    std::ofstream log(config.output + ".log", std::ios::app);

    if (workers == 0) workers = 1;
    workers = std::min(workers, std::max<std::size_t>(1, pending.size()));

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::size_t, CellOutput> finished;

    auto work = [&]() {
        while (true) {
            std::size_t job = next.fetch_add(1);
            if (job >= pending.size()) break;
            CellOutput result = run_cell(env, cells[pending[job]]);
            {
                std::lock_guard<std::mutex> lock(mu);
                finished.emplace(job, std::move(result));
            }
            cv.notify_one();
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);

    // Blocks are flushed strictly in cell order: output bytes depend only on
    // the pending list, never on worker scheduling.
    for (std::size_t cursor = 0; cursor < pending.size(); ++cursor) {
        CellOutput block;
        {
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return finished.count(cursor) != 0; });
            block = std::move(finished.at(cursor));
            finished.erase(cursor);
        }
        csv << block.rows;
        csv.flush();
        log << block.log;
        log.flush();
        ++stats.cells_executed;
        if (progress) {
            *progress << "[" << (cursor + 1) << "/" << pending.size() << "] "
                      << cell_key(env.datasets[cells[pending[cursor]].dataset].name,
                                  cells[pending[cursor]])
                      << '\n';
        }
    }
    for (auto& t : pool) t.join();
    return stats;
}

RunConfig parse_run_config(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    RunConfig config;
    for (const auto& d : doc.at("datasets")) {
        DatasetConfig dc;
        dc.name = d.at("name").get<std::string>();
        if (d.contains("synth")) {
            dc.synthetic = true;
            const auto& s = d.at("synth");
            dc.synth.n_per_group = s.value("n_per_group", dc.synth.n_per_group);
            dc.synth.p_intra = s.value("p_intra", dc.synth.p_intra);
            dc.synth.p_inter = s.value("p_inter", dc.synth.p_inter);
            dc.synth.seed = s.value("seed", dc.synth.seed);
        } else {
            dc.edges_path = d.at("edges").get<std::string>();
            dc.attributes_path = d.at("attributes").get<std::string>();
        }
        config.datasets.push_back(std::move(dc));
    }
    for (const auto& t : doc.at("tasks")) {
        TaskConfig tc;
        const std::string kind = t.at("kind").get<std::string>();
        if (kind == "community") tc.kind = TaskInstance::Kind::Community;
        else if (kind == "diffusion") tc.kind = TaskInstance::Kind::Diffusion;
        else throw std::invalid_argument("unknown task kind: " + kind);
        for (const auto& f : t.at("fractions")) tc.fractions.push_back(f.get<double>());
        config.tasks.push_back(std::move(tc));
    }
    for (const auto& f : doc.at("filters")) {
        const std::string name = f.get<std::string>();
        parse_filter_name(name);  // every filter name must parse
        config.filters.push_back(name);
    }
    for (const auto& m : doc.at("methods")) {
        config.methods.push_back(method_from_name(m.get<std::string>()));
    }
    for (const auto& s : doc.at("seeds")) config.seeds.push_back(s.get<std::uint64_t>());
    config.target_prule = doc.value("target_prule", 1.0);
    config.config_seed = doc.value("seed", static_cast<std::uint64_t>(0));
    config.output = doc.value("output", std::string("results.csv"));
    if (!(config.target_prule > 0.0 && config.target_prule <= 1.0)) {
        throw std::invalid_argument("target_prule must lie in (0, 1]");
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line == kResultsHeader) continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 9) {
            throw std::runtime_error("malformed results row: " + line);
        }
        ResultRow row;
        row.graph = fields[0];
        row.community = fields[1];
        row.task = fields[2];
        row.fraction = std::stod(fields[3]);
        row.filter = fields[4];
        row.method = fields[5];
        row.seed = std::stoull(fields[6]);
        row.metric = fields[7];
        row.value = std::stod(fields[8]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AggregateRow> aggregate_results(const std::vector<ResultRow>& rows) {
    // (task, filter, method, metric) -> graph -> running mean
    std::map<std::tuple<std::string, std::string, std::string, std::string>,
             std::map<std::string, std::pair<double, std::size_t>>>
        acc;
    for (const auto& row : rows) {
        if (row.metric == "error") continue;
        auto& per_graph = acc[{row.task, row.filter, row.method, row.metric}][row.graph];
        per_graph.first += row.value;
        per_graph.second += 1;
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, graphs] : acc) {
        double total = 0.0;
        for (const auto& [graph, sum_count] : graphs) {
            total += sum_count.first / static_cast<double>(sum_count.second);
        }
        AggregateRow a;
        a.task = std::get<0>(key);
        a.filter = std::get<1>(key);
        a.method = std::get<2>(key);
        a.metric = std::get<3>(key);
        a.mean = total / static_cast<double>(graphs.size());
        out.push_back(std::move(a));
    }
    return out;
}

namespace {

std::string format_cell_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
}

}  // namespace

std::string markdown_report(const std::vector<ResultRow>& rows) {
    auto aggregates = aggregate_results(rows);

    // Preserve first-appearance order of filters and methods.
    std::vector<std::string> filters, methods;
    for (const auto& row : rows) {
        if (std::find(filters.begin(), filters.end(), row.filter) == filters.end()) {
            filters.push_back(row.filter);
        }
        if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
            methods.push_back(row.method);
        }
    }

    auto lookup = [&aggregates](const std::string& task, const std::string& filter,
                                const std::string& method, const std::string& metric,
                                double& value) {
        for (const auto& a : aggregates) {
            if (a.task == task && a.filter == filter && a.method == method && a.metric == metric) {
                value = a.mean;
                return true;
            }
        }
        return false;
    };

    std::string report;
    std::string header_only;
    const struct {
        const char* task;
        const char* title;
        const char* metric;
        bool higher_better;
    } sections[] = {
        {"community", "Community member recommendation", "auc", true},
        {"diffusion", "Node value diffusion", "util_loss", false},
    };

    for (const auto& section : sections) {
        std::string table = "## " + std::string(section.title) + "\n\n| filter |";
        for (const auto& m : methods) {
            table += " " + m + " " + section.metric + " | " + m + " prule |";
        }
        table += "\n|---|";
        for (std::size_t i = 0; i < methods.size(); ++i) table += "---|---|";
        table += "\n";

        bool any_row = false;
        for (const auto& filter : filters) {
            double dummy;
            if (!lookup(section.task, filter, methods.front(), "prule", dummy)) continue;
            any_row = true;

            // best fairness-aware value in this row
            double best = section.higher_better ? -1e300 : 1e300;
            for (const auto& m : methods) {
                if (m == "none") continue;
                double v;
                if (!lookup(section.task, filter, m, section.metric, v)) continue;
                best = section.higher_better ? std::max(best, v) : std::min(best, v);
            }

            table += "| " + filter + " |";
            for (const auto& m : methods) {
                double metric_v, prule_v;
                const bool has_metric = lookup(section.task, filter, m, section.metric, metric_v);
                const bool has_prule = lookup(section.task, filter, m, "prule", prule_v);
                if (has_metric) {
                    std::string cell = format_cell_value(metric_v);
                    if (m != "none" && metric_v == best) cell = "**" + cell + "**";
                    table += " " + cell + " |";
                } else {
                    table += " - |";
                }
                table += has_prule ? " " + format_cell_value(prule_v) + " |" : " - |";
            }
            table += "\n";
        }
        if (any_row) {
            report += table + "\n";
        } else if (&section == &sections[0]) {
            header_only = table + "\n";
        }
    }
    if (report.empty()) report = header_only;  // no data: header-only table
    return report;
}

}  // namespace fairgf
