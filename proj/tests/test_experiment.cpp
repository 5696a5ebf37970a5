#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fairgf/experiment.hpp"
#include "fairgf/filter.hpp"
#include "fairgf/metrics.hpp"
#include "fairgf/rng.hpp"

using namespace fairgf;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void remove_outputs(const std::string& path) {
    std::remove(path.c_str());
    std::remove((path + ".log").c_str());
}

RunConfig small_config(const std::string& output, TaskInstance::Kind kind,
                       std::vector<Method> methods) {
    RunConfig config;
    DatasetConfig dc;
    dc.name = "synthsmall";
    dc.synthetic = true;
    dc.synth = {20, 0.2, 0.05, 3};
    config.datasets.push_back(dc);
    TaskConfig tc;
    tc.kind = kind;
    tc.fractions = {0.3};
    config.tasks.push_back(tc);
    config.filters = {"ppr0.85sym", "hk1col"};
    config.methods = std::move(methods);
    config.seeds = {1, 2};
    config.output = output;
    return config;
}

}  // namespace

TEST_CASE("method names parse, out-of-scope baselines are rejected with a message") {
    CHECK(method_from_name("none") == Method::None);
    CHECK(method_from_name("nsgff-appnp") == Method::NsgffAppnp);
    CHECK_THROWS_WITH_AS(method_from_name("lfprp"), doctest::Contains("out of scope"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(method_from_name("fp"), doctest::Contains("out of scope"),
                         std::invalid_argument);
    CHECK_THROWS_AS(method_from_name("magic"), std::invalid_argument);
}

TEST_CASE("config JSON parsing validates filters and methods") {
    const char* good = R"({
      "datasets": [{"name": "s", "synth": {"n_per_group": 10}}],
      "tasks": [{"kind": "diffusion", "fractions": [0.3, 0.5]}],
      "filters": ["ppr0.85sym"],
      "methods": ["none", "mult"],
      "seeds": [1],
      "target_prule": 1.0,
      "output": "out.csv"
    })";
    RunConfig config = parse_run_config(good);
    CHECK(config.datasets.size() == 1);
    CHECK(config.datasets[0].synthetic);
    CHECK(config.tasks[0].fractions.size() == 2);
    CHECK(config.methods.size() == 2);

    std::string bad_filter(good);
    bad_filter.replace(bad_filter.find("ppr0.85sym"), 10, "ppr0.85xyz");
    CHECK_THROWS(parse_run_config(bad_filter));

    std::string bad_method(good);
    bad_method.replace(bad_method.find("\"mult\""), 6, "\"lfprp\"");
    CHECK_THROWS_WITH_AS(parse_run_config(bad_method), doctest::Contains("out of scope"),
                         std::invalid_argument);
}

TEST_CASE("a 1-graph 1-community 2-filter 3-method 2-seed matrix has 12 cells") {
    const std::string out = "fairgf_test_cells.csv";
    remove_outputs(out);
    RunConfig config = small_config(out, TaskInstance::Kind::Community,
                                    {Method::None, Method::Mult, Method::Lfpro});
    RunStats stats = run_experiments(config);
    CHECK(stats.cells_total == 12);
    CHECK(stats.cells_executed == 12);

    auto rows = read_results_csv(out);
    std::set<std::string> cells;
    for (const auto& row : rows) {
        CHECK(row.metric != "error");
        cells.insert(row.community + row.task + row.filter + row.method + std::to_string(row.seed));
    }
    CHECK(cells.size() == 12);
    CHECK(rows.size() == 24);  // prule + auc per cell
    remove_outputs(out);
}

TEST_CASE("none rows carry zero utility loss and mult rows reach the target prule") {
    const std::string out = "fairgf_test_none.csv";
    remove_outputs(out);
    RunConfig config =
        small_config(out, TaskInstance::Kind::Diffusion, {Method::None, Method::Mult});
    run_experiments(config);
    auto rows = read_results_csv(out);
    std::size_t none_util = 0, mult_prule = 0;
    for (const auto& row : rows) {
        if (row.method == "none" && row.metric == "util_loss") {
            CHECK(row.value == 0.0);
            ++none_util;
        }
        if (row.method == "mult" && row.metric == "prule") {
            CHECK(row.value == doctest::Approx(1.0).epsilon(1e-9));
            ++mult_prule;
        }
    }
    CHECK(none_util == 4);
    CHECK(mult_prule == 4);
    remove_outputs(out);
}

TEST_CASE("each emitted value is re-derivable from its cell inputs") {
    const std::string out = "fairgf_test_derive.csv";
    remove_outputs(out);
    RunConfig config = small_config(out, TaskInstance::Kind::Diffusion, {Method::None});
    run_experiments(config);
    auto rows = read_results_csv(out);

    Dataset data = synth_biased_graph(config.datasets[0].synth.n_per_group,
                                      config.datasets[0].synth.p_intra,
                                      config.datasets[0].synth.p_inter, config.datasets[0].synth.seed);
    data.name = config.datasets[0].name;
    for (const auto& row : rows) {
        if (row.metric != "prule" || row.filter != "ppr0.85sym") continue;
        const std::uint64_t task_seed =
            mix_seed(mix_seed(mix_seed(config.config_seed, "task"), data.name), row.seed);
        TaskInstance task = diffusion_task(data, row.fraction, task_seed);
        NamedFilter named = parse_filter_name(row.filter);
        NormalizedGraph graph = normalize(data.graph, named.mode);
        auto posterior = apply_filter(named.spec, graph, task.q0, PostProcessing::L1);
        CHECK(row.value == doctest::Approx(prule(posterior.scores, data.sensitive)).epsilon(1e-12));
    }
    remove_outputs(out);
}

TEST_CASE("an interrupted run resumed over the same file reproduces the bytes") {
    const std::string full_out = "fairgf_test_full.csv";
    const std::string resume_out = "fairgf_test_resume.csv";
    remove_outputs(full_out);
    remove_outputs(resume_out);

    RunConfig config =
        small_config(full_out, TaskInstance::Kind::Diffusion, {Method::None, Method::Lfpro});
    run_experiments(config);
    std::string want = read_file(full_out);

    // simulate an interruption: keep the header and the first cell's rows
    {
        std::istringstream in(want);
        std::ofstream partial(resume_out, std::ios::binary);
        std::string line;
        for (int kept = 0; kept < 3 && std::getline(in, line); ++kept) {
            partial << line << '\n';
        }
    }
    config.output = resume_out;
    RunStats stats = run_experiments(config);
    CHECK(stats.cells_skipped == 1);
    CHECK(read_file(resume_out) == want);

    remove_outputs(full_out);
    remove_outputs(resume_out);
}

TEST_CASE("results are byte-identical for any worker count") {
    const std::string a = "fairgf_test_w1.csv";
    const std::string b = "fairgf_test_w4.csv";
    remove_outputs(a);
    remove_outputs(b);
    RunConfig config =
        small_config(a, TaskInstance::Kind::Community, {Method::None, Method::Mult, Method::Lfpro});
    run_experiments(config, 1);
    config.output = b;
    run_experiments(config, 4);
    CHECK(read_file(a) == read_file(b));
    remove_outputs(a);
    remove_outputs(b);
}

TEST_CASE("aggregation weighs graphs equally") {
    std::vector<ResultRow> rows;
    auto push = [&rows](const std::string& graph, double value) {
        ResultRow r;
        r.graph = graph;
        r.community = "-";
        r.task = "diffusion";
        r.fraction = 0.3;
        r.filter = "ppr0.85sym";
        r.method = "mult";
        r.seed = 1;
        r.metric = "util_loss";
        r.value = value;
        rows.push_back(r);
    };
    push("g1", 0.2);
    push("g1", 0.4);
    push("g2", 0.8);

    auto agg = aggregate_results(rows);
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].mean == doctest::Approx(0.5 * (0.3 + 0.8)).epsilon(1e-12));

    auto single = aggregate_results({rows[0], rows[1]});
    CHECK(single[0].mean == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("markdown report shapes") {
    CHECK(markdown_report({}).find("| filter |") != std::string::npos);

    std::vector<ResultRow> rows;
    auto push = [&rows](const std::string& method, const std::string& metric, double value) {
        ResultRow r;
        r.graph = "g";
        r.community = "c";
        r.task = "community";
        r.fraction = 0.3;
        r.filter = "ppr0.85sym";
        r.method = method;
        r.seed = 1;
        r.metric = metric;
        r.value = value;
        rows.push_back(r);
    };
    push("none", "auc", 0.9);
    push("none", "prule", 0.6);
    push("mult", "auc", 0.8);
    push("mult", "prule", 1.0);
    push("nsgff", "auc", 0.85);
    push("nsgff", "prule", 1.0);

    std::string report = markdown_report(rows);
    CHECK(report.find("ppr0.85sym") != std::string::npos);
    CHECK(report.find("**0.850**") != std::string::npos);  // best fairness-aware auc bolded
    CHECK(report.find("**0.900**") == std::string::npos);  // none never bolded
}
