#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fairgf/graph.hpp"
#include "fairgf/rng.hpp"
#include "test_support.hpp"

using namespace fairgf;

TEST_CASE("edge list loading interns tokens and deduplicates") {
    std::istringstream in("a b\nb c\na b\n");
    LoadStats stats;
    Graph g = load_edge_list(in, false, &stats);
    CHECK(g.node_count == 3);
    CHECK(g.edges.size() == 2);
    CHECK(stats.duplicates_dropped == 1);
    // first-appearance order
    CHECK(g.node_ids.at("a") == 0);
    CHECK(g.node_ids.at("b") == 1);
    CHECK(g.node_ids.at("c") == 2);
}

TEST_CASE("reversed duplicates collapse to one undirected edge") {
    std::istringstream in("a b\nb a\n");
    LoadStats stats;
    Graph g = load_edge_list(in, true, &stats);
    CHECK(g.edges.size() == 1);
    CHECK(stats.duplicates_dropped == 1);
}

TEST_CASE("self-loop-only input leaves no edges and errors") {
    std::istringstream in("a a\n");
    CHECK_THROWS(load_edge_list(in));
}

TEST_CASE("malformed lines report the line number") {
    std::istringstream one_token("a b\nc\n");
    CHECK_THROWS_WITH_AS(load_edge_list(one_token), doctest::Contains("line 2"), std::runtime_error);
    std::istringstream three_tokens("a b c\n");
    CHECK_THROWS_AS(load_edge_list(three_tokens), std::runtime_error);
}

TEST_CASE("comments and blank lines are skipped") {
    std::istringstream in("# header\n\na b # trailing comment\n");
    Graph g = load_edge_list(in);
    CHECK(g.node_count == 2);
    CHECK(g.edges.size() == 1);
}

TEST_CASE("symmetric normalization of a 2-node path has unit off-diagonals") {
    Graph g = testsup::make_graph(2, {{0, 1}});
    NormalizedGraph a = normalize(g, Normalization::Symmetric);
    auto m = testsup::dense_matrix(a);
    CHECK(m[0][1] == 1.0);
    CHECK(m[1][0] == 1.0);
    CHECK(m[0][0] == 0.0);
}

TEST_CASE("column normalization of a triangle has stochastic columns") {
    Graph g = testsup::make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto m = testsup::dense_matrix(normalize(g, Normalization::Column));
    for (std::size_t col = 0; col < 3; ++col) {
        double sum = m[0][col] + m[1][col] + m[2][col];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("star K1,3 symmetric weight is 1/sqrt(3)") {
    Graph g = testsup::make_graph(4, {{0, 1}, {0, 2}, {0, 3}});
    auto m = testsup::dense_matrix(normalize(g, Normalization::Symmetric));
    CHECK(m[0][1] == 1.0 / std::sqrt(3.0));
    CHECK(m[1][0] == 1.0 / std::sqrt(3.0));
}

TEST_CASE("symmetric normalization equals its transpose bit-exactly") {
    Rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = testsup::random_graph(rng, 20, 0.2, false);
        if (g.edges.empty()) continue;
        auto m = testsup::dense_matrix(normalize(g, Normalization::Symmetric));
        for (std::size_t u = 0; u < 20; ++u) {
            for (std::size_t v = 0; v < 20; ++v) {
                CHECK(m[u][v] == m[v][u]);
            }
        }
    }
}

TEST_CASE("column normalization sums to one over nonzero-degree columns") {
    Rng rng(102);
    Graph g = testsup::random_graph(rng, 30, 0.15, false);
    NormalizedGraph a = normalize(g, Normalization::Column);
    auto m = testsup::dense_matrix(a);
    for (std::size_t col = 0; col < 30; ++col) {
        double sum = 0.0;
        for (std::size_t row = 0; row < 30; ++row) sum += m[row][col];
        if (a.degrees[col] > 0) {
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        } else {
            CHECK(sum == 0.0);
        }
    }
}

TEST_CASE("zero-degree nodes keep zero rows and columns") {
    Graph g = testsup::make_graph(4, {{0, 1}});  // nodes 2 and 3 isolated
    for (auto mode : {Normalization::Symmetric, Normalization::Column}) {
        auto m = testsup::dense_matrix(normalize(g, mode));
        for (std::size_t v = 0; v < 4; ++v) {
            CHECK(m[2][v] == 0.0);
            CHECK(m[v][2] == 0.0);
            CHECK(m[3][v] == 0.0);
        }
    }
}

TEST_CASE("spmv basics") {
    Graph g = testsup::make_graph(2, {{0, 1}});
    NormalizedGraph a = normalize(g, Normalization::Symmetric);
    GraphSignal zero(2, 0.0);
    CHECK(spmv(a, zero) == zero);
    GraphSignal q{1.0, 0.0};
    GraphSignal next = spmv(a, q);
    CHECK(next[0] == 0.0);
    CHECK(next[1] == 1.0);
    GraphSignal wrong(3, 0.0);
    CHECK_THROWS_AS(spmv(a, wrong), std::invalid_argument);
    CHECK_THROWS_AS(spmv_transpose(a, wrong), std::invalid_argument);
}

TEST_CASE("spmv and spmv_transpose agree with the dense oracle") {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 4 + rng.index(9);  // up to 12 nodes
        Graph g = testsup::random_graph(rng, n, 0.4, false);
        if (g.edges.empty()) continue;
        for (auto mode : {Normalization::Symmetric, Normalization::Column}) {
            NormalizedGraph a = normalize(g, mode);
            auto dense = testsup::dense_matrix(a);
            auto q = testsup::random_signal(rng, n, -1.0, 1.0);
            auto got = spmv(a, q);
            auto want = testsup::matvec(dense, q);
            auto got_t = spmv_transpose(a, q);
            auto want_t = testsup::matvec(testsup::transpose(dense), q);
            for (std::size_t v = 0; v < n; ++v) {
                CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-12));
                CHECK(got_t[v] == doctest::Approx(want_t[v]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("symmetric spmv is self-adjoint") {
    Rng rng(104);
    Graph g = testsup::random_graph(rng, 25, 0.2, false);
    NormalizedGraph a = normalize(g, Normalization::Symmetric);
    for (int trial = 0; trial < 10; ++trial) {
        auto x = testsup::random_signal(rng, 25, -1.0, 1.0);
        auto y = testsup::random_signal(rng, 25, -1.0, 1.0);
        auto ax = spmv(a, x);
        auto ay = spmv(a, y);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t v = 0; v < 25; ++v) {
            lhs += ax[v] * y[v];
            rhs += x[v] * ay[v];
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("column mode preserves mass over nonzero-degree nodes") {
    Rng rng(105);
    Graph g = testsup::make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});  // 4, 5 isolated
    NormalizedGraph a = normalize(g, Normalization::Column);
    for (int trial = 0; trial < 10; ++trial) {
        auto q = testsup::random_signal(rng, 6);
        auto next = spmv(a, q);
        double total_next = 0.0, covered = 0.0;
        for (std::size_t v = 0; v < 6; ++v) {
            total_next += next[v];
            if (a.degrees[v] > 0) covered += q[v];
        }
        CHECK(total_next == doctest::Approx(covered).epsilon(1e-10));
    }
}

TEST_CASE("connected components") {
    Graph single = testsup::make_graph(2, {{0, 1}});
    CHECK(connected_components(single).count() == 1);

    Graph two = testsup::make_graph(4, {{0, 1}, {2, 3}});
    auto parts = connected_components(two);
    CHECK(parts.count() == 2);
    CHECK(parts.smallest() == 2);

    Rng rng(106);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = testsup::random_graph(rng, 15, 0.08, false);
        auto got = connected_components(g);
        auto reach = testsup::reachability_oracle(g);
        for (std::size_t u = 0; u < 15; ++u) {
            for (std::size_t v = 0; v < 15; ++v) {
                CHECK((got.label[u] == got.label[v]) == reach[u][v]);
            }
        }
    }
}
