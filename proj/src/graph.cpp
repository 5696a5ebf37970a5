#include "fairgf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fairgf {

std::uint32_t Graph::require_node(const std::string& token) const {
    auto it = node_ids.find(token);
    if (it == node_ids.end()) {
        throw std::runtime_error("unknown node token: " + token);
    }
    return it->second;
}

Graph load_edge_list(std::istream& in, bool directed_input, LoadStats* stats) {
    (void)directed_input;  // edges are stored undirected either way
    Graph g;
    LoadStats local;
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;

    auto intern = [&g](const std::string& token) -> std::uint32_t {
        auto it = g.node_ids.find(token);
        if (it != g.node_ids.end()) return it->second;
        auto id = static_cast<std::uint32_t>(g.node_names.size());
        g.node_ids.emplace(token, id);
        g.node_names.push_back(token);
        return id;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a)) continue;  // blank / comment-only line
        if (!(fields >> b) || (fields >> extra)) {
            throw std::runtime_error("edge list parse error at line " + std::to_string(line_no) +
                                     ": expected two node tokens");
        }
        ++local.lines;
        std::uint32_t u = intern(a);
        std::uint32_t v = intern(b);
        if (u == v) {
            ++local.self_loops_dropped;
            continue;
        }
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) {
            ++local.duplicates_dropped;
            continue;
        }
        g.edges.emplace_back(u, v);
    }
    g.node_count = g.node_names.size();
    if (stats) *stats = local;
    if (g.edges.empty()) {
        throw std::runtime_error("edge list produced a graph with no edges");
    }
    return g;
}

NormalizedGraph normalize(const Graph& g, Normalization mode) {
    const std::size_t n = g.node_count;
    NormalizedGraph out;
    out.mode = mode;
    out.n = n;
    out.degrees.assign(n, 0);
    for (const auto& [u, v] : g.edges) {
        ++out.degrees[u];
        ++out.degrees[v];
    }

    // Both directions of every undirected edge go into the CSR.
    std::vector<std::vector<std::uint32_t>> nbr(n);
    for (const auto& [u, v] : g.edges) {
        nbr[u].push_back(v);
        nbr[v].push_back(u);
    }

    std::vector<double> inv_sqrt_deg;
    if (mode == Normalization::Symmetric) {
        inv_sqrt_deg.resize(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (out.degrees[i] > 0) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(out.degrees[i]));
        }
    }

    out.row_ptr.assign(n + 1, 0);
    for (std::size_t u = 0; u < n; ++u) {
        std::sort(nbr[u].begin(), nbr[u].end());
        out.row_ptr[u + 1] = out.row_ptr[u] + nbr[u].size();
    }
    out.col_idx.reserve(out.row_ptr[n]);
    out.values.reserve(out.row_ptr[n]);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::uint32_t v : nbr[u]) {
            out.col_idx.push_back(v);
            if (mode == Normalization::Symmetric) {
                // The product commutes, so the (u,v) and (v,u) entries are
                // bit-identical and the matrix equals its transpose exactly.
                out.values.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[v]);
            } else {
                out.values.push_back(1.0 / static_cast<double>(out.degrees[v]));
            }
        }
    }
    return out;
}

GraphSignal spmv(const NormalizedGraph& g, const GraphSignal& q) {
    if (q.size() != g.n) {
        throw std::invalid_argument("spmv: signal length does not match node count");
    }
    GraphSignal out(g.n, 0.0);
    for (std::size_t u = 0; u < g.n; ++u) {
        double acc = 0.0;
        for (std::size_t k = g.row_ptr[u]; k < g.row_ptr[u + 1]; ++k) {
            acc += g.values[k] * q[g.col_idx[k]];
        }
        out[u] = acc;
    }
    return out;
}

GraphSignal spmv_transpose(const NormalizedGraph& g, const GraphSignal& q) {
    if (q.size() != g.n) {
        throw std::invalid_argument("spmv_transpose: signal length does not match node count");
    }
    GraphSignal out(g.n, 0.0);
    for (std::size_t u = 0; u < g.n; ++u) {
        const double qu = q[u];
        if (qu == 0.0) continue;
        for (std::size_t k = g.row_ptr[u]; k < g.row_ptr[u + 1]; ++k) {
            out[g.col_idx[k]] += g.values[k] * qu;
        }
    }
    return out;
}

std::size_t ComponentPartition::smallest() const {
    if (sizes.empty()) return 0;
    return *std::min_element(sizes.begin(), sizes.end());
}

std::vector<std::vector<std::uint32_t>> adjacency_lists(const Graph& g) {
    std::vector<std::vector<std::uint32_t>> nbr(g.node_count);
    for (const auto& [u, v] : g.edges) {
        nbr[u].push_back(v);
        nbr[v].push_back(u);
    }
    return nbr;
}

ComponentPartition connected_components(const Graph& g) {
    const std::size_t n = g.node_count;
    auto nbr = adjacency_lists(g);
    ComponentPartition part;
    part.label.assign(n, UINT32_MAX);
    for (std::size_t start = 0; start < n; ++start) {
        if (part.label[start] != UINT32_MAX) continue;
        auto comp = static_cast<std::uint32_t>(part.sizes.size());
        std::size_t size = 0;
        std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(start)};
        part.label[start] = comp;
        while (!queue.empty()) {
            std::uint32_t u = queue.front();
            queue.pop_front();
            ++size;
            for (std::uint32_t v : nbr[u]) {
                if (part.label[v] == UINT32_MAX) {
                    part.label[v] = comp;
                    queue.push_back(v);
                }
            }
        }
        part.sizes.push_back(size);
    }
    return part;
}

}  // namespace fairgf
