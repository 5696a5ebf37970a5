#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairgf {

/// Dense per-node real vector. Length always equals the node count of the
/// graph it belongs to.
using GraphSignal = std::vector<double>;

/// Per-node boolean flags stored as bytes (protected group, eval masks, ...).
using NodeMask = std::vector<std::uint8_t>;

/// Undirected, unweighted graph with interned node tokens.
/// Each edge is stored once canonically (u < v); self-loops never survive
/// loading.
struct Graph {
    std::size_t node_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<std::string> node_names;                        // index -> token
    std::unordered_map<std::string, std::uint32_t> node_ids;    // token -> index

    std::uint32_t require_node(const std::string& token) const;
};

struct LoadStats {
    std::size_t lines = 0;
    std::size_t duplicates_dropped = 0;
    std::size_t self_loops_dropped = 0;
};

/// Parses an edge-list text stream: two whitespace-separated node tokens per
/// line, '#' starts a comment, blank lines ignored. Tokens are interned to
/// contiguous indices in first-appearance order. Duplicate edges and
/// self-loops are dropped. The directed flag only marks how the input was
/// produced; edges are always stored undirected.
/// Throws on malformed lines (with the line number) and on graphs that end up
/// with no nodes.
Graph load_edge_list(std::istream& in, bool directed_input = false, LoadStats* stats = nullptr);

enum class Normalization { Symmetric, Column };

/// CSR sparse normalized adjacency.
///   Symmetric: D^{-1/2} A D^{-1/2}, bit-exactly equal to its transpose.
///   Column:    A D^{-1}, every column over nodes with degree > 0 sums to 1.
/// Zero-degree nodes keep all-zero rows and columns.
/// Immutable after construction; safe for concurrent shared reads.
struct NormalizedGraph {
    Normalization mode = Normalization::Symmetric;
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col_idx;
    std::vector<double> values;
    std::vector<std::uint32_t> degrees;
};

NormalizedGraph normalize(const Graph& g, Normalization mode);

/// q_next[u] = sum_v A_hat[u,v] q[v]. Throws on length mismatch.
GraphSignal spmv(const NormalizedGraph& g, const GraphSignal& q);

/// Same with A_hat^T; needed for gradients under column normalization.
GraphSignal spmv_transpose(const NormalizedGraph& g, const GraphSignal& q);

struct ComponentPartition {
    std::vector<std::uint32_t> label;   // node -> component id
    std::vector<std::size_t> sizes;     // component id -> node count
    std::size_t count() const { return sizes.size(); }
    std::size_t smallest() const;
};

ComponentPartition connected_components(const Graph& g);

/// Neighbor lists of the raw (unnormalized) undirected graph.
std::vector<std::vector<std::uint32_t>> adjacency_lists(const Graph& g);

}  // namespace fairgf
