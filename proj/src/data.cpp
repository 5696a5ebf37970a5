#include "fairgf/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fairgf/rng.hpp"

namespace fairgf {

namespace {

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, delim)) out.push_back(item);
    return out;
}

/// Partial Fisher-Yates: the first k entries of a fresh index vector.
std::vector<std::uint32_t> sample_without_replacement(std::size_t population, std::size_t k, Rng& rng) {
    std::vector<std::uint32_t> idx(population);
    for (std::size_t i = 0; i < population; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.index(population - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

Dataset load_dataset(const std::string& edges_path, const std::string& attributes_path,
                     const std::string& name) {
    std::ifstream edges(edges_path);
    if (!edges) throw std::runtime_error("cannot open edge list: " + edges_path);
    Dataset data;
    data.name = name;
    data.graph = load_edge_list(edges);
    data.sensitive.assign(data.graph.node_count, 0);

    std::ifstream attrs(attributes_path);
    if (!attrs) throw std::runtime_error("cannot open attribute file: " + attributes_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(attrs, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() < 2 || fields.size() > 3) {
            throw std::runtime_error("attribute parse error at line " + std::to_string(line_no) +
                                     ": expected token<TAB>flag[<TAB>communities]");
        }
        std::uint32_t v = data.graph.require_node(fields[0]);
        if (fields[1] == "1") {
            data.sensitive[v] = 1;
        } else if (fields[1] != "0") {
            throw std::runtime_error("attribute parse error at line " + std::to_string(line_no) +
                                     ": sensitive flag must be 0 or 1");
        }
        if (fields.size() == 3 && !fields[2].empty()) {
            for (const auto& comm : split(fields[2], ',')) {
                if (comm.empty()) continue;
                data.communities[comm].push_back(v);
            }
        }
    }
    for (auto& [comm, members] : data.communities) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
    }
    return data;
}

TaskInstance community_task(const Dataset& data, const std::string& community, double fraction,
                            std::uint64_t seed) {
    auto it = data.communities.find(community);
    if (it == data.communities.end()) {
        throw std::invalid_argument("unknown community: " + community);
    }
    const auto& members = it->second;
    if (members.empty()) throw std::invalid_argument("community is empty: " + community);
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("community fraction must lie in (0, 1]");
    }
    const std::size_t n = data.graph.node_count;
    const auto seeds_wanted = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(members.size())));

    Rng rng(mix_seed(mix_seed(mix_seed(seed, "community"), community),
                     static_cast<std::uint64_t>(fraction * 1e6)));
    auto picks = sample_without_replacement(members.size(), seeds_wanted, rng);

    TaskInstance task;
    task.kind = TaskInstance::Kind::Community;
    task.community = community;
    task.fraction = fraction;
    task.seed = seed;
    task.q0.assign(n, 0.0);
    task.eval_positives.assign(n, 0);
    task.eval_mask.assign(n, 1);
    for (auto p : picks) {
        const std::uint32_t v = members[p];
        task.q0[v] = 1.0;
        task.eval_mask[v] = 0;  // seeds never take part in evaluation
    }
    for (auto v : members) {
        if (task.q0[v] == 0.0) task.eval_positives[v] = 1;
    }
    return task;
}

TaskInstance diffusion_task(const Dataset& data, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("diffusion fraction must lie in (0, 1]");
    }
    const std::size_t n = data.graph.node_count;
    const auto nonzero = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    Rng rng(mix_seed(mix_seed(seed, "diffusion"), static_cast<std::uint64_t>(fraction * 1e6)));
    auto picks = sample_without_replacement(n, nonzero, rng);
    TaskInstance task;
    task.kind = TaskInstance::Kind::Diffusion;
    task.fraction = fraction;
    task.seed = seed;
    task.q0.assign(n, 0.0);
    for (auto v : picks) task.q0[v] = rng.uniform();
    return task;
}

Dataset synth_biased_graph(std::size_t n_per_group, double p_intra, double p_inter,
                           std::uint64_t seed) {
    if (n_per_group < 2) throw std::invalid_argument("synthetic graph needs at least 2 nodes per group");
    if (p_intra < 0.0 || p_intra > 1.0 || p_inter < 0.0 || p_inter > 1.0) {
        throw std::invalid_argument("edge probabilities must lie in [0, 1]");
    }
    const std::size_t n = 2 * n_per_group;
    Dataset data;
    data.name = "synth";
    data.graph.node_count = n;
    data.graph.node_names.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        data.graph.node_names[v] = "n" + std::to_string(v);
        data.graph.node_ids.emplace(data.graph.node_names[v], static_cast<std::uint32_t>(v));
    }
    data.sensitive.assign(n, 0);
    for (std::size_t v = n_per_group; v < n; ++v) data.sensitive[v] = 1;

    // Planted community: 90/10 split between the groups, denser internally.
    const auto planted_main = static_cast<std::size_t>(std::round(0.36 * static_cast<double>(n_per_group)));
    const auto planted_minor = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::round(0.04 * static_cast<double>(n_per_group))));
    NodeMask in_planted(n, 0);
    auto& planted = data.communities["planted"];
    for (std::size_t v = 0; v < planted_main; ++v) {
        in_planted[v] = 1;
        planted.push_back(static_cast<std::uint32_t>(v));
    }
    for (std::size_t v = n_per_group; v < n_per_group + planted_minor; ++v) {
        in_planted[v] = 1;
        planted.push_back(static_cast<std::uint32_t>(v));
    }
    const double p_comm = std::min(1.0, 3.0 * p_intra);

    Rng rng(mix_seed(seed, "synth"));
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            double p;
            if (in_planted[u] && in_planted[v]) p = p_comm;
            else if (data.sensitive[u] == data.sensitive[v]) p = p_intra;
            else p = p_inter;
            if (rng.bernoulli(p)) {
                data.graph.edges.emplace_back(static_cast<std::uint32_t>(u),
                                              static_cast<std::uint32_t>(v));
            }
        }
    }

    // Chain components with single edges so the graph ends up connected.
    auto parts = connected_components(data.graph);
    if (parts.count() > 1) {
        std::vector<std::uint32_t> representative(parts.count(), UINT32_MAX);
        for (std::size_t v = 0; v < n; ++v) {
            auto c = parts.label[v];
            if (representative[c] == UINT32_MAX) representative[c] = static_cast<std::uint32_t>(v);
        }
        for (std::size_t c = 1; c < parts.count(); ++c) {
            auto u = representative[c - 1];
            auto v = representative[c];
            if (u > v) std::swap(u, v);
            data.graph.edges.emplace_back(u, v);
        }
    }
    std::sort(data.graph.edges.begin(), data.graph.edges.end());
    return data;
}

void write_dataset(const Dataset& data, const std::string& edges_path,
                   const std::string& attributes_path) {
    std::ofstream edges(edges_path);
    if (!edges) throw std::runtime_error("cannot write edge list: " + edges_path);
    for (const auto& [u, v] : data.graph.edges) {
        edges << data.graph.node_names[u] << ' ' << data.graph.node_names[v] << '\n';
    }

    std::vector<std::string> comm_of_node(data.graph.node_count);
    for (const auto& [name, members] : data.communities) {
        for (auto v : members) {
            if (!comm_of_node[v].empty()) comm_of_node[v] += ',';
            comm_of_node[v] += name;
        }
    }
    std::ofstream attrs(attributes_path);
    if (!attrs) throw std::runtime_error("cannot write attribute file: " + attributes_path);
    for (std::size_t v = 0; v < data.graph.node_count; ++v) {
        attrs << data.graph.node_names[v] << '\t' << (data.sensitive[v] ? 1 : 0);
        if (!comm_of_node[v].empty()) attrs << '\t' << comm_of_node[v];
        attrs << '\n';
    }
}

}  // namespace fairgf
