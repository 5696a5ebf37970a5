#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairgf/graph.hpp"

namespace fairgf {

/// A graph plus its sensitive attribute and named communities. Immutable and
/// shareable once loaded.
struct Dataset {
    std::string name;
    Graph graph;
    NodeMask sensitive;
    std::map<std::string, std::vector<std::uint32_t>> communities;
};

/// Attribute file format, one node per line:
///   token<TAB>0|1[<TAB>comm1,comm2]
/// The third field lists the node's communities and may be absent. Unknown
/// node tokens are an error (reported by name). Graph nodes missing from the
/// file default to sensitive flag 0 and no community.
Dataset load_dataset(const std::string& edges_path, const std::string& attributes_path,
                     const std::string& name);

struct TaskInstance {
    enum class Kind { Community, Diffusion };
    Kind kind = Kind::Diffusion;
    GraphSignal q0;
    NodeMask eval_positives;  // community kind only
    NodeMask eval_mask;       // community kind only; excludes seed nodes
    std::string community;    // community kind only
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

/// Samples ceil(fraction * |community|) members (without replacement) as
/// binary q0 seeds; remaining members are the eval positives; the eval mask
/// covers every non-seed node.
TaskInstance community_task(const Dataset& data, const std::string& community, double fraction,
                            std::uint64_t seed);

/// Selects floor(fraction * |V|) nodes uniformly and assigns them independent
/// Uniform[0,1) values; every other prior is zero.
TaskInstance diffusion_task(const Dataset& data, double fraction, std::uint64_t seed);

/// Two equal groups (the second protected) with stochastic-block-model edges
/// and one planted community concentrated in the non-protected group, so that
/// community seeds produce biased posteriors. Components are chained with
/// single edges, making the result connected.
Dataset synth_biased_graph(std::size_t n_per_group, double p_intra, double p_inter,
                           std::uint64_t seed);

/// Writes a dataset back to the edge-list / attribute text formats.
void write_dataset(const Dataset& data, const std::string& edges_path,
                   const std::string& attributes_path);

}  // namespace fairgf
