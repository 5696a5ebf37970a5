#pragma once

#include <cstddef>
#include <vector>

#include "fairgf/graph.hpp"

namespace fairgf {

/// Counts set bits of a node mask.
std::size_t mask_count(const NodeMask& mask);

/// Validates a protected-group mask: length matches, at least one member and
/// one non-member. Throws otherwise.
void validate_group(const NodeMask& protected_mask, std::size_t node_count);

/// Stochastic-interpretation prule of non-negative node scores:
///   min{|V\S| sum_S r, |S| sum_{V\S} r} / max{...}
/// Returns 0 when all scores are zero. Throws on negative entries (the
/// stochastic reading needs non-negative scores) and on degenerate groups.
double prule(const GraphSignal& r, const NodeMask& protected_mask);

/// phi = |S| prule / (|V| + |S| (prule - 1)). Stated for the convention that
/// the protected group is the lower-scored one.
double phi_from_prule(double prule_value, std::size_t group_size, std::size_t node_count);

/// prule = phi |V\S| / ((1 - phi) |S|), inverse of the above.
double prule_from_phi(double phi, std::size_t group_size, std::size_t node_count);

/// The prule implied by enforcing a phi mass split on the given group sizes,
/// independent of which group ends up lower-scored.
double prule_of_phi_split(double phi, std::size_t group_size, std::size_t node_count);

/// Target phi resolved against reference scores: the currently lower-scored
/// group receives the smaller mass share. When the protected group is the
/// higher-scored one the complement is treated as protected for the
/// conversion and `swapped` is set.
struct FairnessTarget {
    double phi = 0.0;
    double target_prule = 1.0;
    bool swapped = false;
};

FairnessTarget resolve_fairness_target(const GraphSignal& reference, const NodeMask& protected_mask,
                                       double target_prule);

struct UtilityLossResult {
    double value = 0.0;
    std::size_t excluded = 0;  // nodes with original posterior <= floor
};

constexpr double kUtilityFloor = 1e-12;

/// Mean per-node relative error |1 - fair/original|. Nodes whose original
/// posterior is at or below the floor are excluded from the mean and counted.
/// Throws if every node is excluded.
UtilityLossResult utility_loss(const GraphSignal& fair, const GraphSignal& original,
                               double floor = kUtilityFloor);

/// Pairwise AUC with 0.5 tie credit, over positive/negative pairs restricted
/// to eval_mask. Exact rank-based computation; throws if either class is
/// empty inside the mask.
double auc(const GraphSignal& scores, const NodeMask& positives, const NodeMask& eval_mask);

/// Calders-Verwer disparity: absolute difference of group mean scores.
double calders_verwer(const GraphSignal& r, const NodeMask& protected_mask);

}  // namespace fairgf
