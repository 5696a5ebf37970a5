#pragma once

#include <cstddef>
#include <string>

#include "fairgf/filter.hpp"

namespace fairgf {

/// 0.5 * n * (lambda_1 min p / lambda_max max p), with n the effective node
/// count (smallest connected component). The L2 distance within which locally
/// optimal posteriors still attract the original ones. Throws when n == 0 or
/// the filter is not positive definite.
double horizon_radius(const FilterSpec& filter, double p_ratio, std::size_t effective_nodes);

/// Radius shrink factor delta0 / (delta0 + 1) induced by the transfer
/// transform; monotone in delta0 and bounded by 1.
double transfer_shrink(double delta0);

/// min/max ratio of the original posteriors' prule and the imposed target;
/// multiplies the radius when the fairness constraint is hard-coded. Returns
/// 0 (a practical warning) when the original prule is 0.
double constraint_multiplier(double prule_original, double target_prule);

/// Advisory applicability diagnostics logged with every experiment cell;
/// never gating.
struct HorizonReport {
    double radius = 0.0;            // 0.5 n ratio p_ratio
    double radius_l1_quadratic = 0.0;  // 0.5 shrink-weighted n^2 ratio form under L1 scaling
    double eigen_ratio = 0.0;       // lambda_1 / lambda_max lower bound
    double p_ratio = 1.0;           // min p / max p of the post-processing
    double shrink = 1.0;            // transfer factor, 1 when no transfer applies
    double constraint_mult = 1.0;
    std::size_t effective_nodes = 0;

    std::string summary() const;
};

/// delta0 <= 0 means the transfer transform is not part of the pipeline.
HorizonReport horizon_report(const FilterSpec& filter, std::size_t effective_nodes, double p_ratio,
                             double delta0, double prule_original, double target_prule);

}  // namespace fairgf
