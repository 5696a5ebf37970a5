#include "fairgf/bounds.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace fairgf {

double horizon_radius(const FilterSpec& filter, double p_ratio, std::size_t effective_nodes) {
    if (effective_nodes == 0) {
        throw std::invalid_argument("horizon_radius: effective node count must be positive");
    }
    if (!(p_ratio > 0.0 && p_ratio <= 1.0)) {
        throw std::invalid_argument("horizon_radius: p_ratio must lie in (0, 1]");
    }
    return 0.5 * static_cast<double>(effective_nodes) * eigenvalue_ratio_bound(filter) * p_ratio;
}

double transfer_shrink(double delta0) {
    if (!(delta0 > 0.0)) {
        throw std::invalid_argument("transfer_shrink: delta0 must be positive");
    }
    return delta0 / (delta0 + 1.0);
}

double constraint_multiplier(double prule_original, double target_prule) {
    if (prule_original < 0.0 || target_prule < 0.0) {
        throw std::invalid_argument("constraint_multiplier: prules must be non-negative");
    }
    const double hi = std::max(prule_original, target_prule);
    if (hi == 0.0) return 0.0;
    return std::min(prule_original, target_prule) / hi;
}

HorizonReport horizon_report(const FilterSpec& filter, std::size_t effective_nodes, double p_ratio,
                             double delta0, double prule_original, double target_prule) {
    HorizonReport rep;
    rep.effective_nodes = effective_nodes;
    rep.p_ratio = p_ratio;
    rep.eigen_ratio = eigenvalue_ratio_bound(filter);
    rep.radius = horizon_radius(filter, p_ratio, effective_nodes);
    const double n = static_cast<double>(effective_nodes);
    if (delta0 > 0.0) {
        rep.shrink = transfer_shrink(delta0);
        rep.radius_l1_quadratic =
            0.5 * delta0 / ((delta0 + 1.0) * (delta0 + 1.0)) * n * n * rep.eigen_ratio;
    } else {
        rep.shrink = 1.0;
        rep.radius_l1_quadratic = 0.5 * n * n * rep.eigen_ratio;
    }
    rep.constraint_mult = constraint_multiplier(prule_original, target_prule);
    return rep;
}

std::string HorizonReport::summary() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "radius=%.6g radius_l1_quad=%.6g eigen_ratio=%.6g p_ratio=%.3g shrink=%.4g "
                  "constraint_mult=%.4g effective_nodes=%zu%s",
                  radius, radius_l1_quadratic, eigen_ratio, p_ratio, shrink, constraint_mult,
                  effective_nodes,
                  constraint_mult == 0.0 ? " WARN=original-prule-zero" : "");
    return std::string(buf);
}

}  // namespace fairgf
