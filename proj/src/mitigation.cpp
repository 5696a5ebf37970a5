#include "fairgf/mitigation.hpp"

#include <cmath>
#include <stdexcept>

#include "fairgf/metrics.hpp"

namespace fairgf {

GraphSignal mult_transform(const GraphSignal& r, const NodeMask& protected_mask, double phi,
                           MassScale p0) {
    validate_group(protected_mask, r.size());
    if (!(phi > 0.0 && phi < 1.0)) {
        throw std::invalid_argument("mult_transform: phi must lie in (0, 1)");
    }
    double mass_in = 0.0, mass_out = 0.0;
    for (std::size_t v = 0; v < r.size(); ++v) {
        if (r[v] < 0.0) throw std::domain_error("mult_transform requires non-negative scores");
        if (protected_mask[v]) mass_in += r[v]; else mass_out += r[v];
    }
    if (mass_in <= 0.0 || mass_out <= 0.0) {
        throw std::domain_error("mult_transform: a group holds zero score mass, scaling cannot satisfy the split");
    }
    const double total = (p0 == MassScale::L1) ? 1.0 : mass_in + mass_out;
    const double scale_in = phi * total / mass_in;
    const double scale_out = (1.0 - phi) * total / mass_out;
    GraphSignal out(r.size());
    for (std::size_t v = 0; v < r.size(); ++v) {
        out[v] = r[v] * (protected_mask[v] ? scale_in : scale_out);
    }
    return out;
}

LfproResult lfpro(const GraphSignal& r, const NodeMask& protected_mask, double target_prule,
                  double tolerance, std::size_t max_iters) {
    validate_group(protected_mask, r.size());
    if (!(target_prule > 0.0 && target_prule <= 1.0)) {
        throw std::invalid_argument("lfpro: target prule must lie in (0, 1]");
    }
    for (double x : r) {
        if (x < 0.0) throw std::domain_error("lfpro requires non-negative scores");
    }

    LfproResult res;
    res.scores = r;
    double total = 0.0;
    for (double x : r) total += x;
    if (total <= 0.0) {
        res.final_prule = 0.0;  // nothing to redistribute
        return res;
    }

    // The group that starts lower keeps the smaller share of the fair split;
    // the relative order cannot flip because steps never overshoot.
    FairnessTarget target = resolve_fairness_target(r, protected_mask, target_prule);
    const double fair_in = target.phi * total;

    const std::size_t n = r.size();
    std::size_t count_in = mask_count(protected_mask);
    std::size_t count_out = n - count_in;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        if (prule(res.scores, protected_mask) >= target_prule) {
            res.converged = true;  // target met, possibly before any step
            break;
        }
        double mass_in = 0.0, mass_out = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            if (protected_mask[v]) mass_in += res.scores[v]; else mass_out += res.scores[v];
        }
        const bool over_is_protected = mass_in > fair_in;
        const double excess = over_is_protected ? mass_in - fair_in : fair_in - mass_in;
        if (excess <= tolerance * total) {
            res.converged = true;
            break;
        }
        const double move = 0.1 * excess;
        const double from_mass = over_is_protected ? mass_in : mass_out;
        const double to_mass = over_is_protected ? mass_out : mass_in;
        const std::size_t to_count = over_is_protected ? count_out : count_in;
        for (std::size_t v = 0; v < n; ++v) {
            const bool in_over = (protected_mask[v] != 0) == over_is_protected;
            if (in_over) {
                double next = res.scores[v] - move * res.scores[v] / from_mass;
                res.scores[v] = next < 0.0 ? 0.0 : next;
            } else if (to_mass > 0.0) {
                res.scores[v] += move * res.scores[v] / to_mass;
            } else {
                res.scores[v] += move / static_cast<double>(to_count);
            }
        }
        ++res.iterations;
        res.prule_trace.push_back(prule(res.scores, protected_mask));
    }
    res.final_prule = prule(res.scores, protected_mask);
    return res;
}

}  // namespace fairgf
