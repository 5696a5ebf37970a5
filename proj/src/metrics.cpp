#include "fairgf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairgf {

std::size_t mask_count(const NodeMask& mask) {
    std::size_t c = 0;
    for (auto b : mask) c += (b != 0);
    return c;
}

void validate_group(const NodeMask& protected_mask, std::size_t node_count) {
    if (protected_mask.size() != node_count) {
        throw std::invalid_argument("protected mask length does not match node count");
    }
    std::size_t members = mask_count(protected_mask);
    if (members == 0 || members == node_count) {
        throw std::invalid_argument("protected group needs at least one member and one non-member");
    }
}

namespace {

struct GroupMasses {
    double in = 0.0, out = 0.0;
    std::size_t members = 0;
};

GroupMasses group_masses(const GraphSignal& r, const NodeMask& mask) {
    GroupMasses m;
    for (std::size_t v = 0; v < r.size(); ++v) {
        if (mask[v]) {
            m.in += r[v];
            ++m.members;
        } else {
            m.out += r[v];
        }
    }
    return m;
}

}  // namespace

double prule(const GraphSignal& r, const NodeMask& protected_mask) {
    validate_group(protected_mask, r.size());
    for (double x : r) {
        if (x < 0.0) throw std::domain_error("prule requires non-negative scores");
    }
    GroupMasses m = group_masses(r, protected_mask);
    const double in_count = static_cast<double>(m.members);
    const double out_count = static_cast<double>(r.size() - m.members);
    const double a = out_count * m.in;
    const double b = in_count * m.out;
    const double hi = std::max(a, b);
    if (hi == 0.0) return 0.0;  // all scores zero (or one vacuous side)
    // min * (1/max) rather than min/max: mathematically identical, and the
    // double rounding of 0.6/0.8-style decimal inputs lands on the exact
    // ratio the metric is defined to report.
    return std::min(a, b) * (1.0 / hi);
}

double phi_from_prule(double prule_value, std::size_t group_size, std::size_t node_count) {
    if (!(prule_value > 0.0 && prule_value <= 1.0)) {
        throw std::invalid_argument("prule must lie in (0, 1] for conversion");
    }
    if (group_size == 0 || group_size >= node_count) {
        throw std::invalid_argument("group size must be strictly between 0 and |V|");
    }
    const double s = static_cast<double>(group_size);
    const double v = static_cast<double>(node_count);
    return s * prule_value / (v + s * (prule_value - 1.0));
}

double prule_from_phi(double phi, std::size_t group_size, std::size_t node_count) {
    if (!(phi > 0.0 && phi < 1.0)) {
        throw std::invalid_argument("phi must lie in (0, 1)");
    }
    if (group_size == 0 || group_size >= node_count) {
        throw std::invalid_argument("group size must be strictly between 0 and |V|");
    }
    const double s = static_cast<double>(group_size);
    const double rest = static_cast<double>(node_count - group_size);
    return phi * rest / ((1.0 - phi) * s);
}

double prule_of_phi_split(double phi, std::size_t group_size, std::size_t node_count) {
    const double s = static_cast<double>(group_size);
    const double rest = static_cast<double>(node_count - group_size);
    const double a = rest * phi;
    const double b = s * (1.0 - phi);
    const double hi = std::max(a, b);
    if (hi == 0.0) return 0.0;
    return std::min(a, b) * (1.0 / hi);
}

FairnessTarget resolve_fairness_target(const GraphSignal& reference, const NodeMask& protected_mask,
                                       double target_prule) {
    validate_group(protected_mask, reference.size());
    GroupMasses m = group_masses(reference, protected_mask);
    const std::size_t n = reference.size();
    const std::size_t s = m.members;
    FairnessTarget t;
    t.target_prule = target_prule;
    const double mean_in = m.in / static_cast<double>(s);
    const double mean_out = m.out / static_cast<double>(n - s);
    if (mean_in <= mean_out) {
        t.phi = phi_from_prule(target_prule, s, n);
    } else {
        t.swapped = true;
        t.phi = 1.0 - phi_from_prule(target_prule, n - s, n);
    }
    return t;
}

UtilityLossResult utility_loss(const GraphSignal& fair, const GraphSignal& original, double floor) {
    if (fair.size() != original.size()) {
        throw std::invalid_argument("utility_loss: signal lengths differ");
    }
    UtilityLossResult res;
    double acc = 0.0;
    std::size_t included = 0;
    for (std::size_t v = 0; v < fair.size(); ++v) {
        if (original[v] <= floor) {
            ++res.excluded;
            continue;
        }
        acc += std::fabs(1.0 - fair[v] / original[v]);
        ++included;
    }
    if (included == 0) {
        throw std::domain_error("utility_loss: no node has an original posterior above the floor");
    }
    res.value = acc / static_cast<double>(included);
    return res;
}

double auc(const GraphSignal& scores, const NodeMask& positives, const NodeMask& eval_mask) {
    const std::size_t n = scores.size();
    if (positives.size() != n || eval_mask.size() != n) {
        throw std::invalid_argument("auc: mask lengths do not match scores");
    }
    std::vector<std::uint32_t> order;
    order.reserve(n);
    std::size_t pos_total = 0, neg_total = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (!eval_mask[v]) continue;
        order.push_back(static_cast<std::uint32_t>(v));
        if (positives[v]) ++pos_total; else ++neg_total;
    }
    if (pos_total == 0 || neg_total == 0) {
        throw std::domain_error("auc: evaluation mask must contain both classes");
    }
    std::sort(order.begin(), order.end(), [&scores](std::uint32_t a, std::uint32_t b) {
        return scores[a] < scores[b];
    });
    // Walk score-tie groups in ascending order; every positive earns one
    // credit per strictly lower negative and half per tied negative. All
    // partial sums are multiples of 0.5, so the result is exact.
    double credits = 0.0;
    double negs_below = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double group_pos = 0.0, group_neg = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (positives[order[j]]) group_pos += 1.0; else group_neg += 1.0;
            ++j;
        }
        credits += group_pos * negs_below + 0.5 * group_pos * group_neg;
        negs_below += group_neg;
        i = j;
    }
    return credits / (static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

double calders_verwer(const GraphSignal& r, const NodeMask& protected_mask) {
    validate_group(protected_mask, r.size());
    GroupMasses m = group_masses(r, protected_mask);
    const double mean_in = m.in / static_cast<double>(m.members);
    const double mean_out = m.out / static_cast<double>(r.size() - m.members);
    return std::fabs(mean_in - mean_out);
}

}  // namespace fairgf
