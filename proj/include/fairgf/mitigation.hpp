#pragma once

#include <cstddef>
#include <vector>

#include "fairgf/graph.hpp"

namespace fairgf {

enum class MassScale {
    L1,          // output sums to 1
    MatchInput,  // output keeps the input's total mass
};

/// Multiplicative rebalancing: one scale for the protected group, another for
/// the rest, so that the protected group holds exactly fraction phi of the
/// output mass. Within-group score ratios are preserved exactly. Throws when
/// either group carries zero mass (the constraint is then unsatisfiable by
/// scaling).
GraphSignal mult_transform(const GraphSignal& r, const NodeMask& protected_mask, double phi,
                           MassScale p0 = MassScale::L1);

struct LfproResult {
    GraphSignal scores;
    std::size_t iterations = 0;
    bool converged = false;
    double final_prule = 0.0;
    std::vector<double> prule_trace;  // prule after each redistribution step
};

/// Score redistribution toward a target prule: each iteration moves 10% of
/// the over-represented group's excess mass, removed proportionally to
/// scores (never below zero) and added to the under-represented group
/// proportionally to its scores (uniformly when that group holds no mass).
/// Total mass is conserved and prule never decreases. Non-convergence within
/// max_iters is reported in the result, not an error.
LfproResult lfpro(const GraphSignal& r, const NodeMask& protected_mask, double target_prule,
                  double tolerance = 1e-12, std::size_t max_iters = 10000);

}  // namespace fairgf
