#pragma once

#include <string>
#include <vector>

#include "resdim/types.hpp"

namespace resdim {

// One violated validation rule; entity names the offending object ("generators[g2]").
struct ValidationIssue {
    std::string entity;
    std::string rule;
};

// Checks every structural rule on a case (and optionally a scenario set) and
// reports all violations instead of stopping at the first.
std::vector<ValidationIssue> validate_case(const SystemCase& sys);
std::vector<ValidationIssue> validate_case(const SystemCase& sys, const ScenarioSet& scenarios);

// Throws ValidationError listing every issue if any rule fails.
void require_valid(const SystemCase& sys);
void require_valid(const SystemCase& sys, const ScenarioSet& scenarios);

// Connected components of the network; component[n] in [0, count), numbered so
// that the lowest-indexed node of each component carries the smallest number.
// The lowest-indexed node of each component is that component's angle reference.
struct NetworkComponents {
    std::vector<int> component; // per node
    std::vector<int> reference; // per component, node index pinned to angle 0
};
NetworkComponents network_components(const SystemCase& sys);

// Post-solve physics audit of a sequential outcome: nodal balance residuals,
// flow limits, reserve deployment within procurement, zonal requirement sums.
// tol is in MW. Returns human-readable violation strings (empty = clean).
std::vector<std::string> verify_outcome(const SystemCase& sys, const ScenarioSet& scenarios,
                                        const MarketOutcome& outcome, double tol = 1e-6);

} // namespace resdim
