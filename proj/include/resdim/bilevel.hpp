#pragma once

#include "resdim/lp.hpp"
#include "resdim/stochastic.hpp"
#include "resdim/types.hpp"

namespace resdim {

// Bookkeeping for the first-order-condition reformulation of the two
// sequential stages inside the requirement-dimensioning MILP.
struct KktSystem {
    // One dual column per lower-stage constraint, in assembly order:
    // reserve stage: du_z | dd_z | cap_i | per gen (ru lb, ru ub, rd lb, rd ub);
    // day-ahead stage: hi_i | lo_i | bal_n | per line (fhi, flo) | ref_c |
    // per farm (pw lb, pw ub).
    std::vector<int> duals;
    // Appended equality rows: one stationarity row per lower-stage variable
    // (ru_i, rd_i, pc_i, pw_k, th_n).
    std::vector<int> stationarity;
    // Appended slack-definition equality rows (primal feasibility of every
    // lower-stage inequality, restated with an explicit slack column).
    std::vector<int> feasibility;
    // Complementarity couples (slack column, dual column); equalities carry
    // free duals and never appear here. Order: per generator (capacity
    // coupling, ru lb, ru ub, rd lb, rd ub), then per generator (hi, lo),
    // per farm (pw lb, pw ub), per line (fhi, flo). Lower-bound couples at
    // zero reuse the primal column itself as the slack.
    std::vector<std::pair<int, int>> pairs;
};

// Number of complementarity pairs the requirement-dimensioning MILP carries:
// one per lower-stage inequality. Reserve stage: capacity coupling plus both
// bounds on ru and rd (5 per generator); day-ahead stage: dispatch hi/lo
// (2 per generator), wind bounds (2 per farm), flow limits (2 per line).
inline int bilevel_pair_count(const SystemCase& sys) {
    return 7 * static_cast<int>(sys.generators.size()) +
           2 * static_cast<int>(sys.wind_farms.size()) +
           2 * static_cast<int>(sys.lines.size());
}

// Builds the requirement-dimensioning MILP: the co-optimization skeleton
// (exact stochastic layout, requirements as variables) plus the stationarity,
// dual-feasibility, and complementarity conditions that force the reserve and
// day-ahead blocks to be stage-wise optimal for whatever requirements the
// upper level picks. Pairs are marked for the kernel's branching; per-pair
// big-M values are also filled (primal side from variable bounds, dual side
// from the sum of absolute objective coefficients plus the lost-load price)
// so the kernel's big-M mode works on the same object. The LP relaxation of
// the result equals the co-optimized dispatch LP.
// Throws InputError for cases carrying commitment data (the lower stages
// must be convex programs).
MixedIntegerProgram assemble_bilevel_milp(const SystemCase& sys, const ScenarioSet& scenarios,
                                          KktSystem* kkt = nullptr);

struct EnhancedSolution {
    ReserveRequirements requirements;
    MarketOutcome outcome; // staged sequential outcome at the chosen requirements
    // MILP objective. The reformulation is optimistic: when a stage clearing
    // has alternate optima it may settle on a different vertex than the
    // simulated market, so objective <= outcome.cost.total, with equality
    // whenever the stage optima are unique.
    double objective = 0.0;
    double bound = 0.0; // best proven lower bound
    double gap = 0.0;
    long nodes = 0;
};

// Solves the dimensioning MILP to global optimality: returns the enhanced
// zonal requirements plus the sequential-market outcome they imply. Candidate
// incumbents are generated by evaluating the sequential pipeline at node
// relaxation requirement values (stage-wise optimal by construction, so the
// kernel's verifier accepts them exactly).
EnhancedSolution solve_enhanced_requirements(const SystemCase& sys, const ScenarioSet& scenarios,
                                             const SolverConfig& cfg = {});

} // namespace resdim
