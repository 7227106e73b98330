#pragma once

#include <iosfwd>
#include <vector>

#include "resdim/lp.hpp"
#include "resdim/types.hpp"

namespace resdim {

// First-stage quantities the recourse stage couples to: per-generator reserve
// awards, per-farm day-ahead wind sales, per-node day-ahead angles (all in
// case order).
struct FirstStagePoint {
    std::vector<double> up, down; // per generator
    std::vector<double> wind;     // per farm
    std::vector<double> angle;    // per node
};

// One optimality cut: the recourse cost of `scenario` at `anchor` plus the
// sensitivities that extend it to a global under-estimator,
//   alpha_scenario >= cost + theta . (point - anchor).
struct BendersCut {
    int scenario = 0;
    int iteration = 0; // decomposition pass that produced the cut
    double cost = 0.0;
    FirstStagePoint anchor;
    FirstStagePoint theta;
};

// Recourse-cost estimate of one cut at a first-stage point.
double cut_value(const BendersCut& cut, const FirstStagePoint& point);

// Snapshot of one decomposition pass.
struct BendersIteration {
    int iteration = 0;              // 1-based pass counter
    double master_objective = 0.0;  // valid lower bound on the optimum
    double expected_recourse = 0.0; // probability-weighted subproblem costs
    double upper_bound = 0.0;       // best incumbent total cost so far
    double gap = 0.0;               // convergence measure compared against eps
    FirstStagePoint point;          // first stage the subproblems were cut at
    std::vector<double> alpha;      // master's recourse estimates, per scenario
    std::vector<double> recourse;   // actual subproblem costs, per scenario
};

struct BendersState {
    bool converged = false;
    int iterations = 0;       // passes performed
    double alpha_floor = 0.0; // lower bound on every recourse estimate
    std::vector<BendersCut> cuts;          // one per scenario per finished pass
    std::vector<BendersIteration> history; // one record per pass
};

struct BendersConfig {
    bool absolute_gap = false; // compare the raw gap against eps, unscaled
    int max_iterations = 200;
    int threads = 1; // concurrent subproblems within a pass
    SolverConfig solver;
};

// Master proposal for one pass.
struct BendersProposal {
    double objective = 0.0;        // first-stage cost + weighted recourse estimates
    double first_stage_cost = 0.0; // objective minus the weighted alpha part
    ReserveRequirements requirements;
    FirstStagePoint point;
    std::vector<double> alpha; // per scenario
};

struct BendersSolution {
    ReserveRequirements requirements;
    MarketOutcome outcome; // staged sequential outcome at the chosen requirements
    double objective = 0.0;
    BendersState state;
};

// Valid lower bound on any scenario's recourse cost: the down-regulation
// credit is its only negative contribution, capped by each generator's offer
// limit.
double benders_alpha_floor(const SystemCase& sys);

// Recourse program for one wind outcome with the first stage pinned by
// explicit equalities; their duals are the returned sensitivities (valid
// subgradients of the recourse cost, not necessarily unique ones). Always
// feasible: shedding and spillage complete the recourse. The result's
// `scenario` and `iteration` tags are left for the caller.
BendersCut benders_subproblem(const SystemCase& sys, const std::vector<double>& wind_outcome,
                              const FirstStagePoint& fixed, const SolverConfig& cfg = {});

// One master pass: minimizes first-stage cost plus probability-weighted
// recourse estimates subject to every accumulated cut, the estimate floor,
// nonnegative requirements, and the stage-optimality conditions of the
// sequential clearings — a MILP like the monolithic dimensioning program.
// With no cuts every estimate sits on the floor. Throws InfeasibleError
// ("dimensioning") when no requirement pair admits feasible stage clearings.
BendersProposal benders_master(const SystemCase& sys, const ScenarioSet& scenarios,
                               const BendersState& state, const SolverConfig& cfg = {});

// Full decomposition loop: master, then concurrent subproblems, then one new
// cut per scenario, until |sum_w pi_w (alpha_w - recourse_w)| <= eps, with
// the left side scaled by 1 + |best upper bound| unless options.absolute_gap.
// Throws InputError for eps <= 0 and SolverError naming the final gap when
// the iteration cap is hit.
BendersSolution benders_solve(const SystemCase& sys, const ScenarioSet& scenarios,
                              double eps = 1e-6, const BendersConfig& options = {});

// One line per pass under a header:
// iteration,master_objective,expected_recourse,upper_bound,gap
void write_benders_log(std::ostream& os, const BendersState& state);

} // namespace resdim
