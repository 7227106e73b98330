#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "resdim/lp.hpp"
#include "resdim/types.hpp"

namespace resdim {

// Weighted empirical quantile: order statistics with linear interpolation.
// Equiprobable samples sit at positions (j-1)/(n-1), so the probe lands at
// h = (n-1)p + 1; general weights place sample j at its weighted analog
// (C_j - w_j) / (1 - w_last) over the value-sorted cumulative weights C.
// Monotone and continuous in p; p=0 gives the minimum, p=1 the maximum.
// Throws InputError for an empty sample set, a weight-count mismatch,
// negative weights, weights not summing to one, or p outside [0, 1].
double empirical_quantile(std::vector<double> values, std::vector<double> weights, double p);

// Quantile-rule requirements from the zonal wind distributions: with
// Ŵ_z the expected zonal production, the up requirement covers the shortfall
// down to the low quantile and the down requirement the surplus up to the
// high quantile, each clamped at zero:
//   D^U_z = max(0, Ŵ_z - q_z(alpha_lo)),  D^D_z = max(0, q_z(alpha_hi) - Ŵ_z).
// Farms aggregate inside each zone before the quantile is taken. With
// zonal=false the whole fleet forms one distribution; that needs a
// single-zone case (InputError otherwise). Throws InputError unless
// 0 <= alpha_lo < alpha_hi <= 1.
ReserveRequirements probabilistic_requirements(const SystemCase& sys,
                                               const ScenarioSet& scenarios, double alpha_lo,
                                               double alpha_hi, bool zonal = true);

// Inclusive arithmetic grid lo, lo+step, ..., capped at hi.
struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;
};

// One probed requirement pair. `status` is "ok" for a completed evaluation,
// otherwise the stage that cleared infeasible; costs are meaningful only
// when ok.
struct SweepCell {
    double up = 0.0;
    double down = 0.0;
    CostBreakdown cost;
    std::string status;
};

struct SweepResult {
    std::vector<double> up_values, down_values;
    std::vector<SweepCell> cells; // up-major: cell (i,j) at i*down_values.size()+j
    int argmin = -1;              // cheapest ok cell, -1 when none
};

// Evaluates the sequential pipeline at every pair of the two grids (cells run
// concurrently when threads > 1, merged by index). The requirement surface is
// two-dimensional, so the case must have a single zone. Throws InputError for
// a malformed grid (negative lo, hi < lo, step <= 0).
SweepResult sweep_requirement_grid(const SystemCase& sys, const ScenarioSet& scenarios,
                                   const GridSpec& up, const GridSpec& down,
                                   const SolverConfig& cfg = {}, int threads = 1);

// Delimited table, one cell per line:
// D_U,D_D,cost_reserve,cost_da,cost_rt_expected,cost_total,status
// (cost fields empty on non-ok cells).
void write_sweep_table(std::ostream& os, const SweepResult& sweep);

struct QuantilePair {
    double lo = 0.0;
    double hi = 1.0;
};

// One design's row in the comparison: zonal requirements plus the staged
// cost breakdown, or the stage that failed.
struct ComparisonRow {
    std::string label;
    ReserveRequirements requirements;
    CostBreakdown cost;
    std::string status;
};

struct CompareOptions {
    bool enhanced_via_benders = false; // decompose instead of the monolithic MILP
    double benders_eps = 1e-6;
    int threads = 1;
    SolverConfig solver;
};

// The study harness: one row per quantile pair (zonal rule), one for the
// requirements read off the co-optimized dispatch, one for the enhanced
// requirements, and a final co-optimized ideal row — the lower bound every
// sequential design is measured against. Rows whose stages clear infeasible
// carry that stage as their status instead of costs.
std::vector<ComparisonRow> compare_approaches(const SystemCase& sys, const ScenarioSet& scenarios,
                                              const std::vector<QuantilePair>& quantiles,
                                              const CompareOptions& options = {});

// Delimited report, one row per line:
// label,D_U,D_D,cost_reserve,cost_da,cost_rt_expected,cost_total,status
// (multi-zone requirement fields join zone values with ';').
void write_comparison(std::ostream& os, const std::vector<ComparisonRow>& rows);

} // namespace resdim
