#pragma once

#include "resdim/lp.hpp"
#include "resdim/types.hpp"

namespace resdim {

// Index map for the co-optimized (scenario-based) dispatch LP. The same
// skeleton carries the reserve, day-ahead, and all per-scenario real-time
// blocks, with the zonal requirements as decision variables; the
// requirement-dimensioning MILP reuses it and appends dual variables, so the
// layout is part of the public contract.
//
// Variables:  [ru_i | rd_i | du_z | dd_z | pc_i | pw_k | th_n |
//              per scenario w: rru_i | rrd_i | sh_j | sp_k | rth_n]
// Rows:       [du_z | dd_z | cap_i |                          (reserve stage)
//              hi_i | lo_i | bal_n | fhi/flo per line | ref_c |(day-ahead)
//              per scenario w: depu_i | depd_i | bal_n | fhi/flo | ref_c]
//
// Sizes: num_vars = 3·ng + 2·nz + nw + nn + ns·(2·ng + nl + nw + nn),
//        num_rows = 2·nz + 3·ng + nn + 2·nli + nc + ns·(2·ng + nn + 2·nli + nc)
// (ng generators, nz zones, nw farms, nn nodes, nl loads, nli lines,
//  nc network components, ns scenarios).
struct StochasticLayout {
    int ng = 0, nw = 0, nl = 0, nn = 0, nz = 0, nli = 0, nc = 0, ns = 0;
    int v_rt = 0, v_per = 0; // scenario variable blocks: start, stride
    int r_rt = 0, r_per = 0; // scenario row blocks: start, stride

    // variables
    int ru(int i) const { return i; }
    int rd(int i) const { return ng + i; }
    int du(int z) const { return 2 * ng + z; }
    int dd(int z) const { return 2 * ng + nz + z; }
    int pc(int i) const { return 2 * ng + 2 * nz + i; }
    int pw(int k) const { return 3 * ng + 2 * nz + k; }
    int th(int n) const { return 3 * ng + 2 * nz + nw + n; }
    int rt_ru(int w, int i) const { return v_rt + w * v_per + i; }
    int rt_rd(int w, int i) const { return v_rt + w * v_per + ng + i; }
    int shed(int w, int j) const { return v_rt + w * v_per + 2 * ng + j; }
    int spill(int w, int k) const { return v_rt + w * v_per + 2 * ng + nl + k; }
    int rt_th(int w, int n) const { return v_rt + w * v_per + 2 * ng + nl + nw + n; }
    int num_vars() const { return v_rt + ns * v_per; }

    // rows
    int row_du(int z) const { return z; }
    int row_dd(int z) const { return nz + z; }
    int row_cap(int i) const { return 2 * nz + i; }
    int row_hi(int i) const { return 2 * nz + ng + i; }
    int row_lo(int i) const { return 2 * nz + 2 * ng + i; }
    int row_bal(int n) const { return 2 * nz + 3 * ng + n; }
    int row_fhi(int l) const { return 2 * nz + 3 * ng + nn + 2 * l; }
    int row_flo(int l) const { return 2 * nz + 3 * ng + nn + 2 * l + 1; }
    int row_ref(int c) const { return 2 * nz + 3 * ng + nn + 2 * nli + c; }
    int row_depu(int w, int i) const { return r_rt + w * r_per + i; }
    int row_depd(int w, int i) const { return r_rt + w * r_per + ng + i; }
    int row_rt_bal(int w, int n) const { return r_rt + w * r_per + 2 * ng + n; }
    int row_rt_fhi(int w, int l) const { return r_rt + w * r_per + 2 * ng + nn + 2 * l; }
    int row_rt_flo(int w, int l) const { return r_rt + w * r_per + 2 * ng + nn + 2 * l + 1; }
    int row_rt_ref(int w, int c) const { return r_rt + w * r_per + 2 * ng + nn + 2 * nli + c; }
    int num_rows() const { return r_rt + ns * r_per; }
};

StochasticLayout stochastic_layout(const SystemCase& sys, const ScenarioSet& scenarios);

// The monolithic co-optimization LP over all scenarios per the layout above.
LinearProgram build_stochastic_lp(const SystemCase& sys, const ScenarioSet& scenarios);

struct StochasticSolution {
    MarketOutcome outcome;             // co-optimized schedules and recourse
    ReserveRequirements requirements;  // endogenous zonal requirements
};

// Solves the single co-optimized dispatch over all scenarios: reserve,
// day-ahead, and recourse decided together, with the zonal requirements as
// free nonnegative variables. A convex LP; the benchmark every sequential
// design is measured against. Throws InfeasibleError("stochastic") only when
// even free reserves cannot serve the day-ahead demand.
StochasticSolution solve_stochastic_dispatch(const SystemCase& sys, const ScenarioSet& scenarios,
                                             const SolverConfig& cfg = {});

// The requirement pairs read off the co-optimized optimum (zonal sums of the
// scheduled reserves). Ties among alternate optima resolve to the solver's
// vertex choice; downstream comparisons use objectives, not these values.
ReserveRequirements requirements_from_stochastic(const SystemCase& sys,
                                                 const ScenarioSet& scenarios,
                                                 const SolverConfig& cfg = {});

} // namespace resdim
