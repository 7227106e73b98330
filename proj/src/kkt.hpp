#pragma once

#include <optional>
#include <vector>

#include "resdim/bilevel.hpp"
#include "resdim/lp.hpp"
#include "resdim/stochastic.hpp"
#include "resdim/types.hpp"

namespace resdim::detail {

// Column handles for the dual and slack blocks appended after a program whose
// leading columns and rows follow the StochasticLayout first-stage prefix.
// Kept internal; tests reach the same columns through KktSystem's ordered
// lists.
struct KktHandles {
    StochasticLayout lay;
    // reserve stage
    std::vector<int> sigma_u, sigma_d;                       // coverage equality duals
    std::vector<int> mu;                                     // capacity coupling duals
    std::vector<int> phi_u_lo, phi_u_hi, phi_d_lo, phi_d_hi; // offer bound duals
    std::vector<int> s_cap, s_ru_hi, s_rd_hi;                // slacks
    // day-ahead stage
    std::vector<int> eta_hi, eta_lo;     // dispatch headroom duals
    std::vector<int> lambda;             // balance duals
    std::vector<int> kappa_hi, kappa_lo; // flow limit duals
    std::vector<int> tau;                // reference pin duals
    std::vector<int> xi_lo, xi_hi;       // wind bound duals
    std::vector<int> s_hi, s_lo, s_pw_hi, s_fhi, s_flo;
};

// Appends the optimality system of the two stage problems onto mip.lp: dual
// columns, slack columns with their definition rows, stationarity rows, and
// the complementarity couples with their big-M bounds. Throws InputError on
// commitment data (the stages must stay convex for the dual recast).
void append_stage_kkt(MixedIntegerProgram& mip, const SystemCase& sys,
                      const StochasticLayout& lay, KktHandles& h, KktSystem& kkt);

// Reserve and day-ahead clearings at fixed requirements, with the raw solver
// results kept for dual mapping. Empty when either stage is infeasible.
struct StageClears {
    ReserveSchedule reserve;
    DayAheadSchedule day_ahead;
    SolveResult reserve_res, day_ahead_res;
};
std::optional<StageClears> clear_stage_pair(const SystemCase& sys,
                                            const ReserveRequirements& req,
                                            const SolverConfig& cfg);

// Writes the stage primals (including the requirement columns as the zonal
// sums actually procured), the stage duals mapped per the stationarity
// convention, and the slack values into x at the handle positions.
void fill_stage_point(std::vector<double>& x, const SystemCase& sys, const KktHandles& h,
                      const StageClears& st);

} // namespace resdim::detail
