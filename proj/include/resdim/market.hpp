#pragma once

#include "resdim/lp.hpp"
#include "resdim/types.hpp"

namespace resdim {

// === Problem builders ===
// Exposed so tests can audit the structure (variable/row census) and so the
// bilevel module can reuse the exact same constraint blocks.
//
// Variable layouts (index order):
//   reserve LP:   [ru_i | rd_i]                       (i over generators)
//   day-ahead LP: [pc_i | pw_k | th_n]                (k farms, n nodes)
//   real-time LP: [ru_i | rd_i | sh_j | sp_k | th_n]  (j loads)
//
// Row layouts:
//   reserve LP:   per zone "du_z"/"dd_z" equalities, then per generator
//                 "cap_i" coupling (ru + rd <= capacity)
//   day-ahead LP: per node "bal_n" equality, per line "fhi_l"/"flo_l"
//                 two-sided flow limits, per component "ref" angle pin
//   real-time LP: same shape as day-ahead (balance in deviations from the
//                 day-ahead angles, flow limits on real-time angles alone)
LinearProgram build_reserve_lp(const SystemCase& sys, const ReserveRequirements& req);
LinearProgram build_day_ahead_lp(const SystemCase& sys, const ReserveSchedule& reserve);
LinearProgram build_real_time_lp(const SystemCase& sys, const ReserveSchedule& reserve,
                                 const DayAheadSchedule& da,
                                 const std::vector<double>& wind_outcome);

// === Sequential stages ===
// Reserve procurement: least-cost coverage of the zonal requirements.
// Throws InfeasibleError("reserve") when requirements exceed offer capacity.
ReserveSchedule clear_reserve(const SystemCase& sys, const ReserveRequirements& req,
                              const SolverConfig& cfg = {});

// Day-ahead energy: DC-OPF with procured reserves carving out headroom.
// No load shedding at this stage; throws InfeasibleError("day-ahead") when the
// reserved margins plus network limits make demand unservable.
DayAheadSchedule clear_day_ahead(const SystemCase& sys, const ReserveSchedule& reserve,
                                 const SolverConfig& cfg = {});

// Real-time re-dispatch for one wind outcome (MW per farm, case order).
// Always feasible: shedding and spillage complete the recourse.
RealTimeDispatch clear_real_time(const SystemCase& sys, const ReserveSchedule& reserve,
                                 const DayAheadSchedule& da,
                                 const std::vector<double>& wind_outcome,
                                 const SolverConfig& cfg = {});

// Whole pipeline for fixed requirements: reserve -> day-ahead -> per-scenario
// real-time (scenarios solved concurrently when threads > 1; aggregation is
// by scenario index, so results do not depend on thread scheduling).
MarketOutcome evaluate_sequential(const SystemCase& sys, const ScenarioSet& scenarios,
                                  const ReserveRequirements& req, const SolverConfig& cfg = {},
                                  int threads = 1);

// === Unit-commitment day-ahead variant ===
// Multi-hour day-ahead MILP with commitment binaries, startup costs, minimum
// outputs and ramp limits, plus the usual per-hour network constraints and
// reserve headroom. The horizon is hourly_reserve.size(); hourly loads scale
// by the case load profile and hourly wind offers by the wind profile
// (clamped at installed capacity). Every generator must carry UC data.
// Throws InfeasibleError("day-ahead-uc", ...) naming the first infeasible
// hour when a single-hour relaxation can pin it down.
UcDayAheadSchedule clear_day_ahead_uc(const SystemCase& sys,
                                      const std::vector<ReserveSchedule>& hourly_reserve,
                                      const SolverConfig& cfg = {});

// Whole multi-hour pipeline for fixed requirements: one reserve clearing
// (the reserve stage sees no hourly data) reused across `horizon` hours, the
// UC day-ahead over the full horizon, then per-hour per-scenario real-time
// with wind outcomes scaled by the hourly profile.
UcMarketOutcome evaluate_sequential_uc(const SystemCase& sys, const ScenarioSet& scenarios,
                                       const ReserveRequirements& req, int horizon = 24,
                                       const SolverConfig& cfg = {}, int threads = 1);

// Hourly wind outcome/offer helpers shared by the UC pipeline and studies:
// profile-scaled values clamped at installed capacity.
double scaled_wind(const WindFarm& farm, double raw, double factor);

} // namespace resdim
