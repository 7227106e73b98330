#include "resdim/market.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "resdim/errors.hpp"
#include "resdim/validate.hpp"
#include "network.hpp"
#include "parallel.hpp"

namespace resdim {

using detail::add_network_rows;

namespace {

std::string hour_tag(int t) { return "t" + std::to_string(t); }

} // namespace

LinearProgram build_reserve_lp(const SystemCase& sys, const ReserveRequirements& req) {
    LinearProgram lp;
    const int ng = static_cast<int>(sys.generators.size());
    std::vector<int> ru(ng), rd(ng);
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        ru[i] = lp.add_variable("ru_" + g.id, 0.0, g.up_reserve_cap, g.up_reserve_price);
    }
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        rd[i] = lp.add_variable("rd_" + g.id, 0.0, g.down_reserve_cap, g.down_reserve_price);
    }
    for (int z = 0; z < sys.num_zones(); ++z) {
        std::vector<std::pair<int, double>> up_terms, down_terms;
        for (int i = 0; i < ng; ++i) {
            if (sys.nodes[sys.generators[i].node].zone != z) continue;
            up_terms.push_back({ru[i], 1.0});
            down_terms.push_back({rd[i], 1.0});
        }
        lp.add_row("du_" + sys.zones[z], RowSense::Equal, req.up[z], up_terms);
        lp.add_row("dd_" + sys.zones[z], RowSense::Equal, req.down[z], down_terms);
    }
    for (int i = 0; i < ng; ++i)
        lp.add_row("cap_" + sys.generators[i].id, RowSense::LessEqual,
                   sys.generators[i].capacity, {{ru[i], 1.0}, {rd[i], 1.0}});
    return lp;
}

LinearProgram build_day_ahead_lp(const SystemCase& sys, const ReserveSchedule& reserve) {
    LinearProgram lp;
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nn = sys.num_nodes();

    std::vector<int> pc(ng), pw(nw), th(nn);
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        pc[i] = lp.add_variable("pc_" + g.id, reserve.down[i], g.capacity - reserve.up[i],
                                g.energy_price);
    }
    for (int k = 0; k < nw; ++k) {
        const auto& w = sys.wind_farms[k];
        pw[k] = lp.add_variable("pw_" + w.id, 0.0, w.expected_output, 0.0);
    }
    for (int n = 0; n < nn; ++n)
        th[n] = lp.add_variable("th_" + sys.nodes[n].id, -kInf, kInf, 0.0);

    std::vector<std::vector<std::pair<int, double>>> injections(nn);
    std::vector<double> rhs(nn, 0.0);
    for (int i = 0; i < ng; ++i) injections[sys.generators[i].node].push_back({pc[i], 1.0});
    for (int k = 0; k < nw; ++k) injections[sys.wind_farms[k].node].push_back({pw[k], 1.0});
    for (const auto& load : sys.loads) rhs[load.node] += load.demand;
    add_network_rows(lp, sys, th, injections, rhs, "");
    return lp;
}

LinearProgram build_real_time_lp(const SystemCase& sys, const ReserveSchedule& reserve,
                                 const DayAheadSchedule& da,
                                 const std::vector<double>& wind_outcome) {
    LinearProgram lp;
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nl = static_cast<int>(sys.loads.size());
    const int nn = sys.num_nodes();

    std::vector<int> ru(ng), rd(ng), sh(nl), sp(nw), th(nn);
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        ru[i] = lp.add_variable("ru_" + g.id, 0.0, reserve.up[i], g.energy_price);
    }
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        rd[i] = lp.add_variable("rd_" + g.id, 0.0, reserve.down[i], -g.energy_price);
    }
    for (int j = 0; j < nl; ++j)
        sh[j] = lp.add_variable("sh_" + sys.loads[j].id, 0.0, sys.loads[j].demand, sys.voll);
    for (int k = 0; k < nw; ++k)
        sp[k] = lp.add_variable("sp_" + sys.wind_farms[k].id, 0.0, wind_outcome[k], 0.0);
    for (int n = 0; n < nn; ++n)
        th[n] = lp.add_variable("th_" + sys.nodes[n].id, -kInf, kInf, 0.0);

    // balance in deviations: recourse + (W - PW* - spill) + shed
    //   - sum_m ((thRT_n - thDA*_n) - (thRT_m - thDA*_m))/x = 0;
    // the day-ahead angle terms are constants and move to the right-hand side
    std::vector<std::vector<std::pair<int, double>>> injections(nn);
    std::vector<double> rhs(nn, 0.0);
    for (int i = 0; i < ng; ++i) {
        injections[sys.generators[i].node].push_back({ru[i], 1.0});
        injections[sys.generators[i].node].push_back({rd[i], -1.0});
    }
    for (int k = 0; k < nw; ++k) {
        int n = sys.wind_farms[k].node;
        injections[n].push_back({sp[k], -1.0});
        rhs[n] -= wind_outcome[k] - da.wind[k];
    }
    for (int j = 0; j < nl; ++j) injections[sys.loads[j].node].push_back({sh[j], 1.0});
    for (const auto& line : sys.lines) {
        double b = 1.0 / line.reactance;
        double da_flow = (da.angle[line.from] - da.angle[line.to]) * b;
        rhs[line.from] -= da_flow; // -(-da_flow) from the deviation expansion
        rhs[line.to] += da_flow;
    }
    add_network_rows(lp, sys, th, injections, rhs, "");
    return lp;
}

namespace {

SolveResult solve_or_throw(const LinearProgram& lp, const SolverConfig& cfg,
                           const std::string& stage, bool may_be_infeasible) {
    SolveResult res = solve_lp(lp, cfg);
    switch (res.status) {
    case SolveStatus::Optimal: return res;
    case SolveStatus::Infeasible:
        if (may_be_infeasible)
            throw InfeasibleError(stage, stage + " clearing is infeasible");
        throw SolverError(stage + " clearing reported infeasible unexpectedly");
    case SolveStatus::Unbounded:
        throw SolverError(stage + " clearing reported unbounded (model bug)");
    case SolveStatus::IterationLimit:
        throw SolverError(stage + " clearing hit the solver iteration limit");
    }
    throw SolverError(stage + " clearing returned unknown status");
}

} // namespace

ReserveSchedule clear_reserve(const SystemCase& sys, const ReserveRequirements& req,
                              const SolverConfig& cfg) {
    if (static_cast<int>(req.up.size()) != sys.num_zones() ||
        static_cast<int>(req.down.size()) != sys.num_zones())
        throw InputError("requirements must carry one up/down pair per zone");
    for (int z = 0; z < sys.num_zones(); ++z)
        if (req.up[z] < 0.0 || req.down[z] < 0.0)
            throw InputError("reserve requirements must be nonnegative");
    LinearProgram lp = build_reserve_lp(sys, req);
    SolveResult res = solve_or_throw(lp, cfg, "reserve", true);
    const int ng = static_cast<int>(sys.generators.size());
    ReserveSchedule sched;
    sched.up.assign(res.x.begin(), res.x.begin() + ng);
    sched.down.assign(res.x.begin() + ng, res.x.begin() + 2 * ng);
    sched.cost = res.objective;
    return sched;
}

DayAheadSchedule clear_day_ahead(const SystemCase& sys, const ReserveSchedule& reserve,
                                 const SolverConfig& cfg) {
    LinearProgram lp = build_day_ahead_lp(sys, reserve);
    SolveResult res = solve_or_throw(lp, cfg, "day-ahead", true);
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    DayAheadSchedule da;
    da.conventional.assign(res.x.begin(), res.x.begin() + ng);
    da.wind.assign(res.x.begin() + ng, res.x.begin() + ng + nw);
    da.angle.assign(res.x.begin() + ng + nw, res.x.end());
    da.cost = res.objective;
    return da;
}

RealTimeDispatch clear_real_time(const SystemCase& sys, const ReserveSchedule& reserve,
                                 const DayAheadSchedule& da,
                                 const std::vector<double>& wind_outcome,
                                 const SolverConfig& cfg) {
    if (wind_outcome.size() != sys.wind_farms.size())
        throw InputError("wind outcome must carry one value per farm");
    LinearProgram lp = build_real_time_lp(sys, reserve, da, wind_outcome);
    SolveResult res = solve_or_throw(lp, cfg, "real-time", false);
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nl = static_cast<int>(sys.loads.size());
    RealTimeDispatch rt;
    auto it = res.x.begin();
    rt.up.assign(it, it + ng);
    it += ng;
    rt.down.assign(it, it + ng);
    it += ng;
    rt.shed.assign(it, it + nl);
    it += nl;
    rt.spill.assign(it, it + nw);
    it += nw;
    rt.angle.assign(it, res.x.end());
    rt.cost = res.objective;
    return rt;
}

using detail::parallel_for;

MarketOutcome evaluate_sequential(const SystemCase& sys, const ScenarioSet& scenarios,
                                  const ReserveRequirements& req, const SolverConfig& cfg,
                                  int threads) {
    MarketOutcome out;
    out.requirements = req;
    out.reserve = clear_reserve(sys, req, cfg);
    out.day_ahead = clear_day_ahead(sys, out.reserve, cfg);

    const int ns = scenarios.num_scenarios();
    const int nw = scenarios.num_farms();
    out.real_time.resize(ns);
    parallel_for(ns, threads, [&](int w) {
        std::vector<double> outcome(nw);
        for (int k = 0; k < nw; ++k) outcome[k] = scenarios.outcome[k][w];
        out.real_time[w] = clear_real_time(sys, out.reserve, out.day_ahead, outcome, cfg);
    });

    out.cost.reserve = out.reserve.cost;
    out.cost.day_ahead = out.day_ahead.cost;
    double ert = 0.0;
    for (int w = 0; w < ns; ++w) ert += scenarios.probability[w] * out.real_time[w].cost;
    out.cost.real_time_expected = ert;
    out.cost.total = out.cost.reserve + out.cost.day_ahead + out.cost.real_time_expected;
    return out;
}

double scaled_wind(const WindFarm& farm, double raw, double factor) {
    return std::min(raw * factor, farm.installed_capacity);
}

namespace {

double profile_factor(const std::vector<double>& profile, int t) {
    if (profile.empty()) return 1.0;
    return profile[t];
}

// single-hour case snapshot used for infeasibility localization and for the
// per-hour real-time stage of the UC pipeline
SystemCase hourly_case(const SystemCase& sys, int t) {
    SystemCase h = sys;
    double lf = profile_factor(sys.load_profile, t);
    double wf = profile_factor(sys.wind_profile, t);
    for (auto& load : h.loads) load.demand *= lf;
    for (auto& farm : h.wind_farms)
        farm.expected_output = scaled_wind(farm, farm.expected_output, wf);
    h.load_profile.clear();
    h.wind_profile.clear();
    return h;
}

} // namespace

UcDayAheadSchedule clear_day_ahead_uc(const SystemCase& sys,
                                      const std::vector<ReserveSchedule>& hourly_reserve,
                                      const SolverConfig& cfg) {
    const int T = static_cast<int>(hourly_reserve.size());
    if (T == 0) throw InputError("unit-commitment horizon is empty");
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nn = sys.num_nodes();
    for (const auto& g : sys.generators)
        if (!g.uc)
            throw InputError("generator " + g.id +
                             " lacks unit-commitment data required by the multi-hour variant");
    if (!sys.load_profile.empty() && static_cast<int>(sys.load_profile.size()) < T)
        throw InputError("load profile shorter than the requested horizon");
    if (!sys.wind_profile.empty() && static_cast<int>(sys.wind_profile.size()) < T)
        throw InputError("wind profile shorter than the requested horizon");

    MixedIntegerProgram mip;
    auto& lp = mip.lp;
    // variables: per hour [pc_i | pw_k | th_n], then all u_{it}, then su_{it}
    std::vector<std::vector<int>> pc(T), pw(T), th(T), uu(T), su(T);
    for (int t = 0; t < T; ++t) {
        pc[t].resize(ng);
        pw[t].resize(nw);
        th[t].resize(nn);
        const auto& res = hourly_reserve[t];
        double wf = profile_factor(sys.wind_profile, t);
        for (int i = 0; i < ng; ++i) {
            const auto& g = sys.generators[i];
            pc[t][i] = lp.add_variable("pc_" + g.id + "_" + hour_tag(t), res.down[i],
                                       g.capacity - res.up[i], g.energy_price);
        }
        for (int k = 0; k < nw; ++k) {
            const auto& w = sys.wind_farms[k];
            pw[t][k] = lp.add_variable("pw_" + w.id + "_" + hour_tag(t), 0.0,
                                       scaled_wind(w, w.expected_output, wf), 0.0);
        }
        for (int n = 0; n < nn; ++n)
            th[t][n] =
                lp.add_variable("th_" + sys.nodes[n].id + "_" + hour_tag(t), -kInf, kInf, 0.0);
    }
    for (int t = 0; t < T; ++t) {
        uu[t].resize(ng);
        su[t].resize(ng);
        for (int i = 0; i < ng; ++i) {
            const auto& g = sys.generators[i];
            uu[t][i] = lp.add_variable("u_" + g.id + "_" + hour_tag(t), 0.0, 1.0, 0.0);
            su[t][i] = lp.add_variable("su_" + g.id + "_" + hour_tag(t), 0.0, kInf, 1.0);
            mip.binaries.push_back(uu[t][i]);
        }
    }

    for (int t = 0; t < T; ++t) {
        // network block for hour t
        std::vector<std::vector<std::pair<int, double>>> injections(nn);
        std::vector<double> rhs(nn, 0.0);
        for (int i = 0; i < ng; ++i)
            injections[sys.generators[i].node].push_back({pc[t][i], 1.0});
        for (int k = 0; k < nw; ++k)
            injections[sys.wind_farms[k].node].push_back({pw[t][k], 1.0});
        double lf = profile_factor(sys.load_profile, t);
        for (const auto& load : sys.loads) rhs[load.node] += load.demand * lf;
        add_network_rows(lp, sys, th[t], injections, rhs, "_" + hour_tag(t));

        // commitment window, startup logic and ramps for hour t
        for (int i = 0; i < ng; ++i) {
            const auto& g = sys.generators[i];
            const auto& uc = *g.uc;
            std::string tag = g.id + "_" + hour_tag(t);
            lp.add_row("umin_" + tag, RowSense::GreaterEqual, 0.0,
                       {{pc[t][i], 1.0}, {uu[t][i], -uc.min_output}});
            lp.add_row("umax_" + tag, RowSense::LessEqual, 0.0,
                       {{pc[t][i], 1.0}, {uu[t][i], -g.capacity}});
            if (t == 0) {
                lp.add_row("su_" + tag, RowSense::GreaterEqual,
                           -uc.startup_cost * uc.initial_commitment,
                           {{su[t][i], 1.0}, {uu[t][i], -uc.startup_cost}});
                lp.add_row("rampup_" + tag, RowSense::LessEqual, uc.ramp_up + uc.initial_output,
                           {{pc[t][i], 1.0}});
                lp.add_row("rampdn_" + tag, RowSense::GreaterEqual,
                           uc.initial_output - uc.ramp_down, {{pc[t][i], 1.0}});
            } else {
                lp.add_row("su_" + tag, RowSense::GreaterEqual, 0.0,
                           {{su[t][i], 1.0},
                            {uu[t][i], -uc.startup_cost},
                            {uu[t - 1][i], uc.startup_cost}});
                lp.add_row("rampup_" + tag, RowSense::LessEqual, uc.ramp_up,
                           {{pc[t][i], 1.0}, {pc[t - 1][i], -1.0}});
                lp.add_row("rampdn_" + tag, RowSense::LessEqual, uc.ramp_down,
                           {{pc[t - 1][i], 1.0}, {pc[t][i], -1.0}});
            }
        }
    }

    SolveResult res = solve_milp(mip, cfg);
    if (res.status == SolveStatus::Infeasible) {
        // localize when possible: a single-hour clearing without commitment
        // constraints is a relaxation of that hour's slice
        for (int t = 0; t < T; ++t) {
            SystemCase h = hourly_case(sys, t);
            try {
                (void)clear_day_ahead(h, hourly_reserve[t], cfg);
            } catch (const InfeasibleError&) {
                throw InfeasibleError("day-ahead-uc",
                                      "day-ahead clearing with unit commitment is infeasible; "
                                      "hour " +
                                          std::to_string(t) +
                                          " is unservable even without commitment coupling");
            }
        }
        throw InfeasibleError("day-ahead-uc",
                              "day-ahead clearing with unit commitment is infeasible "
                              "(inter-hour coupling)");
    }
    if (res.status != SolveStatus::Optimal)
        throw SolverError("unit-commitment day-ahead solve ended with status " +
                          std::string(to_string(res.status)));

    UcDayAheadSchedule out;
    out.hour.resize(T);
    out.commitment.assign(T, std::vector<int>(ng, 0));
    out.startup.assign(T, std::vector<double>(ng, 0.0));
    for (int t = 0; t < T; ++t) {
        auto& h = out.hour[t];
        h.conventional.resize(ng);
        h.wind.resize(nw);
        h.angle.resize(nn);
        double hour_cost = 0.0;
        for (int i = 0; i < ng; ++i) {
            h.conventional[i] = res.x[pc[t][i]];
            out.commitment[t][i] = res.x[uu[t][i]] > 0.5 ? 1 : 0;
            out.startup[t][i] = res.x[su[t][i]];
            hour_cost +=
                sys.generators[i].energy_price * h.conventional[i] + out.startup[t][i];
        }
        for (int k = 0; k < nw; ++k) h.wind[k] = res.x[pw[t][k]];
        for (int n = 0; n < nn; ++n) h.angle[n] = res.x[th[t][n]];
        h.cost = hour_cost;
    }
    out.cost = res.objective;
    return out;
}

UcMarketOutcome evaluate_sequential_uc(const SystemCase& sys, const ScenarioSet& scenarios,
                                       const ReserveRequirements& req, int horizon,
                                       const SolverConfig& cfg, int threads) {
    if (horizon <= 0) throw InputError("horizon must be positive");
    UcMarketOutcome out;
    out.requirements = req;
    // the reserve stage has no hourly data: one clearing serves every hour
    out.reserve = clear_reserve(sys, req, cfg);
    std::vector<ReserveSchedule> hourly(horizon, out.reserve);
    out.day_ahead = clear_day_ahead_uc(sys, hourly, cfg);

    const int ns = scenarios.num_scenarios();
    const int nw = scenarios.num_farms();
    out.real_time.assign(horizon, std::vector<RealTimeDispatch>(ns));
    std::vector<SystemCase> hcase;
    hcase.reserve(horizon);
    for (int t = 0; t < horizon; ++t) hcase.push_back(hourly_case(sys, t));
    parallel_for(horizon * ns, threads, [&](int idx) {
        int t = idx / ns, w = idx % ns;
        double wf = profile_factor(sys.wind_profile, t);
        std::vector<double> outcome(nw);
        for (int k = 0; k < nw; ++k)
            outcome[k] = scaled_wind(sys.wind_farms[k], scenarios.outcome[k][w], wf);
        out.real_time[t][w] =
            clear_real_time(hcase[t], out.reserve, out.day_ahead.hour[t], outcome, cfg);
    });

    out.cost.reserve = out.reserve.cost * horizon;
    out.cost.day_ahead = out.day_ahead.cost;
    double ert = 0.0;
    for (int t = 0; t < horizon; ++t)
        for (int w = 0; w < ns; ++w)
            ert += scenarios.probability[w] * out.real_time[t][w].cost;
    out.cost.real_time_expected = ert;
    out.cost.total = out.cost.reserve + out.cost.day_ahead + out.cost.real_time_expected;
    return out;
}

} // namespace resdim
