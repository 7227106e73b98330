#include "resdim/stochastic.hpp"

#include <string>
#include <utility>
#include <vector>

#include "resdim/errors.hpp"
#include "resdim/validate.hpp"
#include "network.hpp"
#include "stages.hpp"

namespace resdim {

namespace detail {

void append_first_stage(LinearProgram& lp, const SystemCase& sys, const StochasticLayout& lay) {
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        lp.add_variable("ru_" + g.id, 0.0, g.up_reserve_cap, g.up_reserve_price);
    }
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        lp.add_variable("rd_" + g.id, 0.0, g.down_reserve_cap, g.down_reserve_price);
    }
    for (int z = 0; z < lay.nz; ++z) lp.add_variable("du_" + sys.zones[z], 0.0, kInf, 0.0);
    for (int z = 0; z < lay.nz; ++z) lp.add_variable("dd_" + sys.zones[z], 0.0, kInf, 0.0);
    // pc is constrained by the hi/lo coupling rows alone (its natural range
    // [0, capacity] is implied by them), keeping one multiplier per limit
    for (int i = 0; i < lay.ng; ++i)
        lp.add_variable("pc_" + sys.generators[i].id, -kInf, kInf,
                        sys.generators[i].energy_price);
    for (int k = 0; k < lay.nw; ++k)
        lp.add_variable("pw_" + sys.wind_farms[k].id, 0.0, sys.wind_farms[k].expected_output,
                        0.0);
    for (int n = 0; n < lay.nn; ++n)
        lp.add_variable("th_" + sys.nodes[n].id, -kInf, kInf, 0.0);

    // --- reserve stage rows ---
    for (int z = 0; z < lay.nz; ++z) {
        std::vector<std::pair<int, double>> terms{{lay.du(z), -1.0}};
        for (int i = 0; i < lay.ng; ++i)
            if (sys.nodes[sys.generators[i].node].zone == z) terms.push_back({lay.ru(i), 1.0});
        lp.add_row("du_" + sys.zones[z], RowSense::Equal, 0.0, terms);
    }
    for (int z = 0; z < lay.nz; ++z) {
        std::vector<std::pair<int, double>> terms{{lay.dd(z), -1.0}};
        for (int i = 0; i < lay.ng; ++i)
            if (sys.nodes[sys.generators[i].node].zone == z) terms.push_back({lay.rd(i), 1.0});
        lp.add_row("dd_" + sys.zones[z], RowSense::Equal, 0.0, terms);
    }
    for (int i = 0; i < lay.ng; ++i)
        lp.add_row("cap_" + sys.generators[i].id, RowSense::LessEqual,
                   sys.generators[i].capacity, {{lay.ru(i), 1.0}, {lay.rd(i), 1.0}});

    // --- day-ahead rows ---
    for (int i = 0; i < lay.ng; ++i)
        lp.add_row("hi_" + sys.generators[i].id, RowSense::LessEqual,
                   sys.generators[i].capacity, {{lay.pc(i), 1.0}, {lay.ru(i), 1.0}});
    for (int i = 0; i < lay.ng; ++i)
        lp.add_row("lo_" + sys.generators[i].id, RowSense::GreaterEqual, 0.0,
                   {{lay.pc(i), 1.0}, {lay.rd(i), -1.0}});
    std::vector<int> theta(lay.nn);
    for (int n = 0; n < lay.nn; ++n) theta[n] = lay.th(n);
    std::vector<std::vector<std::pair<int, double>>> injections(lay.nn);
    std::vector<double> rhs(lay.nn, 0.0);
    for (int i = 0; i < lay.ng; ++i)
        injections[sys.generators[i].node].push_back({lay.pc(i), 1.0});
    for (int k = 0; k < lay.nw; ++k)
        injections[sys.wind_farms[k].node].push_back({lay.pw(k), 1.0});
    for (const auto& load : sys.loads) rhs[load.node] += load.demand;
    add_network_rows(lp, sys, theta, injections, rhs, "");
}

void append_rt_block(LinearProgram& lp, const SystemCase& sys, const FirstStageCols& fs,
                     const std::vector<double>& wind, double pi, const std::string& tag) {
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nl = static_cast<int>(sys.loads.size());
    const int nn = sys.num_nodes();

    std::vector<int> rru(ng), rrd(ng), sh(nl), sp(nw), rth(nn);
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        rru[i] = lp.add_variable("rru_" + g.id + tag, 0.0, kInf, pi * g.energy_price);
    }
    for (int i = 0; i < ng; ++i) {
        const auto& g = sys.generators[i];
        rrd[i] = lp.add_variable("rrd_" + g.id + tag, 0.0, kInf, -pi * g.energy_price);
    }
    for (int j = 0; j < nl; ++j)
        sh[j] = lp.add_variable("sh_" + sys.loads[j].id + tag, 0.0, sys.loads[j].demand,
                                pi * sys.voll);
    for (int k = 0; k < nw; ++k)
        sp[k] = lp.add_variable("sp_" + sys.wind_farms[k].id + tag, 0.0, wind[k], 0.0);
    for (int n = 0; n < nn; ++n)
        rth[n] = lp.add_variable("rth_" + sys.nodes[n].id + tag, -kInf, kInf, 0.0);

    for (int i = 0; i < ng; ++i)
        lp.add_row("depu_" + sys.generators[i].id + tag, RowSense::LessEqual, 0.0,
                   {{rru[i], 1.0}, {fs.ru[i], -1.0}});
    for (int i = 0; i < ng; ++i)
        lp.add_row("depd_" + sys.generators[i].id + tag, RowSense::LessEqual, 0.0,
                   {{rrd[i], 1.0}, {fs.rd[i], -1.0}});
    std::vector<std::vector<std::pair<int, double>>> injections(nn);
    std::vector<double> rhs(nn, 0.0);
    for (int i = 0; i < ng; ++i) {
        int n = sys.generators[i].node;
        injections[n].push_back({rru[i], 1.0});
        injections[n].push_back({rrd[i], -1.0});
    }
    for (int k = 0; k < nw; ++k) {
        int n = sys.wind_farms[k].node;
        injections[n].push_back({fs.pw[k], -1.0});
        injections[n].push_back({sp[k], -1.0});
        rhs[n] -= wind[k];
    }
    for (int j = 0; j < nl; ++j) injections[sys.loads[j].node].push_back({sh[j], 1.0});
    // deviation flows: the day-ahead angles enter with the opposite sign
    for (const auto& line : sys.lines) {
        double b = 1.0 / line.reactance;
        injections[line.from].push_back({fs.th[line.from], b});
        injections[line.from].push_back({fs.th[line.to], -b});
        injections[line.to].push_back({fs.th[line.to], b});
        injections[line.to].push_back({fs.th[line.from], -b});
    }
    add_network_rows(lp, sys, rth, injections, rhs, tag);
}

} // namespace detail

StochasticLayout stochastic_layout(const SystemCase& sys, const ScenarioSet& scenarios) {
    StochasticLayout lay;
    lay.ng = static_cast<int>(sys.generators.size());
    lay.nw = static_cast<int>(sys.wind_farms.size());
    lay.nl = static_cast<int>(sys.loads.size());
    lay.nn = sys.num_nodes();
    lay.nz = sys.num_zones();
    lay.nli = static_cast<int>(sys.lines.size());
    lay.nc = static_cast<int>(network_components(sys).reference.size());
    lay.ns = scenarios.num_scenarios();
    lay.v_rt = 3 * lay.ng + 2 * lay.nz + lay.nw + lay.nn;
    lay.v_per = 2 * lay.ng + lay.nl + lay.nw + lay.nn;
    lay.r_rt = 2 * lay.nz + 3 * lay.ng + lay.nn + 2 * lay.nli + lay.nc;
    lay.r_per = 2 * lay.ng + lay.nn + 2 * lay.nli + lay.nc;
    return lay;
}

LinearProgram build_stochastic_lp(const SystemCase& sys, const ScenarioSet& scenarios) {
    const StochasticLayout lay = stochastic_layout(sys, scenarios);
    LinearProgram lp;
    detail::append_first_stage(lp, sys, lay);

    detail::FirstStageCols fs;
    fs.ru.resize(lay.ng);
    fs.rd.resize(lay.ng);
    fs.pw.resize(lay.nw);
    fs.th.resize(lay.nn);
    for (int i = 0; i < lay.ng; ++i) fs.ru[i] = lay.ru(i);
    for (int i = 0; i < lay.ng; ++i) fs.rd[i] = lay.rd(i);
    for (int k = 0; k < lay.nw; ++k) fs.pw[k] = lay.pw(k);
    for (int n = 0; n < lay.nn; ++n) fs.th[n] = lay.th(n);

    std::vector<double> wind(lay.nw);
    for (int w = 0; w < lay.ns; ++w) {
        for (int k = 0; k < lay.nw; ++k) wind[k] = scenarios.outcome[k][w];
        detail::append_rt_block(lp, sys, fs, wind, scenarios.probability[w],
                                "_" + scenarios.scenario_ids[w]);
    }
    return lp;
}

StochasticSolution solve_stochastic_dispatch(const SystemCase& sys, const ScenarioSet& scenarios,
                                             const SolverConfig& cfg) {
    const StochasticLayout lay = stochastic_layout(sys, scenarios);
    LinearProgram lp = build_stochastic_lp(sys, scenarios);
    SolveResult res = solve_lp(lp, cfg);
    if (res.status == SolveStatus::Infeasible)
        throw InfeasibleError("stochastic",
                              "co-optimized dispatch is infeasible: demand cannot be served "
                              "even with requirements free");
    if (res.status != SolveStatus::Optimal)
        throw SolverError("co-optimized dispatch solve ended with status " +
                          std::string(to_string(res.status)));

    StochasticSolution sol;
    auto& out = sol.outcome;
    sol.requirements.up.resize(lay.nz);
    sol.requirements.down.resize(lay.nz);
    for (int z = 0; z < lay.nz; ++z) {
        sol.requirements.up[z] = res.x[lay.du(z)];
        sol.requirements.down[z] = res.x[lay.dd(z)];
    }
    out.requirements = sol.requirements;

    out.reserve.up.resize(lay.ng);
    out.reserve.down.resize(lay.ng);
    out.reserve.cost = 0.0;
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        out.reserve.up[i] = res.x[lay.ru(i)];
        out.reserve.down[i] = res.x[lay.rd(i)];
        out.reserve.cost +=
            g.up_reserve_price * out.reserve.up[i] + g.down_reserve_price * out.reserve.down[i];
    }

    out.day_ahead.conventional.resize(lay.ng);
    out.day_ahead.wind.resize(lay.nw);
    out.day_ahead.angle.resize(lay.nn);
    out.day_ahead.cost = 0.0;
    for (int i = 0; i < lay.ng; ++i) {
        out.day_ahead.conventional[i] = res.x[lay.pc(i)];
        out.day_ahead.cost += sys.generators[i].energy_price * out.day_ahead.conventional[i];
    }
    for (int k = 0; k < lay.nw; ++k) out.day_ahead.wind[k] = res.x[lay.pw(k)];
    for (int n = 0; n < lay.nn; ++n) out.day_ahead.angle[n] = res.x[lay.th(n)];

    out.real_time.resize(lay.ns);
    double expected = 0.0;
    for (int w = 0; w < lay.ns; ++w) {
        auto& rt = out.real_time[w];
        rt.up.resize(lay.ng);
        rt.down.resize(lay.ng);
        rt.shed.resize(lay.nl);
        rt.spill.resize(lay.nw);
        rt.angle.resize(lay.nn);
        rt.cost = 0.0;
        for (int i = 0; i < lay.ng; ++i) {
            rt.up[i] = res.x[lay.rt_ru(w, i)];
            rt.down[i] = res.x[lay.rt_rd(w, i)];
            rt.cost += sys.generators[i].energy_price * (rt.up[i] - rt.down[i]);
        }
        for (int j = 0; j < lay.nl; ++j) {
            rt.shed[j] = res.x[lay.shed(w, j)];
            rt.cost += sys.voll * rt.shed[j];
        }
        for (int k = 0; k < lay.nw; ++k) rt.spill[k] = res.x[lay.spill(w, k)];
        for (int n = 0; n < lay.nn; ++n) rt.angle[n] = res.x[lay.rt_th(w, n)];
        expected += scenarios.probability[w] * rt.cost;
    }

    out.cost.reserve = out.reserve.cost;
    out.cost.day_ahead = out.day_ahead.cost;
    out.cost.real_time_expected = expected;
    out.cost.total = out.cost.reserve + out.cost.day_ahead + out.cost.real_time_expected;
    return sol;
}

ReserveRequirements requirements_from_stochastic(const SystemCase& sys,
                                                 const ScenarioSet& scenarios,
                                                 const SolverConfig& cfg) {
    return solve_stochastic_dispatch(sys, scenarios, cfg).requirements;
}

} // namespace resdim
