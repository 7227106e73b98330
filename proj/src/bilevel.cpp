#include "resdim/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resdim/errors.hpp"
#include "resdim/market.hpp"
#include "resdim/validate.hpp"
#include "kkt.hpp"

namespace resdim {

namespace detail {

void append_stage_kkt(MixedIntegerProgram& mip, const SystemCase& sys,
                      const StochasticLayout& lay, KktHandles& h, KktSystem& kkt) {
    if (sys.has_uc_data())
        throw InputError("requirement dimensioning needs convex stage problems; "
                         "strip the commitment data first");
    h.lay = lay;
    LinearProgram& lp = mip.lp;

    // Shared dual-side big-M: no stage price can exceed the co-optimization's
    // total absolute objective weight plus the lost-load price. Closed form
    // from the case data so every program over this system prices pairs alike.
    double dual_m = sys.voll * (1.0 + static_cast<double>(sys.loads.size()));
    for (const auto& g : sys.generators)
        dual_m += std::abs(g.up_reserve_price) + std::abs(g.down_reserve_price) +
                  3.0 * std::abs(g.energy_price);

    auto dual = [&](const std::string& name, bool free_sign) {
        int j = lp.add_variable(name, free_sign ? -kInf : 0.0, kInf, 0.0);
        kkt.duals.push_back(j);
        return j;
    };
    auto slack = [&](const std::string& name) { return lp.add_variable(name, 0.0, kInf, 0.0); };

    // --- dual columns, in the order documented on KktSystem::duals ---
    h.sigma_u.resize(lay.nz);
    h.sigma_d.resize(lay.nz);
    for (int z = 0; z < lay.nz; ++z) h.sigma_u[z] = dual("dl_du_" + sys.zones[z], true);
    for (int z = 0; z < lay.nz; ++z) h.sigma_d[z] = dual("dl_dd_" + sys.zones[z], true);
    h.mu.resize(lay.ng);
    h.phi_u_lo.resize(lay.ng);
    h.phi_u_hi.resize(lay.ng);
    h.phi_d_lo.resize(lay.ng);
    h.phi_d_hi.resize(lay.ng);
    for (int i = 0; i < lay.ng; ++i) h.mu[i] = dual("dl_cap_" + sys.generators[i].id, false);
    for (int i = 0; i < lay.ng; ++i) {
        const std::string& id = sys.generators[i].id;
        h.phi_u_lo[i] = dual("dl_lb_ru_" + id, false);
        h.phi_u_hi[i] = dual("dl_ub_ru_" + id, false);
        h.phi_d_lo[i] = dual("dl_lb_rd_" + id, false);
        h.phi_d_hi[i] = dual("dl_ub_rd_" + id, false);
    }
    h.eta_hi.resize(lay.ng);
    h.eta_lo.resize(lay.ng);
    for (int i = 0; i < lay.ng; ++i) h.eta_hi[i] = dual("dl_hi_" + sys.generators[i].id, false);
    for (int i = 0; i < lay.ng; ++i) h.eta_lo[i] = dual("dl_lo_" + sys.generators[i].id, false);
    h.lambda.resize(lay.nn);
    for (int n = 0; n < lay.nn; ++n) h.lambda[n] = dual("dl_bal_" + sys.nodes[n].id, true);
    h.kappa_hi.resize(lay.nli);
    h.kappa_lo.resize(lay.nli);
    for (int l = 0; l < lay.nli; ++l) {
        h.kappa_hi[l] = dual("dl_fhi_" + sys.lines[l].id, false);
        h.kappa_lo[l] = dual("dl_flo_" + sys.lines[l].id, false);
    }
    const NetworkComponents comps = network_components(sys);
    h.tau.resize(lay.nc);
    for (int c = 0; c < lay.nc; ++c)
        h.tau[c] = dual("dl_ref_" + sys.nodes[comps.reference[c]].id, true);
    h.xi_lo.resize(lay.nw);
    h.xi_hi.resize(lay.nw);
    for (int k = 0; k < lay.nw; ++k) {
        const std::string& id = sys.wind_farms[k].id;
        h.xi_lo[k] = dual("dl_lb_pw_" + id, false);
        h.xi_hi[k] = dual("dl_ub_pw_" + id, false);
    }

    // --- slack columns ---
    h.s_cap.resize(lay.ng);
    h.s_ru_hi.resize(lay.ng);
    h.s_rd_hi.resize(lay.ng);
    h.s_hi.resize(lay.ng);
    h.s_lo.resize(lay.ng);
    for (int i = 0; i < lay.ng; ++i) {
        const std::string& id = sys.generators[i].id;
        h.s_cap[i] = slack("sl_cap_" + id);
        h.s_ru_hi[i] = slack("sl_ub_ru_" + id);
        h.s_rd_hi[i] = slack("sl_ub_rd_" + id);
        h.s_hi[i] = slack("sl_hi_" + id);
        h.s_lo[i] = slack("sl_lo_" + id);
    }
    h.s_pw_hi.resize(lay.nw);
    for (int k = 0; k < lay.nw; ++k) h.s_pw_hi[k] = slack("sl_ub_pw_" + sys.wind_farms[k].id);
    h.s_fhi.resize(lay.nli);
    h.s_flo.resize(lay.nli);
    for (int l = 0; l < lay.nli; ++l) {
        h.s_fhi[l] = slack("sl_fhi_" + sys.lines[l].id);
        h.s_flo[l] = slack("sl_flo_" + sys.lines[l].id);
    }

    // --- slack-definition rows (primal feasibility with explicit slacks) ---
    auto feas = [&](const std::string& name, double rhs,
                    std::vector<std::pair<int, double>> coeffs) {
        kkt.feasibility.push_back(lp.add_row(name, RowSense::Equal, rhs, std::move(coeffs)));
    };
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        feas("fs_cap_" + g.id, g.capacity,
             {{lay.ru(i), 1.0}, {lay.rd(i), 1.0}, {h.s_cap[i], 1.0}});
        feas("fs_ub_ru_" + g.id, g.up_reserve_cap, {{lay.ru(i), 1.0}, {h.s_ru_hi[i], 1.0}});
        feas("fs_ub_rd_" + g.id, g.down_reserve_cap, {{lay.rd(i), 1.0}, {h.s_rd_hi[i], 1.0}});
        feas("fs_hi_" + g.id, g.capacity,
             {{lay.pc(i), 1.0}, {lay.ru(i), 1.0}, {h.s_hi[i], 1.0}});
        feas("fs_lo_" + g.id, 0.0, {{lay.pc(i), 1.0}, {lay.rd(i), -1.0}, {h.s_lo[i], -1.0}});
    }
    for (int k = 0; k < lay.nw; ++k)
        feas("fs_ub_pw_" + sys.wind_farms[k].id, sys.wind_farms[k].expected_output,
             {{lay.pw(k), 1.0}, {h.s_pw_hi[k], 1.0}});
    for (int l = 0; l < lay.nli; ++l) {
        const auto& line = sys.lines[l];
        const double b = 1.0 / line.reactance;
        feas("fs_fhi_" + line.id, line.capacity,
             {{lay.th(line.from), b}, {lay.th(line.to), -b}, {h.s_fhi[l], 1.0}});
        feas("fs_flo_" + line.id, -line.capacity,
             {{lay.th(line.from), b}, {lay.th(line.to), -b}, {h.s_flo[l], -1.0}});
    }

    // --- stationarity rows, one per lower-stage variable ---
    // Convention: sum over the stage's rows of sign(sense) * coeff * dual,
    // plus upper-bound dual minus lower-bound dual, equals minus the stage
    // cost of the variable (sign(<=) = sign(=) = +1, sign(>=) = -1).
    auto stat = [&](const std::string& name, double rhs,
                    std::vector<std::pair<int, double>> coeffs) {
        kkt.stationarity.push_back(lp.add_row(name, RowSense::Equal, rhs, std::move(coeffs)));
    };
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        const int z = sys.nodes[g.node].zone;
        stat("st_ru_" + g.id, -g.up_reserve_price,
             {{h.sigma_u[z], 1.0}, {h.mu[i], 1.0}, {h.phi_u_hi[i], 1.0}, {h.phi_u_lo[i], -1.0}});
    }
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        const int z = sys.nodes[g.node].zone;
        stat("st_rd_" + g.id, -g.down_reserve_price,
             {{h.sigma_d[z], 1.0}, {h.mu[i], 1.0}, {h.phi_d_hi[i], 1.0}, {h.phi_d_lo[i], -1.0}});
    }
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        stat("st_pc_" + g.id, -g.energy_price,
             {{h.lambda[g.node], 1.0}, {h.eta_hi[i], 1.0}, {h.eta_lo[i], -1.0}});
    }
    for (int k = 0; k < lay.nw; ++k) {
        const auto& f = sys.wind_farms[k];
        stat("st_pw_" + f.id, 0.0,
             {{h.lambda[f.node], 1.0}, {h.xi_hi[k], 1.0}, {h.xi_lo[k], -1.0}});
    }
    {
        std::vector<std::map<int, double>> terms(lay.nn);
        for (int l = 0; l < lay.nli; ++l) {
            const auto& line = sys.lines[l];
            const double b = 1.0 / line.reactance;
            terms[line.from][h.lambda[line.from]] -= b;
            terms[line.from][h.lambda[line.to]] += b;
            terms[line.to][h.lambda[line.to]] -= b;
            terms[line.to][h.lambda[line.from]] += b;
            terms[line.from][h.kappa_hi[l]] += b;
            terms[line.to][h.kappa_hi[l]] -= b;
            terms[line.from][h.kappa_lo[l]] -= b;
            terms[line.to][h.kappa_lo[l]] += b;
        }
        for (int c = 0; c < lay.nc; ++c) terms[comps.reference[c]][h.tau[c]] += 1.0;
        for (int n = 0; n < lay.nn; ++n) {
            std::vector<std::pair<int, double>> coeffs(terms[n].begin(), terms[n].end());
            stat("st_th_" + sys.nodes[n].id, 0.0, std::move(coeffs));
        }
    }

    // --- complementarity couples ---
    // Primal-side big-M carries 5% headroom over the provable slack range so
    // a slack legitimately hitting its range never trips the kernel's audit.
    auto pair = [&](int s, int d, double primal_range) {
        mip.complementarity.push_back({s, d});
        mip.big_m.push_back({std::max(1.05 * primal_range, 1.0), dual_m});
        kkt.pairs.push_back({s, d});
    };
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        pair(h.s_cap[i], h.mu[i], g.capacity);
        pair(lay.ru(i), h.phi_u_lo[i], g.up_reserve_cap);
        pair(h.s_ru_hi[i], h.phi_u_hi[i], g.up_reserve_cap);
        pair(lay.rd(i), h.phi_d_lo[i], g.down_reserve_cap);
        pair(h.s_rd_hi[i], h.phi_d_hi[i], g.down_reserve_cap);
    }
    for (int i = 0; i < lay.ng; ++i) {
        pair(h.s_hi[i], h.eta_hi[i], sys.generators[i].capacity);
        pair(h.s_lo[i], h.eta_lo[i], sys.generators[i].capacity);
    }
    for (int k = 0; k < lay.nw; ++k) {
        pair(lay.pw(k), h.xi_lo[k], sys.wind_farms[k].expected_output);
        pair(h.s_pw_hi[k], h.xi_hi[k], sys.wind_farms[k].expected_output);
    }
    for (int l = 0; l < lay.nli; ++l) {
        pair(h.s_fhi[l], h.kappa_hi[l], 2.0 * sys.lines[l].capacity);
        pair(h.s_flo[l], h.kappa_lo[l], 2.0 * sys.lines[l].capacity);
    }
    if (static_cast<int>(kkt.pairs.size()) != bilevel_pair_count(sys))
        throw SolverError("internal: complementarity census mismatch");
}

std::optional<StageClears> clear_stage_pair(const SystemCase& sys,
                                            const ReserveRequirements& req,
                                            const SolverConfig& cfg) {
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nn = sys.num_nodes();

    StageClears st;
    st.reserve_res = solve_lp(build_reserve_lp(sys, req), cfg);
    if (st.reserve_res.status != SolveStatus::Optimal) return std::nullopt;
    st.reserve.up.assign(st.reserve_res.x.begin(), st.reserve_res.x.begin() + ng);
    st.reserve.down.assign(st.reserve_res.x.begin() + ng, st.reserve_res.x.begin() + 2 * ng);
    st.reserve.cost = st.reserve_res.objective;

    st.day_ahead_res = solve_lp(build_day_ahead_lp(sys, st.reserve), cfg);
    if (st.day_ahead_res.status != SolveStatus::Optimal) return std::nullopt;
    const auto& x = st.day_ahead_res.x;
    st.day_ahead.conventional.assign(x.begin(), x.begin() + ng);
    st.day_ahead.wind.assign(x.begin() + ng, x.begin() + ng + nw);
    st.day_ahead.angle.assign(x.begin() + ng + nw, x.begin() + ng + nw + nn);
    st.day_ahead.cost = st.day_ahead_res.objective;
    return st;
}

void fill_stage_point(std::vector<double>& x, const SystemCase& sys, const KktHandles& h,
                      const StageClears& st) {
    const StochasticLayout& lay = h.lay;
    const ReserveSchedule& sched = st.reserve;
    const DayAheadSchedule& da = st.day_ahead;
    const SolveResult& rres = st.reserve_res;
    const SolveResult& dres = st.day_ahead_res;

    for (int i = 0; i < lay.ng; ++i) {
        x[lay.ru(i)] = sched.up[i];
        x[lay.rd(i)] = sched.down[i];
    }
    // requirement columns as the zonal sums actually procured (exact rows)
    for (int z = 0; z < lay.nz; ++z) x[lay.du(z)] = x[lay.dd(z)] = 0.0;
    for (int i = 0; i < lay.ng; ++i) {
        const int z = sys.nodes[sys.generators[i].node].zone;
        x[lay.du(z)] += sched.up[i];
        x[lay.dd(z)] += sched.down[i];
    }
    for (int i = 0; i < lay.ng; ++i) x[lay.pc(i)] = da.conventional[i];
    for (int k = 0; k < lay.nw; ++k) x[lay.pw(k)] = da.wind[k];
    for (int n = 0; n < lay.nn; ++n) x[lay.th(n)] = da.angle[n];

    // Stage duals: equality and <= rows map to minus the solver dual, >= rows
    // to plus; bound duals come from reduced-cost splits.
    auto pos = [](double v) { return std::max(0.0, v); };
    for (int z = 0; z < lay.nz; ++z) {
        x[h.sigma_u[z]] = -rres.duals[z];
        x[h.sigma_d[z]] = -rres.duals[lay.nz + z];
    }
    for (int i = 0; i < lay.ng; ++i) {
        x[h.mu[i]] = pos(-rres.duals[2 * lay.nz + i]);
        x[h.phi_u_lo[i]] = pos(rres.reduced_costs[i]);
        x[h.phi_u_hi[i]] = pos(-rres.reduced_costs[i]);
        x[h.phi_d_lo[i]] = pos(rres.reduced_costs[lay.ng + i]);
        x[h.phi_d_hi[i]] = pos(-rres.reduced_costs[lay.ng + i]);
    }
    for (int n = 0; n < lay.nn; ++n) x[h.lambda[n]] = -dres.duals[n];
    for (int l = 0; l < lay.nli; ++l) {
        x[h.kappa_hi[l]] = pos(-dres.duals[lay.nn + 2 * l]);
        x[h.kappa_lo[l]] = pos(dres.duals[lay.nn + 2 * l + 1]);
    }
    for (int c = 0; c < lay.nc; ++c) x[h.tau[c]] = -dres.duals[lay.nn + 2 * lay.nli + c];
    for (int i = 0; i < lay.ng; ++i) {
        x[h.eta_lo[i]] = pos(dres.reduced_costs[i]);
        x[h.eta_hi[i]] = pos(-dres.reduced_costs[i]);
    }
    for (int k = 0; k < lay.nw; ++k) {
        x[h.xi_lo[k]] = pos(dres.reduced_costs[lay.ng + k]);
        x[h.xi_hi[k]] = pos(-dres.reduced_costs[lay.ng + k]);
    }

    // Slack columns from the primal point.
    for (int i = 0; i < lay.ng; ++i) {
        const auto& g = sys.generators[i];
        x[h.s_cap[i]] = pos(g.capacity - sched.up[i] - sched.down[i]);
        x[h.s_ru_hi[i]] = pos(g.up_reserve_cap - sched.up[i]);
        x[h.s_rd_hi[i]] = pos(g.down_reserve_cap - sched.down[i]);
        x[h.s_hi[i]] = pos(g.capacity - da.conventional[i] - sched.up[i]);
        x[h.s_lo[i]] = pos(da.conventional[i] - sched.down[i]);
    }
    for (int k = 0; k < lay.nw; ++k)
        x[h.s_pw_hi[k]] = pos(sys.wind_farms[k].expected_output - da.wind[k]);
    for (int l = 0; l < lay.nli; ++l) {
        const auto& line = sys.lines[l];
        const double flow = (da.angle[line.from] - da.angle[line.to]) / line.reactance;
        x[h.s_fhi[l]] = pos(line.capacity - flow);
        x[h.s_flo[l]] = pos(flow + line.capacity);
    }
}

} // namespace detail

namespace {

MixedIntegerProgram assemble(const SystemCase& sys, const ScenarioSet& scenarios,
                             detail::KktHandles& h, KktSystem& kkt) {
    const StochasticLayout lay = stochastic_layout(sys, scenarios);
    MixedIntegerProgram mip;
    mip.lp = build_stochastic_lp(sys, scenarios);
    detail::append_stage_kkt(mip, sys, lay, h, kkt);
    return mip;
}

// Seeds a verified incumbent from the sequential pipeline at requirements
// `req`: stage primals, stage duals mapped per the stationarity convention,
// and recourse dispatch per scenario. Returns nothing when a stage clears
// infeasible.
std::optional<std::vector<double>> sequential_point(const SystemCase& sys,
                                                    const ScenarioSet& scenarios,
                                                    const detail::KktHandles& h, int num_vars,
                                                    const ReserveRequirements& req,
                                                    const SolverConfig& cfg) {
    const StochasticLayout& lay = h.lay;
    const auto st = detail::clear_stage_pair(sys, req, cfg);
    if (!st) return std::nullopt;

    std::vector<double> x(num_vars, 0.0);
    detail::fill_stage_point(x, sys, h, *st);

    std::vector<double> outcome(lay.nw);
    for (int w = 0; w < lay.ns; ++w) {
        for (int k = 0; k < lay.nw; ++k) outcome[k] = scenarios.outcome[k][w];
        RealTimeDispatch rt;
        try {
            rt = clear_real_time(sys, st->reserve, st->day_ahead, outcome, cfg);
        } catch (const InfeasibleError&) {
            return std::nullopt;
        } catch (const SolverError&) {
            return std::nullopt;
        }
        for (int i = 0; i < lay.ng; ++i) {
            x[lay.rt_ru(w, i)] = rt.up[i];
            x[lay.rt_rd(w, i)] = rt.down[i];
        }
        for (int j = 0; j < lay.nl; ++j) x[lay.shed(w, j)] = rt.shed[j];
        for (int k = 0; k < lay.nw; ++k) x[lay.spill(w, k)] = rt.spill[k];
        for (int n = 0; n < lay.nn; ++n) x[lay.rt_th(w, n)] = rt.angle[n];
    }
    return x;
}

} // namespace

MixedIntegerProgram assemble_bilevel_milp(const SystemCase& sys, const ScenarioSet& scenarios,
                                          KktSystem* kkt) {
    detail::KktHandles h;
    KktSystem local;
    MixedIntegerProgram mip = assemble(sys, scenarios, h, local);
    if (kkt) *kkt = std::move(local);
    return mip;
}

EnhancedSolution solve_enhanced_requirements(const SystemCase& sys, const ScenarioSet& scenarios,
                                             const SolverConfig& cfg) {
    detail::KktHandles h;
    KktSystem kkt;
    MixedIntegerProgram mip = assemble(sys, scenarios, h, kkt);
    const StochasticLayout& lay = h.lay;

    // Incumbents come from sequential clearings at node requirement values;
    // the cache and budget keep the heuristic from re-solving the pipeline
    // at requirement points it has already visited.
    std::map<std::vector<long long>, bool> tried;
    int budget = 256;
    MilpCallbacks cb;
    cb.candidate =
        [&](const std::vector<double>& xr) -> std::optional<std::vector<double>> {
        if (budget <= 0) return std::nullopt;
        ReserveRequirements req;
        req.up.resize(lay.nz);
        req.down.resize(lay.nz);
        std::vector<long long> key(2 * lay.nz);
        for (int z = 0; z < lay.nz; ++z) {
            req.up[z] = std::max(0.0, xr[lay.du(z)]);
            req.down[z] = std::max(0.0, xr[lay.dd(z)]);
            key[z] = std::llround(req.up[z] * 1e6);
            key[lay.nz + z] = std::llround(req.down[z] * 1e6);
        }
        if (!tried.emplace(std::move(key), true).second) return std::nullopt;
        --budget;
        return sequential_point(sys, scenarios, h, mip.lp.num_vars(), req, cfg);
    };

    SolveResult res = solve_milp(mip, cfg, cb);
    if (res.status == SolveStatus::Infeasible)
        throw InfeasibleError("dimensioning",
                              "no requirement pair yields feasible sequential clearings");
    if (res.status != SolveStatus::Optimal)
        throw SolverError("requirement dimensioning ended with status " +
                          std::string(to_string(res.status)));

    EnhancedSolution sol;
    sol.requirements.up.resize(lay.nz);
    sol.requirements.down.resize(lay.nz);
    for (int z = 0; z < lay.nz; ++z) {
        sol.requirements.up[z] = std::max(0.0, res.x[lay.du(z)]);
        sol.requirements.down[z] = std::max(0.0, res.x[lay.dd(z)]);
    }
    sol.outcome = evaluate_sequential(sys, scenarios, sol.requirements, cfg);
    sol.objective = res.objective;
    sol.bound = res.bound;
    sol.gap = res.gap;
    sol.nodes = res.nodes;
    return sol;
}

} // namespace resdim
