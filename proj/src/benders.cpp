#include "resdim/benders.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "resdim/errors.hpp"
#include "resdim/market.hpp"
#include "resdim/stochastic.hpp"
#include "format.hpp"
#include "kkt.hpp"
#include "parallel.hpp"
#include "stages.hpp"

namespace resdim {

namespace {

void check_point_shape(const SystemCase& sys, const FirstStagePoint& p) {
    if (p.up.size() != sys.generators.size() || p.down.size() != sys.generators.size() ||
        p.wind.size() != sys.wind_farms.size() ||
        p.angle.size() != static_cast<size_t>(sys.num_nodes()))
        throw InputError("first-stage point does not match the case dimensions");
}

} // namespace

double cut_value(const BendersCut& cut, const FirstStagePoint& point) {
    double v = cut.cost;
    for (size_t i = 0; i < cut.theta.up.size(); ++i)
        v += cut.theta.up[i] * (point.up[i] - cut.anchor.up[i]);
    for (size_t i = 0; i < cut.theta.down.size(); ++i)
        v += cut.theta.down[i] * (point.down[i] - cut.anchor.down[i]);
    for (size_t k = 0; k < cut.theta.wind.size(); ++k)
        v += cut.theta.wind[k] * (point.wind[k] - cut.anchor.wind[k]);
    for (size_t n = 0; n < cut.theta.angle.size(); ++n)
        v += cut.theta.angle[n] * (point.angle[n] - cut.anchor.angle[n]);
    return v;
}

double benders_alpha_floor(const SystemCase& sys) {
    double floor = 0.0;
    for (const auto& g : sys.generators)
        floor -= std::max(g.energy_price, 0.0) * g.down_reserve_cap;
    return floor;
}

BendersCut benders_subproblem(const SystemCase& sys, const std::vector<double>& wind_outcome,
                              const FirstStagePoint& fixed, const SolverConfig& cfg) {
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_farms.size());
    const int nn = sys.num_nodes();
    check_point_shape(sys, fixed);
    if (wind_outcome.size() != static_cast<size_t>(nw))
        throw InputError("wind outcome does not match the number of farms");

    // First-stage quantities enter as free columns pinned by equality rows so
    // the whole sensitivity lands on those rows' duals rather than on bound
    // reduced costs. Rows come first, in up | down | wind | angle order.
    LinearProgram lp;
    detail::FirstStageCols fs;
    fs.ru.resize(ng);
    fs.rd.resize(ng);
    fs.pw.resize(nw);
    fs.th.resize(nn);
    for (int i = 0; i < ng; ++i)
        fs.ru[i] = lp.add_variable("ru_" + sys.generators[i].id, -kInf, kInf, 0.0);
    for (int i = 0; i < ng; ++i)
        fs.rd[i] = lp.add_variable("rd_" + sys.generators[i].id, -kInf, kInf, 0.0);
    for (int k = 0; k < nw; ++k)
        fs.pw[k] = lp.add_variable("pw_" + sys.wind_farms[k].id, -kInf, kInf, 0.0);
    for (int n = 0; n < nn; ++n)
        fs.th[n] = lp.add_variable("th_" + sys.nodes[n].id, -kInf, kInf, 0.0);
    for (int i = 0; i < ng; ++i)
        lp.add_row("fx_ru_" + sys.generators[i].id, RowSense::Equal, fixed.up[i],
                   {{fs.ru[i], 1.0}});
    for (int i = 0; i < ng; ++i)
        lp.add_row("fx_rd_" + sys.generators[i].id, RowSense::Equal, fixed.down[i],
                   {{fs.rd[i], 1.0}});
    for (int k = 0; k < nw; ++k)
        lp.add_row("fx_pw_" + sys.wind_farms[k].id, RowSense::Equal, fixed.wind[k],
                   {{fs.pw[k], 1.0}});
    for (int n = 0; n < nn; ++n)
        lp.add_row("fx_th_" + sys.nodes[n].id, RowSense::Equal, fixed.angle[n],
                   {{fs.th[n], 1.0}});
    detail::append_rt_block(lp, sys, fs, wind_outcome, 1.0, "");

    const SolveResult res = solve_lp(lp, cfg);
    if (res.status != SolveStatus::Optimal)
        throw SolverError("recourse subproblem ended with status " +
                          std::string(to_string(res.status)));

    BendersCut cut;
    cut.cost = res.objective;
    cut.anchor = fixed;
    cut.theta.up.assign(res.duals.begin(), res.duals.begin() + ng);
    cut.theta.down.assign(res.duals.begin() + ng, res.duals.begin() + 2 * ng);
    cut.theta.wind.assign(res.duals.begin() + 2 * ng, res.duals.begin() + 2 * ng + nw);
    cut.theta.angle.assign(res.duals.begin() + 2 * ng + nw,
                           res.duals.begin() + 2 * ng + nw + nn);
    return cut;
}

BendersProposal benders_master(const SystemCase& sys, const ScenarioSet& scenarios,
                               const BendersState& state, const SolverConfig& cfg) {
    const StochasticLayout lay = stochastic_layout(sys, scenarios);
    detail::KktHandles h;
    KktSystem kkt;
    MixedIntegerProgram mip;
    detail::append_first_stage(mip.lp, sys, lay);
    detail::append_stage_kkt(mip, sys, lay, h, kkt);

    const double floor = benders_alpha_floor(sys);
    std::vector<int> alpha(lay.ns);
    for (int w = 0; w < lay.ns; ++w)
        alpha[w] = mip.lp.add_variable("al_" + scenarios.scenario_ids[w], floor, kInf,
                                       scenarios.probability[w]);
    for (const BendersCut& cut : state.cuts) {
        // alpha_w - theta . vars >= cost - theta . anchor
        std::vector<std::pair<int, double>> coeffs{{alpha[cut.scenario], 1.0}};
        double rhs = cut.cost;
        auto add = [&](int col, double t, double a) {
            if (t == 0.0) return;
            rhs -= t * a;
            coeffs.push_back({col, -t});
        };
        for (int i = 0; i < lay.ng; ++i) add(lay.ru(i), cut.theta.up[i], cut.anchor.up[i]);
        for (int i = 0; i < lay.ng; ++i) add(lay.rd(i), cut.theta.down[i], cut.anchor.down[i]);
        for (int k = 0; k < lay.nw; ++k) add(lay.pw(k), cut.theta.wind[k], cut.anchor.wind[k]);
        for (int n = 0; n < lay.nn; ++n) add(lay.th(n), cut.theta.angle[n], cut.anchor.angle[n]);
        mip.lp.add_row("cut_" + scenarios.scenario_ids[cut.scenario] + "_" +
                           std::to_string(cut.iteration),
                       RowSense::GreaterEqual, rhs, std::move(coeffs));
    }
    const int total_vars = mip.lp.num_vars();

    // Incumbents: sequential clearings at node requirement values, extended
    // with the tightest recourse estimates the cut pool allows there.
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
        const auto st = detail::clear_stage_pair(sys, req, cfg);
        if (!st) return std::nullopt;
        std::vector<double> x(total_vars, 0.0);
        detail::fill_stage_point(x, sys, h, *st);
        FirstStagePoint pt{st->reserve.up, st->reserve.down, st->day_ahead.wind,
                           st->day_ahead.angle};
        for (int w = 0; w < lay.ns; ++w) x[alpha[w]] = floor;
        for (const BendersCut& cut : state.cuts)
            x[alpha[cut.scenario]] = std::max(x[alpha[cut.scenario]], cut_value(cut, pt));
        return x;
    };

    SolveResult res = solve_milp(mip, cfg, cb);
    if (res.status == SolveStatus::Infeasible)
        throw InfeasibleError("dimensioning",
                              "no requirement pair yields feasible sequential clearings");
    if (res.status != SolveStatus::Optimal)
        throw SolverError("requirement master ended with status " +
                          std::string(to_string(res.status)));

    BendersProposal prop;
    prop.objective = res.objective;
    prop.alpha.resize(lay.ns);
    double weighted = 0.0;
    for (int w = 0; w < lay.ns; ++w) {
        prop.alpha[w] = res.x[alpha[w]];
        weighted += scenarios.probability[w] * prop.alpha[w];
    }
    prop.first_stage_cost = res.objective - weighted;
    prop.requirements.up.resize(lay.nz);
    prop.requirements.down.resize(lay.nz);
    for (int z = 0; z < lay.nz; ++z) {
        prop.requirements.up[z] = std::max(0.0, res.x[lay.du(z)]);
        prop.requirements.down[z] = std::max(0.0, res.x[lay.dd(z)]);
    }
    prop.point.up.resize(lay.ng);
    prop.point.down.resize(lay.ng);
    for (int i = 0; i < lay.ng; ++i) {
        prop.point.up[i] = res.x[lay.ru(i)];
        prop.point.down[i] = res.x[lay.rd(i)];
    }
    prop.point.wind.resize(lay.nw);
    for (int k = 0; k < lay.nw; ++k) prop.point.wind[k] = res.x[lay.pw(k)];
    prop.point.angle.resize(lay.nn);
    for (int n = 0; n < lay.nn; ++n) prop.point.angle[n] = res.x[lay.th(n)];
    return prop;
}

BendersSolution benders_solve(const SystemCase& sys, const ScenarioSet& scenarios, double eps,
                              const BendersConfig& options) {
    if (!(eps > 0.0)) throw InputError("convergence tolerance must be positive");
    if (options.max_iterations < 1) throw InputError("iteration cap must be at least one");
    const int ns = static_cast<int>(scenarios.probability.size());
    const int nw = static_cast<int>(sys.wind_farms.size());

    BendersState state;
    state.alpha_floor = benders_alpha_floor(sys);
    BendersProposal prop;
    double best_upper = kInf;

    for (int pass = 1; pass <= options.max_iterations; ++pass) {
        prop = benders_master(sys, scenarios, state, options.solver);

        std::vector<BendersCut> fresh(ns);
        detail::parallel_for(ns, options.threads, [&](int w) {
            std::vector<double> outcome(nw);
            for (int k = 0; k < nw; ++k) outcome[k] = scenarios.outcome[k][w];
            fresh[w] = benders_subproblem(sys, outcome, prop.point, options.solver);
            fresh[w].scenario = w;
            fresh[w].iteration = pass;
        });

        BendersIteration rec;
        rec.iteration = pass;
        rec.master_objective = prop.objective;
        rec.point = prop.point;
        rec.alpha = prop.alpha;
        rec.recourse.resize(ns);
        double estimate_error = 0.0;
        for (int w = 0; w < ns; ++w) {
            rec.recourse[w] = fresh[w].cost;
            rec.expected_recourse += scenarios.probability[w] * fresh[w].cost;
            estimate_error += scenarios.probability[w] * (prop.alpha[w] - fresh[w].cost);
        }
        best_upper = std::min(best_upper, prop.first_stage_cost + rec.expected_recourse);
        rec.upper_bound = best_upper;
        const double raw = std::abs(estimate_error);
        rec.gap = options.absolute_gap ? raw : raw / (1.0 + std::abs(best_upper));
        state.history.push_back(std::move(rec));
        state.iterations = pass;

        if (state.history.back().gap <= eps) {
            state.converged = true;
            break;
        }
        for (BendersCut& cut : fresh) state.cuts.push_back(std::move(cut));
    }
    if (!state.converged)
        throw SolverError("requirement decomposition stopped at the iteration cap (" +
                          std::to_string(options.max_iterations) + " passes) with gap " +
                          detail::format_number(state.history.back().gap));

    BendersSolution sol;
    sol.requirements = prop.requirements;
    sol.objective = prop.objective;
    sol.outcome = evaluate_sequential(sys, scenarios, sol.requirements, options.solver,
                                      options.threads);
    sol.state = std::move(state);
    return sol;
}

void write_benders_log(std::ostream& os, const BendersState& state) {
    os << "iteration,master_objective,expected_recourse,upper_bound,gap\n";
    for (const BendersIteration& it : state.history)
        os << it.iteration << ',' << detail::format_number(it.master_objective) << ','
           << detail::format_number(it.expected_recourse) << ','
           << detail::format_number(it.upper_bound) << ',' << detail::format_number(it.gap)
           << '\n';
}

} // namespace resdim
