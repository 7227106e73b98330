#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>
#include "resdim/bilevel.hpp"
#include "resdim/errors.hpp"
#include "resdim/market.hpp"
#include "resdim/stochastic.hpp"
#include "resdim/validate.hpp"
#include "test_fixtures.hpp"

using namespace resdim;
using namespace resdim::test;
using doctest::Approx;

namespace {

double activity(const LinearProgram& lp, const std::vector<double>& x, int r) {
    double acc = 0.0;
    for (auto [j, c] : lp.rows[r].coeffs) acc += c * x[j];
    return acc;
}

MixedIntegerProgram pin_requirements(const MixedIntegerProgram& mip, const StochasticLayout& lay,
                                     const ReserveRequirements& req) {
    MixedIntegerProgram fixed = mip;
    for (int z = 0; z < lay.nz; ++z) {
        fixed.lp.lower[lay.du(z)] = fixed.lp.upper[lay.du(z)] = req.up[z];
        fixed.lp.lower[lay.dd(z)] = fixed.lp.upper[lay.dd(z)] = req.down[z];
    }
    return fixed;
}

} // namespace

TEST_CASE("dimensioning program census on the two-node system") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    KktSystem kkt;
    MixedIntegerProgram mip = assemble_bilevel_milp(sys, scen, &kkt);
    const StochasticLayout lay = stochastic_layout(sys, scen);

    CHECK(bilevel_pair_count(sys) == 18);
    CHECK(mip.complementarity.size() == 18);
    CHECK(mip.big_m.size() == 18);
    CHECK(kkt.pairs.size() == 18);
    // Lower bounds at zero couple the dual with the primal column itself, so
    // only the 13 remaining inequalities need an explicit slack + definition row.
    CHECK(kkt.feasibility.size() == 13);
    CHECK(kkt.duals.size() == 23);       // 18 inequality duals + 5 free equality duals
    CHECK(kkt.stationarity.size() == 9); // ru, rd, pc per generator; pw; th per node
    CHECK(mip.binaries.empty());
    CHECK(mip.lp.num_vars() == lay.num_vars() + 23 + 13); // duals + slacks
    CHECK(mip.lp.num_rows() == lay.num_rows() + 13 + 9);  // slack defs + stationarity

    CHECK(mip.lp.var_names[kkt.duals[0]] == "dl_du_z1");
    CHECK(mip.lp.var_names[kkt.duals[4]] == "dl_lb_ru_g1");
    CHECK(mip.lp.var_names[kkt.duals[16]] == "dl_bal_n1");
    CHECK(mip.lp.var_names[kkt.duals[22]] == "dl_ub_pw_w1");
    CHECK(mip.lp.var_names[kkt.pairs[0].first] == "sl_cap_g1");
    CHECK(mip.lp.var_names[kkt.pairs[1].first] == "ru_g1"); // lb couple reuses the column

    for (auto [a, b] : mip.complementarity) {
        CHECK(mip.lp.lower[a] == 0.0);
        CHECK(mip.lp.lower[b] == 0.0);
    }
    for (auto [ma, mb] : mip.big_m) {
        CHECK(ma > 0.0);
        CHECK(mb > 0.0);
    }

    CHECK_THROWS_AS(assemble_bilevel_milp(micro_uc_case(), scen), InputError);
}

TEST_CASE("relaxed dimensioning program reproduces the co-optimized bound") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    MixedIntegerProgram mip = assemble_bilevel_milp(sys, scen);
    SolveResult rel = solve_lp(mip.lp);
    REQUIRE(rel.status == SolveStatus::Optimal);
    double ideal = solve_stochastic_dispatch(sys, scen).outcome.cost.total;
    CHECK(rel.objective == Approx(ideal).epsilon(1e-7));
}

TEST_CASE("requirement-pinned program matches the sequential pipeline") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    KktSystem kkt;
    MixedIntegerProgram mip = assemble_bilevel_milp(sys, scen, &kkt);
    const StochasticLayout lay = stochastic_layout(sys, scen);

    const double pts[5][2] = {{0, 0}, {20, 0}, {40, 15}, {60, 30}, {80, 0}};
    for (const auto& p : pts) {
        CAPTURE(p[0]);
        CAPTURE(p[1]);
        ReserveRequirements req{{p[0]}, {p[1]}};
        SolveResult res = solve_milp(pin_requirements(mip, lay, req));
        REQUIRE(res.status == SolveStatus::Optimal);
        MarketOutcome seq = evaluate_sequential(sys, scen, req);
        CHECK(res.objective == Approx(seq.cost.total).epsilon(1e-6));

        // stage-cost fidelity: the embedded blocks price like fresh clearings
        double rcost = 0.0, dcost = 0.0;
        for (int i = 0; i < lay.ng; ++i) {
            rcost += sys.generators[i].up_reserve_price * res.x[lay.ru(i)] +
                     sys.generators[i].down_reserve_price * res.x[lay.rd(i)];
            dcost += sys.generators[i].energy_price * res.x[lay.pc(i)];
        }
        CHECK(rcost == Approx(seq.reserve.cost).epsilon(1e-6));
        CHECK(dcost == Approx(seq.day_ahead.cost).epsilon(1e-6));

        // first-order rows hold and every couple excludes
        for (int r : kkt.stationarity)
            CHECK(std::abs(activity(mip.lp, res.x, r) - mip.lp.rows[r].rhs) <=
                  1e-6 * (1.0 + std::abs(mip.lp.rows[r].rhs)));
        for (auto [a, b] : kkt.pairs) CHECK(res.x[a] * res.x[b] <= 1e-6);
    }

    // an uncoverable requirement leaves the pinned program infeasible, the
    // same way the staged pipeline reports it
    ReserveRequirements over{{90.0}, {0.0}};
    CHECK(solve_milp(pin_requirements(mip, lay, over)).status == SolveStatus::Infeasible);
    CHECK_THROWS_AS(evaluate_sequential(sys, scen, over), InfeasibleError);
}

TEST_CASE("documented dual mapping satisfies the appended system at a sequential point") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    KktSystem kkt;
    MixedIntegerProgram mip = assemble_bilevel_milp(sys, scen, &kkt);
    const StochasticLayout lay = stochastic_layout(sys, scen);
    const ReserveRequirements req{{60.0}, {10.0}}; // interior point, stage duals unique

    SolveResult r1 = solve_lp(build_reserve_lp(sys, req));
    REQUIRE(r1.status == SolveStatus::Optimal);
    ReserveSchedule sched;
    sched.up = {r1.x[0], r1.x[1]};
    sched.down = {r1.x[2], r1.x[3]};
    sched.cost = r1.objective;

    SolveResult r2 = solve_lp(build_day_ahead_lp(sys, sched));
    REQUIRE(r2.status == SolveStatus::Optimal);
    DayAheadSchedule da;
    da.conventional = {r2.x[0], r2.x[1]};
    da.wind = {r2.x[2]};
    da.angle = {r2.x[3], r2.x[4]};
    da.cost = r2.objective;

    std::vector<double> x(mip.lp.num_vars(), 0.0);
    for (int i = 0; i < 2; ++i) {
        x[lay.ru(i)] = sched.up[i];
        x[lay.rd(i)] = sched.down[i];
        x[lay.pc(i)] = da.conventional[i];
    }
    x[lay.du(0)] = req.up[0];
    x[lay.dd(0)] = req.down[0];
    x[lay.pw(0)] = da.wind[0];
    for (int n = 0; n < 2; ++n) x[lay.th(n)] = da.angle[n];
    for (int w = 0; w < lay.ns; ++w) {
        RealTimeDispatch rt = clear_real_time(sys, sched, da, {scen.outcome[0][w]});
        for (int i = 0; i < 2; ++i) {
            x[lay.rt_ru(w, i)] = rt.up[i];
            x[lay.rt_rd(w, i)] = rt.down[i];
        }
        x[lay.shed(w, 0)] = rt.shed[0];
        x[lay.spill(w, 0)] = rt.spill[0];
        for (int n = 0; n < 2; ++n) x[lay.rt_th(w, n)] = rt.angle[n];
    }

    // stage duals, mapped per the stationarity convention: minus the solver
    // dual on = and <= rows, plus on >= rows, reduced-cost splits on bounds
    auto pos = [](double v) { return std::max(0.0, v); };
    int d = 0;
    x[kkt.duals[d++]] = -r1.duals[0]; // du_z1
    x[kkt.duals[d++]] = -r1.duals[1]; // dd_z1
    for (int i = 0; i < 2; ++i) x[kkt.duals[d++]] = pos(-r1.duals[2 + i]); // cap_i
    for (int i = 0; i < 2; ++i) {
        x[kkt.duals[d++]] = pos(r1.reduced_costs[i]);      // ru lower bound
        x[kkt.duals[d++]] = pos(-r1.reduced_costs[i]);     // ru upper bound
        x[kkt.duals[d++]] = pos(r1.reduced_costs[2 + i]);  // rd lower bound
        x[kkt.duals[d++]] = pos(-r1.reduced_costs[2 + i]); // rd upper bound
    }
    for (int i = 0; i < 2; ++i) x[kkt.duals[d++]] = pos(-r2.reduced_costs[i]); // hi_i
    for (int i = 0; i < 2; ++i) x[kkt.duals[d++]] = pos(r2.reduced_costs[i]);  // lo_i
    for (int n = 0; n < 2; ++n) x[kkt.duals[d++]] = -r2.duals[n];              // bal_n
    x[kkt.duals[d++]] = pos(-r2.duals[2]);         // fhi_l1
    x[kkt.duals[d++]] = pos(r2.duals[3]);          // flo_l1
    x[kkt.duals[d++]] = -r2.duals[4];              // ref_n1
    x[kkt.duals[d++]] = pos(r2.reduced_costs[2]);  // pw lower bound
    x[kkt.duals[d++]] = pos(-r2.reduced_costs[2]); // pw upper bound
    REQUIRE(d == static_cast<int>(kkt.duals.size()));

    // slack columns, by the documented couple order
    int q = 0;
    for (int i = 0; i < 2; ++i) {
        const auto& g = sys.generators[i];
        x[kkt.pairs[q++].first] = g.capacity - sched.up[i] - sched.down[i];
        ++q; // ru lower-bound couple reuses the ru column
        x[kkt.pairs[q++].first] = g.up_reserve_cap - sched.up[i];
        ++q; // rd lower-bound couple
        x[kkt.pairs[q++].first] = g.down_reserve_cap - sched.down[i];
    }
    for (int i = 0; i < 2; ++i) {
        const auto& g = sys.generators[i];
        x[kkt.pairs[q++].first] = g.capacity - da.conventional[i] - sched.up[i];
        x[kkt.pairs[q++].first] = da.conventional[i] - sched.down[i];
    }
    ++q; // pw lower-bound couple
    x[kkt.pairs[q++].first] = sys.wind_farms[0].expected_output - da.wind[0];
    const double flow = (da.angle[0] - da.angle[1]) / sys.lines[0].reactance;
    x[kkt.pairs[q++].first] = sys.lines[0].capacity - flow;
    x[kkt.pairs[q++].first] = flow + sys.lines[0].capacity;
    REQUIRE(q == static_cast<int>(kkt.pairs.size()));

    // the assembled point satisfies every row, bound, and couple
    for (int j = 0; j < mip.lp.num_vars(); ++j) {
        if (mip.lp.lower[j] != -kInf) CHECK(x[j] >= mip.lp.lower[j] - 1e-9);
        if (mip.lp.upper[j] != kInf) CHECK(x[j] <= mip.lp.upper[j] + 1e-9);
    }
    for (int r = 0; r < mip.lp.num_rows(); ++r) {
        const auto& row = mip.lp.rows[r];
        const double act = activity(mip.lp, x, r);
        const double tol = 1e-6 * (1.0 + std::abs(row.rhs));
        CAPTURE(row.name);
        if (row.sense == RowSense::LessEqual) CHECK(act <= row.rhs + tol);
        if (row.sense == RowSense::GreaterEqual) CHECK(act >= row.rhs - tol);
        if (row.sense == RowSense::Equal) CHECK(std::abs(act - row.rhs) <= tol);
    }
    for (auto [a, b] : kkt.pairs) CHECK(x[a] * x[b] <= 1e-7);

    double obj = 0.0;
    for (int j = 0; j < mip.lp.num_vars(); ++j) obj += mip.lp.objective[j] * x[j];
    CHECK(obj == Approx(evaluate_sequential(sys, scen, req).cost.total).epsilon(1e-9));
}

TEST_CASE("dimensioning lands on the sequential-market optimum") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    EnhancedSolution sol = solve_enhanced_requirements(sys, scen);

    // Hand solution: a 60 MW down requirement spills past the cheap unit's
    // 40 MW offer cap onto the expensive unit, whose 20 MW down floor lifts
    // its day-ahead dispatch and drops the line flow to 50 MW. That headroom
    // lets the cheap unit's 30 MW up reserve cover the whole deficit
    // scenario, while the surplus scenario refunds at the expensive unit's
    // 30 $/MWh. Totals: 190 reserve + 1100 day-ahead - 200 expected recourse.
    CHECK(sol.objective == Approx(1090.0).epsilon(1e-6));
    CHECK(sol.requirements.up[0] == Approx(30.0).epsilon(1e-4));
    CHECK(sol.requirements.down[0] == Approx(60.0).epsilon(1e-4));
    CHECK(sol.outcome.cost.total == Approx(sol.objective).epsilon(1e-6));
    CHECK(sol.gap <= 1e-5 * (1.0 + std::abs(sol.objective)));
    CHECK(verify_outcome(sys, scen, sol.outcome).empty());

    // no 5 MW grid point beats the program's choice, and the grid minimum
    // (which contains the optimum) matches it exactly
    double best = kInf;
    for (int du = 0; du <= 80; du += 5)
        for (int dd = 0; dd <= 80; dd += 5) {
            ReserveRequirements req{{double(du)}, {double(dd)}};
            best = std::min(best, evaluate_sequential(sys, scen, req).cost.total);
        }
    CHECK(sol.objective <= best + 1e-6 * best);
    CHECK(best == Approx(1090.0).epsilon(1e-9));

    // sandwiched above the co-optimized ideal
    double ideal = solve_stochastic_dispatch(sys, scen).outcome.cost.total;
    CHECK(sol.objective >= ideal - 1e-6 * ideal);
}

TEST_CASE("certain single-node system needs no requirements") {
    SystemCase sys;
    sys.name = "single";
    sys.voll = 1000.0;
    sys.zones = {"z1"};
    sys.nodes = {{"n1", 0}};
    sys.generators = {{"g1", 0, 10.0, 2.0, 1.0, 100.0, 30.0, 30.0, std::nullopt}};
    sys.loads = {{"d1", 0, 50.0}};
    ScenarioSet certain;
    certain.scenario_ids = {"s1"};
    certain.probability = {1.0};

    CHECK(bilevel_pair_count(sys) == 7);
    EnhancedSolution sol = solve_enhanced_requirements(sys, certain);
    CHECK(sol.objective == Approx(500.0).epsilon(1e-9));
    CHECK(sol.requirements.up[0] == Approx(0.0));
    CHECK(sol.requirements.down[0] == Approx(0.0));
    CHECK(sol.outcome.real_time[0].cost == Approx(0.0));
}

TEST_CASE("indicator reformulation agrees with kernel branching") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    SolverConfig cfg;
    cfg.complementarity_big_m = true;
    EnhancedSolution sol = solve_enhanced_requirements(sys, scen, cfg);
    CHECK(sol.objective == Approx(1090.0).epsilon(1e-6));
    CHECK(sol.requirements.up[0] == Approx(30.0).epsilon(1e-4));
    CHECK(sol.requirements.down[0] == Approx(60.0).epsilon(1e-4));
}

TEST_CASE("program dump lists the complementarity couples") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    MixedIntegerProgram mip = assemble_bilevel_milp(sys, scen);
    std::ostringstream oss;
    write_lp_text(oss, mip);
    const std::string text = oss.str();
    CHECK(text.find("complementarity") != std::string::npos);
    CHECK(text.find("sl_cap_g1 * dl_cap_g1 = 0") != std::string::npos);
    CHECK(text.find("st_ru_g1") != std::string::npos);
}
