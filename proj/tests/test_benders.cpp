#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "resdim/benders.hpp"
#include "resdim/bilevel.hpp"
#include "resdim/errors.hpp"
#include "resdim/market.hpp"
#include "resdim/stochastic.hpp"
#include "test_fixtures.hpp"

using namespace resdim;
using doctest::Approx;

namespace {

// One node, one generator, no wind, one scenario: the recourse stage is
// certain and costless, and reserve prices exceed any possible recourse
// saving, so the second pass must reproduce the first proposal exactly.
SystemCase certain_case() {
    SystemCase sys;
    sys.name = "certain";
    sys.voll = 1000.0;
    sys.zones = {"z1"};
    sys.nodes = {{"n1", 0}};
    sys.generators = {{"g1", 0, 10.0, 15.0, 15.0, 100.0, 30.0, 30.0, std::nullopt}};
    sys.loads = {{"d1", 0, 50.0}};
    return sys;
}

ScenarioSet certain_scenarios() {
    ScenarioSet s;
    s.scenario_ids = {"s1"};
    s.probability = {1.0};
    return s;
}

FirstStagePoint stage_point(const ReserveSchedule& sched, const DayAheadSchedule& da) {
    return {sched.up, sched.down, da.wind, da.angle};
}

} // namespace

TEST_CASE("subproblem reproduces the co-optimized recourse per scenario") {
    const SystemCase sys = test::micro_case();
    const ScenarioSet scen = test::micro_scenarios();
    const StochasticSolution ideal = solve_stochastic_dispatch(sys, scen);
    const FirstStagePoint fx = stage_point(ideal.outcome.reserve, ideal.outcome.day_ahead);
    for (int w = 0; w < 2; ++w) {
        const std::vector<double> outcome{scen.outcome[0][w]};
        const BendersCut cut = benders_subproblem(sys, outcome, fx);
        // the co-optimum's recourse block is optimal for its own first stage
        CHECK(cut.cost == Approx(ideal.outcome.real_time[w].cost).epsilon(1e-7));
        CHECK(cut.anchor.up == fx.up);
        CHECK(cut.theta.up.size() == 2);
        CHECK(cut.theta.down.size() == 2);
        CHECK(cut.theta.wind.size() == 1);
        CHECK(cut.theta.angle.size() == 2);
    }
}

TEST_CASE("outcome matching the day-ahead sale needs no recourse") {
    const SystemCase sys = test::micro_case();
    const ReserveRequirements req{{20.0}, {10.0}};
    const ReserveSchedule sched = clear_reserve(sys, req);
    const DayAheadSchedule da = clear_day_ahead(sys, sched);
    const BendersCut cut = benders_subproblem(sys, da.wind, stage_point(sched, da));
    CHECK(cut.cost == Approx(0.0));
    CHECK(cut_value(cut, cut.anchor) == Approx(cut.cost));
}

TEST_CASE("sensitivities sit inside the finite-difference bracket") {
    const SystemCase sys = test::micro_case();
    const ScenarioSet scen = test::micro_scenarios();
    const ReserveRequirements req{{50.0}, {50.0}};
    const ReserveSchedule sched = clear_reserve(sys, req);
    const DayAheadSchedule da = clear_day_ahead(sys, sched);
    const FirstStagePoint fx = stage_point(sched, da);
    const double h = 1.0;

    for (int w = 0; w < 2; ++w) {
        const std::vector<double> outcome{scen.outcome[0][w]};
        const BendersCut cut = benders_subproblem(sys, outcome, fx);
        // convexity of the recourse value puts every valid subgradient between
        // the backward and forward difference quotients
        auto bracket = [&](std::vector<double> FirstStagePoint::* block, int idx, double theta,
                           bool lower_bounded) {
            FirstStagePoint p = fx;
            (p.*block)[idx] += h;
            const double forward = (benders_subproblem(sys, outcome, p).cost - cut.cost) / h;
            CHECK(theta <= forward + 1e-6);
            if (lower_bounded && (fx.*block)[idx] < h) return; // backward probe infeasible
            FirstStagePoint m = fx;
            (m.*block)[idx] -= h;
            const double backward = (cut.cost - benders_subproblem(sys, outcome, m).cost) / h;
            CHECK(theta >= backward - 1e-6);
        };
        for (int i = 0; i < 2; ++i) bracket(&FirstStagePoint::up, i, cut.theta.up[i], true);
        for (int i = 0; i < 2; ++i) bracket(&FirstStagePoint::down, i, cut.theta.down[i], true);
        bracket(&FirstStagePoint::wind, 0, cut.theta.wind[0], false);
        for (int n = 0; n < 2; ++n) bracket(&FirstStagePoint::angle, n, cut.theta.angle[n], false);
    }
}

TEST_CASE("estimate floor equals the largest possible down-regulation credit") {
    CHECK(benders_alpha_floor(test::micro_case()) == Approx(-1600.0).epsilon(1e-12));
    CHECK(benders_alpha_floor(certain_case()) == Approx(-300.0).epsilon(1e-12));
}

TEST_CASE("master without cuts pins every estimate to the floor") {
    const SystemCase sys = test::micro_case();
    const ScenarioSet scen = test::micro_scenarios();
    BendersState state;
    state.alpha_floor = benders_alpha_floor(sys);
    const BendersProposal prop = benders_master(sys, scen, state);
    REQUIRE(prop.alpha.size() == 2);
    CHECK(prop.alpha[0] == Approx(-1600.0).epsilon(1e-9));
    CHECK(prop.alpha[1] == Approx(-1600.0).epsilon(1e-9));
    // cheapest stage-feasible first stage: no requirements, wind plus g1
    CHECK(prop.first_stage_cost == Approx(700.0).epsilon(1e-7));
    CHECK(prop.objective == Approx(-900.0).epsilon(1e-7));
    CHECK(prop.requirements.up[0] == Approx(0.0));
    CHECK(prop.requirements.down[0] == Approx(0.0));
    CHECK(prop.point.wind[0] == Approx(50.0).epsilon(1e-9));
}

TEST_CASE("decomposition agrees with the monolithic dimensioning program") {
    const SystemCase sys = test::micro_case();
    const ScenarioSet scen = test::micro_scenarios();
    const double eps = 1e-6;
    BendersConfig options;
    options.threads = 2;
    const BendersSolution sol = benders_solve(sys, scen, eps, options);

    CHECK(sol.state.converged);
    CHECK(sol.objective == Approx(1090.0).epsilon(1e-6));
    CHECK(sol.requirements.up[0] == Approx(30.0).epsilon(1e-4));
    CHECK(sol.requirements.down[0] == Approx(60.0).epsilon(1e-4));
    CHECK(sol.outcome.cost.total == Approx(sol.objective).epsilon(1e-6));
    CHECK(sol.state.cuts.size() ==
          2 * static_cast<std::size_t>(sol.state.iterations - 1));
    CHECK(sol.state.history.size() == static_cast<std::size_t>(sol.state.iterations));

    const double best = sol.objective;
    double prev_lower = -kInf;
    double prev_upper = kInf;
    for (const BendersIteration& it : sol.state.history) {
        // lower bounds never decrease and never pass the optimum
        CHECK(it.master_objective >= prev_lower - 1e-6 * (1.0 + std::abs(prev_lower)));
        CHECK(it.master_objective <= best + 1e-6 * (1.0 + best));
        // every pass's own total is a valid upper bound, and the incumbent
        // tracks the best of them
        double raw_upper = it.master_objective;
        for (int w = 0; w < 2; ++w)
            raw_upper += scen.probability[w] * (it.recourse[w] - it.alpha[w]);
        CHECK(raw_upper >= best - 1e-6 * (1.0 + best));
        CHECK(it.upper_bound <= prev_upper);
        CHECK(it.alpha[0] >= sol.state.alpha_floor - 1e-9);
        CHECK(it.alpha[1] >= sol.state.alpha_floor - 1e-9);
        prev_lower = it.master_objective;
        prev_upper = it.upper_bound;
    }
    // no accumulated cut excludes the final solution
    const BendersIteration& last = sol.state.history.back();
    for (const BendersCut& cut : sol.state.cuts)
        CHECK(last.alpha[cut.scenario] >=
              cut_value(cut, last.point) - 1e-6 * (1.0 + std::abs(last.alpha[cut.scenario])));
}

TEST_CASE("certain single-scenario case converges on the second pass") {
    const SystemCase sys = certain_case();
    const ScenarioSet scen = certain_scenarios();
    const BendersSolution sol = benders_solve(sys, scen);

    CHECK(sol.state.converged);
    CHECK(sol.state.iterations == 2);
    CHECK(sol.state.cuts.size() == 1);
    CHECK(sol.state.history.back().expected_recourse == Approx(0.0));
    CHECK(sol.objective == Approx(500.0).epsilon(1e-9));
    CHECK(sol.requirements.up[0] == Approx(0.0));
    CHECK(sol.requirements.down[0] == Approx(0.0));
    CHECK(sol.outcome.cost.total == Approx(500.0).epsilon(1e-9));

    std::ostringstream os;
    write_benders_log(os, sol.state);
    int lines = 0;
    for (char c : os.str())
        if (c == '\n') ++lines;
    CHECK(lines == 1 + sol.state.iterations);
}

TEST_CASE("iteration log is one delimited record per pass") {
    BendersState st;
    BendersIteration a;
    a.iteration = 1;
    a.master_objective = -100.0;
    a.expected_recourse = 0.0;
    a.upper_bound = 200.0;
    a.gap = 0.5;
    st.history.push_back(a);
    BendersIteration b;
    b.iteration = 2;
    b.master_objective = 187.5;
    b.expected_recourse = 12.25;
    b.upper_bound = 199.75;
    b.gap = 0.015625;
    st.history.push_back(b);

    std::ostringstream os;
    write_benders_log(os, st);
    CHECK(os.str() == "iteration,master_objective,expected_recourse,upper_bound,gap\n"
                      "1,-100,0,200,0.5\n"
                      "2,187.5,12.25,199.75,0.015625\n");
}

TEST_CASE("bad tolerances are rejected up front") {
    const SystemCase sys = certain_case();
    const ScenarioSet scen = certain_scenarios();
    CHECK_THROWS_AS(benders_solve(sys, scen, 0.0), InputError);
    CHECK_THROWS_AS(benders_solve(sys, scen, -1.0), InputError);
    BendersConfig options;
    options.max_iterations = 0;
    CHECK_THROWS_AS(benders_solve(sys, scen, 1e-6, options), InputError);
}
