#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "resdim/errors.hpp"
#include "resdim/market.hpp"
#include "resdim/validate.hpp"
#include "test_fixtures.hpp"
#include "test_util.hpp"

using namespace resdim;
using namespace resdim::test;

namespace {

ReserveSchedule zero_schedule(const SystemCase& sys) {
    ReserveSchedule s;
    s.up.assign(sys.generators.size(), 0.0);
    s.down.assign(sys.generators.size(), 0.0);
    return s;
}

} // namespace

TEST_CASE("reserve clearing census and hand solution") {
    SystemCase sys = micro_case();
    ReserveRequirements req{{60.0}, {0.0}};
    LinearProgram lp = build_reserve_lp(sys, req);
    CHECK(lp.num_vars() == 4);  // ru x2, rd x2
    CHECK(lp.num_rows() == 4);  // du, dd, cap x2

    ReserveSchedule sched = clear_reserve(sys, req);
    CHECK(sched.up[0] == doctest::Approx(40.0)); // cheap unit first, to its cap
    CHECK(sched.up[1] == doctest::Approx(20.0));
    CHECK(sched.down[0] == doctest::Approx(0.0));
    CHECK(sched.down[1] == doctest::Approx(0.0));
    CHECK(sched.cost == doctest::Approx(300.0)); // 3*40 + 9*20

    auto enumerated = vertex_enum_optimum(lp);
    REQUIRE(enumerated.has_value());
    CHECK(*enumerated == doctest::Approx(sched.cost));

    // requirement prices = cost of the marginal providing unit; solved at an
    // interior point so both duals are unique
    SolveResult res = solve_lp(build_reserve_lp(sys, ReserveRequirements{{60.0}, {10.0}}));
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(310.0));
    CHECK(res.duals[0] == doctest::Approx(9.0)); // up requirement row
    CHECK(res.duals[1] == doctest::Approx(1.0)); // down requirement row
}

TEST_CASE("reserve clearing rejects bad requirements") {
    SystemCase sys = micro_case();
    CHECK_THROWS_AS(clear_reserve(sys, ReserveRequirements{{90.0}, {0.0}}), InfeasibleError);
    try {
        clear_reserve(sys, ReserveRequirements{{90.0}, {0.0}});
    } catch (const InfeasibleError& e) {
        CHECK(e.stage == "reserve");
    }
    CHECK_THROWS_AS(clear_reserve(sys, ReserveRequirements{{-1.0}, {0.0}}), InputError);
    CHECK_THROWS_AS(clear_reserve(sys, ReserveRequirements{{10.0, 10.0}, {0.0, 0.0}}),
                    InputError);
}

TEST_CASE("day-ahead clearing census and hand solution") {
    SystemCase sys = micro_case();
    ReserveSchedule none = zero_schedule(sys);
    LinearProgram lp = build_day_ahead_lp(sys, none);
    CHECK(lp.num_vars() == 5); // pc x2, pw, th x2
    CHECK(lp.num_rows() == 5); // bal x2, fhi, flo, ref

    DayAheadSchedule da = clear_day_ahead(sys, none);
    CHECK(da.conventional[0] == doctest::Approx(70.0));
    CHECK(da.conventional[1] == doctest::Approx(0.0));
    CHECK(da.wind[0] == doctest::Approx(50.0));
    CHECK(da.cost == doctest::Approx(700.0));
    CHECK(da.angle[0] == doctest::Approx(0.0)); // reference node pinned
    // line flow = (th1 - th2)/x carries g1's full output
    CHECK((da.angle[0] - da.angle[1]) / 0.1 == doctest::Approx(70.0));

    auto enumerated = vertex_enum_optimum(lp);
    REQUIRE(enumerated.has_value());
    CHECK(*enumerated == doctest::Approx(da.cost));
}

TEST_CASE("day-ahead clearing respects procured reserve headroom") {
    SystemCase sys = micro_case();
    ReserveSchedule sched = clear_reserve(sys, ReserveRequirements{{60.0}, {0.0}});
    DayAheadSchedule da = clear_day_ahead(sys, sched);
    // g1 capped at 100 - 40 = 60, remainder shifts to the expensive unit
    CHECK(da.conventional[0] == doctest::Approx(60.0));
    CHECK(da.conventional[1] == doctest::Approx(10.0));
    CHECK(da.cost == doctest::Approx(900.0));
}

TEST_CASE("day-ahead clearing can be infeasible under extreme down reserves") {
    SystemCase sys = micro_case();
    ReserveSchedule sched = zero_schedule(sys);
    sched.down = {100.0, 100.0}; // forces pc >= 100 each, demand is only 120
    try {
        clear_day_ahead(sys, sched);
        FAIL("expected infeasibility");
    } catch (const InfeasibleError& e) {
        CHECK(e.stage == "day-ahead");
    }
}

TEST_CASE("real-time redispatch is limited by the line") {
    SystemCase sys = micro_case();
    ReserveSchedule sched = zero_schedule(sys);
    sched.up = {40.0, 20.0};
    DayAheadSchedule da = clear_day_ahead(sys, zero_schedule(sys)); // pc = (70, 0)
    RealTimeDispatch rt = clear_real_time(sys, sched, da, {20.0});
    // 30 MW deficit; the line already carries 70, so g1 can only add 10
    CHECK(rt.up[0] == doctest::Approx(10.0));
    CHECK(rt.up[1] == doctest::Approx(20.0));
    CHECK(rt.shed[0] == doctest::Approx(0.0));
    CHECK(rt.spill[0] == doctest::Approx(0.0));
    CHECK(rt.cost == doctest::Approx(700.0)); // 10*10 + 30*20
    CHECK((rt.angle[0] - rt.angle[1]) / 0.1 == doctest::Approx(80.0)); // at the limit

    auto enumerated = vertex_enum_optimum(build_real_time_lp(sys, sched, da, {20.0}));
    REQUIRE(enumerated.has_value());
    CHECK(*enumerated == doctest::Approx(rt.cost));

    SolveResult res = solve_lp(build_real_time_lp(sys, sched, da, {20.0}));
    REQUIRE(res.status == SolveStatus::Optimal);
    std::vector<std::string> failures;
    check_duality(build_real_time_lp(sys, sched, da, {20.0}), res, 1e-7, failures);
    CHECK(failures.empty());
}

TEST_CASE("real-time spills surplus wind for free") {
    SystemCase sys = micro_case();
    ReserveSchedule none = zero_schedule(sys);
    DayAheadSchedule da = clear_day_ahead(sys, none);
    RealTimeDispatch rt = clear_real_time(sys, none, da, {80.0});
    CHECK(rt.spill[0] == doctest::Approx(30.0));
    CHECK(rt.shed[0] == doctest::Approx(0.0));
    CHECK(rt.cost == doctest::Approx(0.0));
}

TEST_CASE("real-time sheds when no reserve was procured") {
    SystemCase sys = micro_case();
    ReserveSchedule none = zero_schedule(sys);
    DayAheadSchedule da = clear_day_ahead(sys, none);
    RealTimeDispatch rt = clear_real_time(sys, none, da, {20.0});
    CHECK(rt.shed[0] == doctest::Approx(30.0));
    CHECK(rt.cost == doctest::Approx(15000.0)); // 500 $/MWh * 30
    CHECK_THROWS_AS(clear_real_time(sys, none, da, {20.0, 20.0}), InputError);
}

TEST_CASE("sequential evaluation aggregates the three stages") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    MarketOutcome out = evaluate_sequential(sys, scen, ReserveRequirements{{60.0}, {0.0}});
    CHECK(out.cost.reserve == doctest::Approx(300.0));
    CHECK(out.cost.day_ahead == doctest::Approx(900.0));
    REQUIRE(out.real_time.size() == 2);
    CHECK(out.real_time[0].cost == doctest::Approx(0.0));   // surplus scenario
    CHECK(out.real_time[1].cost == doctest::Approx(500.0)); // 10*20 + 30*10
    CHECK(out.cost.real_time_expected == doctest::Approx(250.0));
    CHECK(out.cost.total == doctest::Approx(1450.0));

    auto violations = verify_outcome(sys, scen, out);
    for (const auto& v : violations) MESSAGE(v);
    CHECK(violations.empty());
}

TEST_CASE("concurrent scenario evaluation is deterministic") {
    SystemCase sys = micro_case();
    ScenarioSet scen = micro_scenarios();
    ReserveRequirements req{{60.0}, {0.0}};
    MarketOutcome a = evaluate_sequential(sys, scen, req, {}, 1);
    MarketOutcome b = evaluate_sequential(sys, scen, req, {}, 4);
    CHECK(a.cost.total == b.cost.total);
    REQUIRE(a.real_time.size() == b.real_time.size());
    for (size_t w = 0; w < a.real_time.size(); ++w) {
        CHECK(a.real_time[w].cost == b.real_time[w].cost);
        CHECK(a.real_time[w].up == b.real_time[w].up);
        CHECK(a.real_time[w].shed == b.real_time[w].shed);
    }
}

TEST_CASE("uncongested day-ahead dispatch follows merit order") {
    SystemCase sys;
    sys.name = "single-node";
    sys.voll = 1000.0;
    sys.zones = {"z1"};
    sys.nodes = {{"n1", 0}};
    sys.generators = {
        {"a", 0, 5.0, 1.0, 1.0, 30.0, 10.0, 10.0, std::nullopt},
        {"b", 0, 10.0, 1.0, 1.0, 30.0, 10.0, 10.0, std::nullopt},
        {"c", 0, 20.0, 1.0, 1.0, 30.0, 10.0, 10.0, std::nullopt},
    };
    sys.loads = {{"d1", 0, 50.0}};
    DayAheadSchedule da = clear_day_ahead(sys, zero_schedule(sys));
    CHECK(da.conventional[0] == doctest::Approx(30.0));
    CHECK(da.conventional[1] == doctest::Approx(20.0));
    CHECK(da.conventional[2] == doctest::Approx(0.0));
    CHECK(da.cost == doctest::Approx(350.0));
}

namespace {

// Independent reference for the commitment variant on the micro topology:
// enumerate every commitment pattern, price startups by hand, and solve the
// remaining dispatch LP assembled from scratch (not via the builders).
// u[t][i] indexes hour t in {0,1}, generator i in {0,1}.
std::optional<double> micro_uc_pattern_cost(const SystemCase& sys,
                                            const std::array<std::array<int, 2>, 2>& u) {
    LinearProgram lp;
    const double b = 1.0 / sys.lines[0].reactance;
    int pc[2][2], pw[2], th[2][2];
    for (int t = 0; t < 2; ++t) {
        for (int i = 0; i < 2; ++i) {
            const auto& g = sys.generators[i];
            pc[t][i] = lp.add_variable("pc", u[t][i] * g.uc->min_output,
                                       u[t][i] * g.capacity, g.energy_price);
        }
        double wf = sys.wind_profile[t];
        pw[t] = lp.add_variable("pw", 0.0,
                                scaled_wind(sys.wind_farms[0], sys.wind_farms[0].expected_output,
                                            wf),
                                0.0);
        th[t][0] = lp.add_variable("th1", -kInf, kInf, 0.0);
        th[t][1] = lp.add_variable("th2", -kInf, kInf, 0.0);
        double load = sys.loads[0].demand * sys.load_profile[t];
        lp.add_row("bal1", RowSense::Equal, 0.0,
                   {{pc[t][0], 1.0}, {th[t][0], -b}, {th[t][1], b}});
        lp.add_row("bal2", RowSense::Equal, load,
                   {{pc[t][1], 1.0}, {pw[t], 1.0}, {th[t][0], b}, {th[t][1], -b}});
        lp.add_row("fhi", RowSense::LessEqual, sys.lines[0].capacity,
                   {{th[t][0], b}, {th[t][1], -b}});
        lp.add_row("flo", RowSense::GreaterEqual, -sys.lines[0].capacity,
                   {{th[t][0], b}, {th[t][1], -b}});
        lp.add_row("ref", RowSense::Equal, 0.0, {{th[t][0], 1.0}});
    }
    for (int i = 0; i < 2; ++i) {
        const auto& uc = *sys.generators[i].uc;
        lp.add_row("r1", RowSense::LessEqual, uc.initial_output + uc.ramp_up,
                   {{pc[0][i], 1.0}});
        lp.add_row("r2", RowSense::GreaterEqual, uc.initial_output - uc.ramp_down,
                   {{pc[0][i], 1.0}});
        lp.add_row("r3", RowSense::LessEqual, uc.ramp_up, {{pc[1][i], 1.0}, {pc[0][i], -1.0}});
        lp.add_row("r4", RowSense::LessEqual, uc.ramp_down, {{pc[0][i], 1.0}, {pc[1][i], -1.0}});
    }
    SolveResult res = solve_lp(lp);
    if (res.status != SolveStatus::Optimal) return std::nullopt;
    double startup = 0.0;
    for (int i = 0; i < 2; ++i) {
        const auto& uc = *sys.generators[i].uc;
        startup += uc.startup_cost * std::max(0, u[0][i] - uc.initial_commitment);
        startup += uc.startup_cost * std::max(0, u[1][i] - u[0][i]);
    }
    return res.objective + startup;
}

} // namespace

TEST_CASE("commitment day-ahead matches pattern enumeration") {
    SystemCase sys = micro_uc_case();
    std::vector<ReserveSchedule> hourly(2, zero_schedule(sys));
    UcDayAheadSchedule uc = clear_day_ahead_uc(sys, hourly);

    double best = kInf;
    std::array<std::array<int, 2>, 2> best_u{};
    int feasible = 0;
    for (int mask = 0; mask < 16; ++mask) {
        std::array<std::array<int, 2>, 2> u = {{{mask & 1, (mask >> 1) & 1},
                                                {(mask >> 2) & 1, (mask >> 3) & 1}}};
        auto cost = micro_uc_pattern_cost(sys, u);
        if (!cost) continue;
        ++feasible;
        if (*cost < best) {
            best = *cost;
            best_u = u;
        }
    }
    REQUIRE(feasible >= 2);
    CHECK(uc.cost == doctest::Approx(best));
    CHECK(uc.cost == doctest::Approx(2900.0));
    for (int t = 0; t < 2; ++t)
        for (int i = 0; i < 2; ++i) CHECK(uc.commitment[t][i] == best_u[t][i]);

    // cheap unit runs throughout; the expensive one starts for the peak hour
    CHECK(uc.commitment[0] == std::vector<int>{1, 0});
    CHECK(uc.commitment[1] == std::vector<int>{1, 1});
    CHECK(uc.startup[1][1] == doctest::Approx(500.0));
    CHECK(uc.hour[0].conventional[0] == doctest::Approx(70.0));
    CHECK(uc.hour[0].conventional[1] == doctest::Approx(0.0));
    CHECK(uc.hour[1].conventional[0] == doctest::Approx(80.0));
    CHECK(uc.hour[1].conventional[1] == doctest::Approx(30.0));
}

TEST_CASE("vacuous commitment data reproduces hourly day-ahead clearings") {
    SystemCase sys = micro_uc_vacuous_case();
    std::vector<ReserveSchedule> hourly(2, zero_schedule(sys));
    UcDayAheadSchedule uc = clear_day_ahead_uc(sys, hourly);

    double hour_sum = 0.0;
    for (int t = 0; t < 2; ++t) {
        SystemCase h = sys;
        for (auto& load : h.loads) load.demand *= sys.load_profile[t];
        h.load_profile.clear();
        h.wind_profile.clear();
        DayAheadSchedule da = clear_day_ahead(h, zero_schedule(h));
        hour_sum += da.cost;
        for (size_t i = 0; i < h.generators.size(); ++i)
            CHECK(uc.hour[t].conventional[i] == doctest::Approx(da.conventional[i]));
    }
    CHECK(uc.cost == doctest::Approx(hour_sum));
    CHECK(uc.cost == doctest::Approx(2400.0)); // 700 + (800 + 900)
}

TEST_CASE("commitment day-ahead infeasibility reporting") {
    SystemCase sys = micro_uc_case();

    SUBCASE("an unservable hour is named") {
        sys.load_profile = {0.5, 1.0};
        ReserveSchedule sched = zero_schedule(sys);
        sched.down = {40.0, 40.0}; // floor of 80 MW against a 60 MW valley
        std::vector<ReserveSchedule> hourly(2, sched);
        try {
            clear_day_ahead_uc(sys, hourly);
            FAIL("expected infeasibility");
        } catch (const InfeasibleError& e) {
            CHECK(e.stage == "day-ahead-uc");
            CHECK(std::string(e.what()).find("hour 0") != std::string::npos);
        }
    }

    SUBCASE("pure coupling infeasibility falls back to a generic message") {
        // each hour clears on its own, but g1 cannot ramp down to the valley
        sys.load_profile = {0.25, 1.0};
        std::vector<ReserveSchedule> hourly(2, zero_schedule(sys));
        try {
            clear_day_ahead_uc(sys, hourly);
            FAIL("expected infeasibility");
        } catch (const InfeasibleError& e) {
            CHECK(e.stage == "day-ahead-uc");
            CHECK(std::string(e.what()).find("inter-hour") != std::string::npos);
        }
    }

    SUBCASE("missing commitment data is an input error") {
        SystemCase plain = micro_case();
        std::vector<ReserveSchedule> hourly(2, zero_schedule(plain));
        CHECK_THROWS_AS(clear_day_ahead_uc(plain, hourly), InputError);
        CHECK_THROWS_AS(clear_day_ahead_uc(sys, {}), InputError);
    }
}

TEST_CASE("multi-hour sequential pipeline ties the stages together") {
    SystemCase sys = micro_uc_vacuous_case();
    ScenarioSet scen = micro_scenarios();
    ReserveRequirements req{{60.0}, {0.0}};
    UcMarketOutcome out = evaluate_sequential_uc(sys, scen, req, 2);

    CHECK(out.cost.reserve == doctest::Approx(600.0)); // 300 per hour
    CHECK(out.cost.day_ahead == doctest::Approx(3000.0));
    CHECK(out.cost.real_time_expected == doctest::Approx(500.0));
    CHECK(out.cost.total == doctest::Approx(4100.0));
    REQUIRE(out.real_time.size() == 2);
    REQUIRE(out.real_time[0].size() == 2);

    // hour 0 is the base case, so its recourse matches the single-hour pipeline
    MarketOutcome single = evaluate_sequential(micro_case(), scen, req);
    for (int w = 0; w < 2; ++w)
        CHECK(out.real_time[0][w].cost == doctest::Approx(single.real_time[w].cost));

    CHECK_THROWS_AS(evaluate_sequential_uc(sys, scen, req, 0), InputError);
}
