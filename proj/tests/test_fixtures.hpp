#pragma once

#include <optional>

#include "resdim/types.hpp"

namespace resdim::test {

// Two-node system small enough to solve by hand: cheap generator behind a
// line, expensive generator and all wind/load at the far node.
//   n1 --(x=0.1, 80 MW)-- n2
//   g1@n1: 10 $/MWh, reserve 3/1, cap 100, reserve caps 40/40
//   g2@n2: 30 $/MWh, reserve 9/3, cap 100, reserve caps 40/40
//   w1@n2: forecast 50, installed 100;  load 120@n2;  VoLL 500
inline SystemCase micro_case() {
    SystemCase sys;
    sys.name = "micro";
    sys.voll = 500.0;
    sys.zones = {"z1"};
    sys.nodes = {{"n1", 0}, {"n2", 0}};
    sys.lines = {{"l1", 0, 1, 0.1, 80.0}};
    sys.generators = {
        {"g1", 0, 10.0, 3.0, 1.0, 100.0, 40.0, 40.0, std::nullopt},
        {"g2", 1, 30.0, 9.0, 3.0, 100.0, 40.0, 40.0, std::nullopt},
    };
    sys.wind_farms = {{"w1", 1, 50.0, 100.0}};
    sys.loads = {{"d1", 1, 120.0}};
    return sys;
}

// Two equiprobable wind outcomes straddling the 50 MW forecast.
inline ScenarioSet micro_scenarios() {
    ScenarioSet s;
    s.farm_ids = {"w1"};
    s.scenario_ids = {"s1", "s2"};
    s.probability = {0.5, 0.5};
    s.outcome = {{80.0, 20.0}};
    return s;
}

// Micro case with commitment data and a two-hour load step 120 -> 160.
// g1 ramps at 20 MW/h from an initial 60 MW; g2 starts offline with a steep
// startup cost, so the cheapest plan commits it only for the peak hour.
inline SystemCase micro_uc_case() {
    SystemCase sys = micro_case();
    sys.generators[0].uc = UcData{20.0, 100.0, 20.0, 20.0, 60.0, 1};
    sys.generators[1].uc = UcData{30.0, 500.0, 100.0, 100.0, 0.0, 0};
    sys.load_profile = {1.0, 4.0 / 3.0};
    sys.wind_profile = {1.0, 1.0};
    return sys;
}

// Micro case whose commitment data never binds: no minimum output, free
// startups, effectively unlimited ramps from a committed initial state.
inline SystemCase micro_uc_vacuous_case() {
    SystemCase sys = micro_uc_case();
    for (auto& g : sys.generators) g.uc = UcData{0.0, 0.0, 1e6, 1e6, 0.0, 1};
    return sys;
}

} // namespace resdim::test
