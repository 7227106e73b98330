#pragma once

#include <optional>
#include <string>
#include <vector>

namespace resdim {

// All power quantities in MW, angles in rad, prices in $/MWh ($/MW for reserve capacity).

struct Node {
    std::string id;
    int zone = -1; // index into SystemCase::zones
};

struct Line {
    std::string id;
    int from = -1; // node indices
    int to = -1;
    double reactance = 0.0; // p.u., > 0
    double capacity = 0.0;  // MW limit, applied in both directions
};

// Optional unit-commitment data for the multi-hour day-ahead variant.
struct UcData {
    double min_output = 0.0;
    double startup_cost = 0.0;
    double ramp_up = 0.0;   // MW per hour
    double ramp_down = 0.0;
    double initial_output = 0.0;
    int initial_commitment = 1;
};

struct Generator {
    std::string id;
    int node = -1;
    double energy_price = 0.0;
    double up_reserve_price = 0.0;
    double down_reserve_price = 0.0;
    double capacity = 0.0;
    double up_reserve_cap = 0.0;
    double down_reserve_cap = 0.0;
    std::optional<UcData> uc;
};

struct WindFarm {
    std::string id;
    int node = -1;
    double expected_output = 0.0;    // forecast used by the day-ahead stage
    double installed_capacity = 0.0;
};

struct Load {
    std::string id;
    int node = -1;
    double demand = 0.0;
};

struct SystemCase {
    std::string name;
    double voll = 0.0; // value of lost load, $/MWh
    std::vector<std::string> zones;
    std::vector<Node> nodes;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<WindFarm> wind_farms;
    std::vector<Load> loads;
    // optional 24-entry hourly multipliers for multi-hour studies
    std::vector<double> load_profile;
    std::vector<double> wind_profile;

    int num_zones() const { return static_cast<int>(zones.size()); }
    int num_nodes() const { return static_cast<int>(nodes.size()); }
    bool has_uc_data() const {
        for (const auto& g : generators)
            if (g.uc) return true;
        return false;
    }
};

// Wind-power scenario set; outcome[k][w] is farm k's output in scenario w.
struct ScenarioSet {
    std::vector<std::string> farm_ids; // must match SystemCase::wind_farms order
    std::vector<std::string> scenario_ids;
    std::vector<double> probability;          // size = num_scenarios, sums to 1
    std::vector<std::vector<double>> outcome; // [farm][scenario]

    int num_scenarios() const { return static_cast<int>(probability.size()); }
    int num_farms() const { return static_cast<int>(farm_ids.size()); }
};

// Zonal reserve requirements, one up/down pair per zone.
struct ReserveRequirements {
    std::vector<double> up;
    std::vector<double> down;
};

struct ReserveSchedule {
    std::vector<double> up;   // per generator
    std::vector<double> down;
    double cost = 0.0;
};

struct DayAheadSchedule {
    std::vector<double> conventional; // per generator
    std::vector<double> wind;         // per farm
    std::vector<double> angle;        // per node
    double cost = 0.0;
};

// Multi-hour day-ahead schedule produced by the unit-commitment variant.
struct UcDayAheadSchedule {
    std::vector<DayAheadSchedule> hour;       // per-hour dispatch (cost = energy cost that hour)
    std::vector<std::vector<int>> commitment; // [hour][generator]
    std::vector<std::vector<double>> startup; // [hour][generator] startup cost incurred
    double cost = 0.0;                        // energy + startup over all hours
};

struct RealTimeDispatch {
    std::vector<double> up;    // reserve deployed upward, per generator
    std::vector<double> down;  // reserve deployed downward, per generator
    std::vector<double> shed;  // per load
    std::vector<double> spill; // per farm
    std::vector<double> angle; // per node
    double cost = 0.0;         // can be negative (down-regulation refunds)
};

struct CostBreakdown {
    double reserve = 0.0;
    double day_ahead = 0.0;
    double real_time_expected = 0.0;
    double total = 0.0;
};

// Full sequential-market result for one operating hour.
struct MarketOutcome {
    ReserveRequirements requirements;
    ReserveSchedule reserve;
    DayAheadSchedule day_ahead;
    std::vector<RealTimeDispatch> real_time; // per scenario
    CostBreakdown cost;
};

// Sequential-market result over a multi-hour horizon with unit commitment in
// the day-ahead stage. The reserve stage sees no hourly data, so one schedule
// serves every hour; its cost appears once per hour in the breakdown.
struct UcMarketOutcome {
    ReserveRequirements requirements;
    ReserveSchedule reserve;
    UcDayAheadSchedule day_ahead;
    std::vector<std::vector<RealTimeDispatch>> real_time; // [hour][scenario]
    CostBreakdown cost; // day_ahead includes startup costs
};

} // namespace resdim
