#include "resdim/validate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "resdim/errors.hpp"

namespace resdim {

namespace {

template <typename T>
void check_unique_ids(const std::vector<T>& items, const char* section,
                      std::vector<ValidationIssue>& out) {
    std::set<std::string> seen;
    for (const auto& it : items) {
        if (!seen.insert(it.id).second)
            out.push_back({std::string(section) + "[" + it.id + "]", "duplicate id"});
    }
}

std::string entity(const char* section, const std::string& id) {
    return std::string(section) + "[" + id + "]";
}

} // namespace

std::vector<ValidationIssue> validate_case(const SystemCase& sys) {
    std::vector<ValidationIssue> issues;
    const int nn = sys.num_nodes();
    const int nz = sys.num_zones();

    if (sys.voll <= 0.0) issues.push_back({"case", "voll must be positive"});
    if (sys.zones.empty()) issues.push_back({"case", "at least one zone required"});
    if (sys.nodes.empty()) issues.push_back({"case", "at least one node required"});

    {
        std::set<std::string> seen;
        for (const auto& z : sys.zones)
            if (!seen.insert(z).second) issues.push_back({entity("zones", z), "duplicate id"});
    }
    check_unique_ids(sys.nodes, "nodes", issues);
    check_unique_ids(sys.lines, "lines", issues);
    check_unique_ids(sys.generators, "generators", issues);
    check_unique_ids(sys.wind_farms, "wind_farms", issues);
    check_unique_ids(sys.loads, "loads", issues);

    for (const auto& n : sys.nodes) {
        if (n.zone < 0 || n.zone >= nz)
            issues.push_back({entity("nodes", n.id), "zone not in zone list"});
    }
    for (const auto& l : sys.lines) {
        if (l.from < 0 || l.from >= nn || l.to < 0 || l.to >= nn)
            issues.push_back({entity("lines", l.id), "endpoint not a known node"});
        else if (l.from == l.to)
            issues.push_back({entity("lines", l.id), "endpoints must differ"});
        if (l.reactance <= 0.0)
            issues.push_back({entity("lines", l.id), "reactance must be positive"});
        if (l.capacity < 0.0)
            issues.push_back({entity("lines", l.id), "capacity must be nonnegative"});
    }
    for (const auto& g : sys.generators) {
        if (g.node < 0 || g.node >= nn)
            issues.push_back({entity("generators", g.id), "node not a known node"});
        if (g.capacity < 0.0)
            issues.push_back({entity("generators", g.id), "capacity must be nonnegative"});
        if (g.energy_price < 0.0 || g.up_reserve_price < 0.0 || g.down_reserve_price < 0.0)
            issues.push_back({entity("generators", g.id), "prices must be nonnegative"});
        if (g.up_reserve_cap < 0.0 || g.up_reserve_cap > g.capacity)
            issues.push_back({entity("generators", g.id), "up reserve cap outside [0, capacity]"});
        if (g.down_reserve_cap < 0.0 || g.down_reserve_cap > g.capacity)
            issues.push_back({entity("generators", g.id), "down reserve cap outside [0, capacity]"});
        if (g.uc) {
            const auto& u = *g.uc;
            if (u.min_output < 0.0 || u.min_output > g.capacity)
                issues.push_back({entity("generators", g.id), "uc min output outside [0, capacity]"});
            if (u.startup_cost < 0.0)
                issues.push_back({entity("generators", g.id), "uc startup cost must be nonnegative"});
            if (u.ramp_up < 0.0 || u.ramp_down < 0.0)
                issues.push_back({entity("generators", g.id), "uc ramp rates must be nonnegative"});
            if (u.initial_output < 0.0 || u.initial_output > g.capacity)
                issues.push_back({entity("generators", g.id), "uc initial output outside [0, capacity]"});
            if (u.initial_commitment != 0 && u.initial_commitment != 1)
                issues.push_back({entity("generators", g.id), "uc initial commitment must be 0 or 1"});
        }
    }
    for (const auto& w : sys.wind_farms) {
        if (w.node < 0 || w.node >= nn)
            issues.push_back({entity("wind_farms", w.id), "node not a known node"});
        if (w.installed_capacity < 0.0)
            issues.push_back({entity("wind_farms", w.id), "installed capacity must be nonnegative"});
        if (w.expected_output < 0.0 || w.expected_output > w.installed_capacity)
            issues.push_back({entity("wind_farms", w.id), "expected output outside [0, installed capacity]"});
    }
    for (const auto& l : sys.loads) {
        if (l.node < 0 || l.node >= nn)
            issues.push_back({entity("loads", l.id), "node not a known node"});
        if (l.demand < 0.0)
            issues.push_back({entity("loads", l.id), "demand must be nonnegative"});
    }
    auto check_profile = [&](const std::vector<double>& p, const char* which) {
        if (p.empty()) return;
        if (p.size() != 24)
            issues.push_back({std::string("profiles.") + which, "profile must have 24 entries"});
        for (double v : p)
            if (v < 0.0) {
                issues.push_back({std::string("profiles.") + which, "profile entries must be nonnegative"});
                break;
            }
    };
    check_profile(sys.load_profile, "load");
    check_profile(sys.wind_profile, "wind");
    return issues;
}

std::vector<ValidationIssue> validate_case(const SystemCase& sys, const ScenarioSet& sc) {
    std::vector<ValidationIssue> issues = validate_case(sys);

    if (sc.num_scenarios() == 0) issues.push_back({"scenarios", "at least one scenario required"});
    if (sc.num_farms() != static_cast<int>(sys.wind_farms.size()))
        issues.push_back({"scenarios", "wind-farm count does not match the case"});
    else {
        for (size_t k = 0; k < sc.farm_ids.size(); ++k)
            if (sc.farm_ids[k] != sys.wind_farms[k].id) {
                issues.push_back({"scenarios", "wind-farm ids do not match the case"});
                break;
            }
    }
    {
        std::set<std::string> seen;
        for (const auto& s : sc.scenario_ids)
            if (!seen.insert(s).second)
                issues.push_back({entity("scenarios", s), "duplicate scenario id"});
    }
    if (static_cast<int>(sc.scenario_ids.size()) != sc.num_scenarios())
        issues.push_back({"scenarios", "scenario id/probability count mismatch"});
    double total = 0.0;
    for (double p : sc.probability) {
        if (p < 0.0) {
            issues.push_back({"scenarios", "probabilities must be nonnegative"});
            break;
        }
    }
    total = std::accumulate(sc.probability.begin(), sc.probability.end(), 0.0);
    if (sc.num_scenarios() > 0 && std::abs(total - 1.0) > 1e-6)
        issues.push_back({"scenarios", "probabilities must sum to 1"});
    if (static_cast<int>(sc.outcome.size()) != sc.num_farms())
        issues.push_back({"scenarios", "outcome matrix farm dimension mismatch"});
    for (int k = 0; k < static_cast<int>(sc.outcome.size()); ++k) {
        if (static_cast<int>(sc.outcome[k].size()) != sc.num_scenarios()) {
            issues.push_back({"scenarios", "outcome matrix scenario dimension mismatch"});
            continue;
        }
        if (k >= static_cast<int>(sys.wind_farms.size())) continue;
        const double cap = sys.wind_farms[k].installed_capacity;
        for (double v : sc.outcome[k])
            if (v < -1e-12 || v > cap + 1e-9) {
                issues.push_back({entity("scenarios", sc.farm_ids.empty() ? "" : sc.farm_ids[k]),
                                  "outcome outside [0, installed capacity]"});
                break;
            }
    }
    return issues;
}

namespace {
void throw_if_issues(const std::vector<ValidationIssue>& issues) {
    if (issues.empty()) return;
    std::ostringstream os;
    os << "case validation failed:";
    for (const auto& i : issues) os << "\n  " << i.entity << ": " << i.rule;
    throw ValidationError(os.str());
}
} // namespace

void require_valid(const SystemCase& sys) { throw_if_issues(validate_case(sys)); }
void require_valid(const SystemCase& sys, const ScenarioSet& sc) {
    throw_if_issues(validate_case(sys, sc));
}

NetworkComponents network_components(const SystemCase& sys) {
    const int nn = sys.num_nodes();
    std::vector<int> parent(nn);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (const auto& l : sys.lines) {
        if (l.from < 0 || l.from >= nn || l.to < 0 || l.to >= nn) continue;
        int a = find(l.from), b = find(l.to);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    NetworkComponents nc;
    nc.component.assign(nn, -1);
    for (int n = 0; n < nn; ++n) {
        int root = find(n);
        if (nc.component[root] < 0) {
            nc.component[root] = static_cast<int>(nc.reference.size());
            nc.reference.push_back(root);
        }
        nc.component[n] = nc.component[root];
    }
    return nc;
}

namespace {

// Signed flow out of `from` on each line for a given angle vector.
std::vector<double> line_flows(const SystemCase& sys, const std::vector<double>& angle) {
    std::vector<double> f(sys.lines.size(), 0.0);
    for (size_t l = 0; l < sys.lines.size(); ++l)
        f[l] = (angle[sys.lines[l].from] - angle[sys.lines[l].to]) / sys.lines[l].reactance;
    return f;
}

} // namespace

std::vector<std::string> verify_outcome(const SystemCase& sys, const ScenarioSet& sc,
                                        const MarketOutcome& out, double tol) {
    std::vector<std::string> bad;
    std::ostringstream os;
    auto flag = [&](const std::string& s) { bad.push_back(s); };

    const int ni = static_cast<int>(sys.generators.size());
    const int nk = static_cast<int>(sys.wind_farms.size());
    const int nn = sys.num_nodes();
    const int nj = static_cast<int>(sys.loads.size());
    const int nz = sys.num_zones();
    const int nw = sc.num_scenarios();

    if (static_cast<int>(out.reserve.up.size()) != ni || static_cast<int>(out.reserve.down.size()) != ni)
        return {"reserve schedule size mismatch"};
    if (static_cast<int>(out.day_ahead.conventional.size()) != ni ||
        static_cast<int>(out.day_ahead.wind.size()) != nk ||
        static_cast<int>(out.day_ahead.angle.size()) != nn)
        return {"day-ahead schedule size mismatch"};
    if (static_cast<int>(out.real_time.size()) != nw) return {"real-time dispatch count mismatch"};

    // reserve stage
    std::vector<double> zu(nz, 0.0), zd(nz, 0.0);
    for (int i = 0; i < ni; ++i) {
        const auto& g = sys.generators[i];
        double ru = out.reserve.up[i], rd = out.reserve.down[i];
        if (ru < -tol || ru > g.up_reserve_cap + tol)
            flag("reserve up outside offer bounds: " + g.id);
        if (rd < -tol || rd > g.down_reserve_cap + tol)
            flag("reserve down outside offer bounds: " + g.id);
        if (ru + rd > g.capacity + tol) flag("reserve up+down exceeds capacity: " + g.id);
        int z = sys.nodes[g.node].zone;
        zu[z] += ru;
        zd[z] += rd;
    }
    for (int z = 0; z < nz; ++z) {
        if (std::abs(zu[z] - out.requirements.up[z]) > tol)
            flag("zonal up-reserve sum differs from requirement: " + sys.zones[z]);
        if (std::abs(zd[z] - out.requirements.down[z]) > tol)
            flag("zonal down-reserve sum differs from requirement: " + sys.zones[z]);
    }

    // day-ahead stage
    const auto nc = network_components(sys);
    for (int r : nc.reference)
        if (std::abs(out.day_ahead.angle[r]) > tol) flag("reference angle not pinned: " + sys.nodes[r].id);
    for (int i = 0; i < ni; ++i) {
        const auto& g = sys.generators[i];
        double p = out.day_ahead.conventional[i];
        if (p < out.reserve.down[i] - tol || p > g.capacity - out.reserve.up[i] + tol)
            flag("day-ahead dispatch violates reserve headroom: " + g.id);
    }
    for (int k = 0; k < nk; ++k) {
        double p = out.day_ahead.wind[k];
        if (p < -tol || p > sys.wind_farms[k].expected_output + tol)
            flag("day-ahead wind outside [0, forecast]: " + sys.wind_farms[k].id);
    }
    const auto da_flow = line_flows(sys, out.day_ahead.angle);
    for (size_t l = 0; l < sys.lines.size(); ++l)
        if (std::abs(da_flow[l]) > sys.lines[l].capacity + tol)
            flag("day-ahead flow exceeds capacity: " + sys.lines[l].id);
    {
        std::vector<double> resid(nn, 0.0);
        for (int i = 0; i < ni; ++i) resid[sys.generators[i].node] += out.day_ahead.conventional[i];
        for (int k = 0; k < nk; ++k) resid[sys.wind_farms[k].node] += out.day_ahead.wind[k];
        for (int j = 0; j < nj; ++j) resid[sys.loads[j].node] -= sys.loads[j].demand;
        for (size_t l = 0; l < sys.lines.size(); ++l) {
            resid[sys.lines[l].from] -= da_flow[l];
            resid[sys.lines[l].to] += da_flow[l];
        }
        for (int n = 0; n < nn; ++n)
            if (std::abs(resid[n]) > tol) {
                os.str("");
                os << "day-ahead balance residual " << resid[n] << " at " << sys.nodes[n].id;
                flag(os.str());
            }
    }

    // real-time stage, every scenario
    for (int w = 0; w < nw; ++w) {
        const auto& rt = out.real_time[w];
        if (static_cast<int>(rt.up.size()) != ni || static_cast<int>(rt.down.size()) != ni ||
            static_cast<int>(rt.shed.size()) != nj || static_cast<int>(rt.spill.size()) != nk ||
            static_cast<int>(rt.angle.size()) != nn) {
            flag("real-time dispatch size mismatch in scenario " + sc.scenario_ids[w]);
            continue;
        }
        for (int i = 0; i < ni; ++i) {
            if (rt.up[i] < -tol || rt.up[i] > out.reserve.up[i] + tol)
                flag("deployed up reserve outside procurement: " + sys.generators[i].id + " in " +
                     sc.scenario_ids[w]);
            if (rt.down[i] < -tol || rt.down[i] > out.reserve.down[i] + tol)
                flag("deployed down reserve outside procurement: " + sys.generators[i].id + " in " +
                     sc.scenario_ids[w]);
        }
        for (int j = 0; j < nj; ++j)
            if (rt.shed[j] < -tol || rt.shed[j] > sys.loads[j].demand + tol)
                flag("shedding outside [0, demand]: " + sys.loads[j].id + " in " + sc.scenario_ids[w]);
        for (int k = 0; k < nk; ++k)
            if (rt.spill[k] < -tol || rt.spill[k] > sc.outcome[k][w] + tol)
                flag("spillage outside [0, realized wind]: " + sys.wind_farms[k].id + " in " +
                     sc.scenario_ids[w]);
        const auto rt_flow = line_flows(sys, rt.angle);
        for (size_t l = 0; l < sys.lines.size(); ++l)
            if (std::abs(rt_flow[l]) > sys.lines[l].capacity + tol)
                flag("real-time flow exceeds capacity: " + sys.lines[l].id + " in " + sc.scenario_ids[w]);
        std::vector<double> resid(nn, 0.0);
        for (int i = 0; i < ni; ++i)
            resid[sys.generators[i].node] += rt.up[i] - rt.down[i];
        for (int k = 0; k < nk; ++k)
            resid[sys.wind_farms[k].node] += sc.outcome[k][w] - out.day_ahead.wind[k] - rt.spill[k];
        for (int j = 0; j < nj; ++j) resid[sys.loads[j].node] += rt.shed[j];
        for (size_t l = 0; l < sys.lines.size(); ++l) {
            double dev = rt_flow[l] - da_flow[l]; // deviation flow out of `from`
            resid[sys.lines[l].from] -= dev;
            resid[sys.lines[l].to] += dev;
        }
        for (int n = 0; n < nn; ++n)
            if (std::abs(resid[n]) > tol) {
                os.str("");
                os << "real-time balance residual " << resid[n] << " at " << sys.nodes[n].id << " in "
                   << sc.scenario_ids[w];
                flag(os.str());
            }
    }

    // cost recomputation
    auto rel = [](double a, double b) { return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b))); };
    double cr = 0.0, cda = 0.0;
    for (int i = 0; i < ni; ++i) {
        cr += sys.generators[i].up_reserve_price * out.reserve.up[i] +
              sys.generators[i].down_reserve_price * out.reserve.down[i];
        cda += sys.generators[i].energy_price * out.day_ahead.conventional[i];
    }
    double crt = 0.0;
    for (int w = 0; w < nw; ++w) {
        double c = 0.0;
        for (int i = 0; i < ni; ++i)
            c += sys.generators[i].energy_price * (out.real_time[w].up[i] - out.real_time[w].down[i]);
        for (int j = 0; j < nj; ++j) c += sys.voll * out.real_time[w].shed[j];
        if (rel(c, out.real_time[w].cost) > 1e-6)
            flag("real-time cost mismatch in scenario " + sc.scenario_ids[w]);
        crt += sc.probability[w] * out.real_time[w].cost;
    }
    if (rel(cr, out.cost.reserve) > 1e-6) flag("reserve cost mismatch");
    if (rel(cda, out.cost.day_ahead) > 1e-6) flag("day-ahead cost mismatch");
    if (rel(crt, out.cost.real_time_expected) > 1e-6) flag("expected real-time cost mismatch");
    if (rel(out.cost.reserve + out.cost.day_ahead + out.cost.real_time_expected, out.cost.total) > 1e-6)
        flag("cost breakdown does not sum to total");
    return bad;
}

} // namespace resdim
