#include "resdim/dimensioning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "resdim/benders.hpp"
#include "resdim/bilevel.hpp"
#include "resdim/errors.hpp"
#include "resdim/market.hpp"
#include "resdim/stochastic.hpp"
#include "format.hpp"
#include "parallel.hpp"

namespace resdim {

namespace {

void check_scenario_shape(const SystemCase& sys, const ScenarioSet& scenarios) {
    const size_t ns = scenarios.probability.size();
    if (ns == 0) throw InputError("scenario set is empty");
    if (scenarios.outcome.size() != sys.wind_farms.size())
        throw InputError("scenario outcomes do not match the number of farms");
    for (const auto& row : scenarios.outcome)
        if (row.size() != ns) throw InputError("scenario outcomes do not match the weights");
}

std::vector<double> grid_values(const GridSpec& g, const std::string& which) {
    if (g.lo < 0.0) throw InputError(which + " grid starts below zero");
    if (g.hi < g.lo) throw InputError(which + " grid ends before it starts");
    if (g.step <= 0.0) throw InputError(which + " grid step must be positive");
    const int count = static_cast<int>(std::floor((g.hi - g.lo) / g.step + 1e-9)) + 1;
    std::vector<double> values(count);
    for (int i = 0; i < count; ++i) values[i] = g.lo + i * g.step;
    return values;
}

} // namespace

double empirical_quantile(std::vector<double> values, std::vector<double> weights, double p) {
    if (values.empty()) throw InputError("quantile of an empty sample set");
    if (weights.size() != values.size())
        throw InputError("quantile weights do not match the samples");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InputError("quantile weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-6) throw InputError("quantile weights must sum to one");
    if (p < 0.0 || p > 1.0) throw InputError("quantile probability must lie in [0, 1]");

    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    // zero-weight samples carry no mass in the empirical distribution
    std::vector<double> v, w;
    for (int idx : order) {
        if (weights[idx] <= 0.0) continue;
        v.push_back(values[idx]);
        w.push_back(weights[idx]);
    }
    if (v.empty()) throw InputError("quantile weights must sum to one");
    const size_t n = v.size();
    if (n == 1) return v[0];

    // sample j sits at position (C_j - w_j) / (1 - w_last): 0 for the first,
    // 1 for the last, (j-1)/(n-1) when equiprobable
    std::vector<double> pos(n);
    double cum = 0.0;
    for (size_t j = 0; j < n; ++j) {
        cum += w[j];
        pos[j] = (cum - w[j]) / (1.0 - w[n - 1]);
    }
    pos[n - 1] = 1.0;
    if (p <= pos.front()) return v.front();
    if (p >= pos.back()) return v.back();
    const size_t j = std::upper_bound(pos.begin(), pos.end(), p) - pos.begin();
    const double span = pos[j] - pos[j - 1];
    return v[j - 1] + (p - pos[j - 1]) / span * (v[j] - v[j - 1]);
}

ReserveRequirements probabilistic_requirements(const SystemCase& sys,
                                               const ScenarioSet& scenarios, double alpha_lo,
                                               double alpha_hi, bool zonal) {
    if (!(0.0 <= alpha_lo && alpha_lo < alpha_hi && alpha_hi <= 1.0))
        throw InputError("quantile bounds must satisfy 0 <= lo < hi <= 1");
    check_scenario_shape(sys, scenarios);
    const int nz = static_cast<int>(sys.zones.size());
    if (!zonal && nz != 1)
        throw InputError("system-wide dimensioning needs a single-zone case");

    const int ns = static_cast<int>(scenarios.probability.size());
    ReserveRequirements req;
    req.up.assign(nz, 0.0);
    req.down.assign(nz, 0.0);
    for (int z = 0; z < nz; ++z) {
        std::vector<double> samples(ns, 0.0);
        for (size_t k = 0; k < sys.wind_farms.size(); ++k) {
            if (sys.nodes[sys.wind_farms[k].node].zone != z) continue;
            for (int w = 0; w < ns; ++w) samples[w] += scenarios.outcome[k][w];
        }
        double mean = 0.0;
        for (int w = 0; w < ns; ++w) mean += scenarios.probability[w] * samples[w];
        const double q_lo = empirical_quantile(samples, scenarios.probability, alpha_lo);
        const double q_hi = empirical_quantile(samples, scenarios.probability, alpha_hi);
        req.up[z] = std::max(0.0, mean - q_lo);
        req.down[z] = std::max(0.0, q_hi - mean);
    }
    return req;
}

SweepResult sweep_requirement_grid(const SystemCase& sys, const ScenarioSet& scenarios,
                                   const GridSpec& up, const GridSpec& down,
                                   const SolverConfig& cfg, int threads) {
    if (sys.zones.size() != 1)
        throw InputError("the requirement surface is two-dimensional; "
                         "sweeping needs a single-zone case");
    check_scenario_shape(sys, scenarios);

    SweepResult sweep;
    sweep.up_values = grid_values(up, "up");
    sweep.down_values = grid_values(down, "down");
    const int nd = static_cast<int>(sweep.down_values.size());
    const int total = static_cast<int>(sweep.up_values.size()) * nd;
    sweep.cells.resize(total);
    detail::parallel_for(total, threads, [&](int c) {
        SweepCell& cell = sweep.cells[c];
        cell.up = sweep.up_values[c / nd];
        cell.down = sweep.down_values[c % nd];
        try {
            cell.cost = evaluate_sequential(sys, scenarios, {{cell.up}, {cell.down}}, cfg).cost;
            cell.status = "ok";
        } catch (const InfeasibleError& e) {
            cell.status = e.stage;
        }
    });
    for (int c = 0; c < total; ++c) {
        if (sweep.cells[c].status != "ok") continue;
        if (sweep.argmin < 0 || sweep.cells[c].cost.total < sweep.cells[sweep.argmin].cost.total)
            sweep.argmin = c;
    }
    return sweep;
}

void write_sweep_table(std::ostream& os, const SweepResult& sweep) {
    os << "D_U,D_D,cost_reserve,cost_da,cost_rt_expected,cost_total,status\n";
    for (const SweepCell& cell : sweep.cells) {
        os << detail::format_number(cell.up) << ',' << detail::format_number(cell.down) << ',';
        if (cell.status == "ok")
            os << detail::format_number(cell.cost.reserve) << ','
               << detail::format_number(cell.cost.day_ahead) << ','
               << detail::format_number(cell.cost.real_time_expected) << ','
               << detail::format_number(cell.cost.total);
        else
            os << ",,,";
        os << ',' << cell.status << '\n';
    }
}

std::vector<ComparisonRow> compare_approaches(const SystemCase& sys, const ScenarioSet& scenarios,
                                              const std::vector<QuantilePair>& quantiles,
                                              const CompareOptions& options) {
    check_scenario_shape(sys, scenarios);
    std::vector<ComparisonRow> rows;

    auto evaluated = [&](std::string label, const ReserveRequirements& req) {
        ComparisonRow row;
        row.label = std::move(label);
        row.requirements = req;
        try {
            row.cost = evaluate_sequential(sys, scenarios, req, options.solver,
                                           options.threads)
                           .cost;
            row.status = "ok";
        } catch (const InfeasibleError& e) {
            row.status = e.stage;
        }
        return row;
    };

    for (const QuantilePair& qp : quantiles) {
        const std::string label =
            "q(" + detail::format_number(qp.lo) + "/" + detail::format_number(qp.hi) + ")";
        rows.push_back(
            evaluated(label, probabilistic_requirements(sys, scenarios, qp.lo, qp.hi, true)));
    }
    rows.push_back(evaluated("stochastic-derived",
                             requirements_from_stochastic(sys, scenarios, options.solver)));
    {
        ComparisonRow row;
        row.label = "enhanced";
        try {
            if (options.enhanced_via_benders) {
                BendersConfig bc;
                bc.threads = options.threads;
                bc.solver = options.solver;
                const BendersSolution sol =
                    benders_solve(sys, scenarios, options.benders_eps, bc);
                row.requirements = sol.requirements;
                row.cost = sol.outcome.cost;
            } else {
                const EnhancedSolution sol =
                    solve_enhanced_requirements(sys, scenarios, options.solver);
                row.requirements = sol.requirements;
                row.cost = sol.outcome.cost;
            }
            row.status = "ok";
        } catch (const InfeasibleError& e) {
            row.status = e.stage;
        }
        rows.push_back(std::move(row));
    }
    {
        ComparisonRow row;
        row.label = "stochastic-ideal";
        try {
            const StochasticSolution sol = solve_stochastic_dispatch(sys, scenarios,
                                                                     options.solver);
            row.requirements = sol.requirements;
            row.cost = sol.outcome.cost;
            row.status = "ok";
        } catch (const InfeasibleError& e) {
            row.status = e.stage;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_comparison(std::ostream& os, const std::vector<ComparisonRow>& rows) {
    os << "label,D_U,D_D,cost_reserve,cost_da,cost_rt_expected,cost_total,status\n";
    auto joined = [](const std::vector<double>& vals) {
        std::string out;
        for (size_t i = 0; i < vals.size(); ++i) {
            if (i) out += ';';
            out += detail::format_number(vals[i]);
        }
        return out;
    };
    for (const ComparisonRow& row : rows) {
        os << row.label << ',' << joined(row.requirements.up) << ','
           << joined(row.requirements.down) << ',';
        if (row.status == "ok")
            os << detail::format_number(row.cost.reserve) << ','
               << detail::format_number(row.cost.day_ahead) << ','
               << detail::format_number(row.cost.real_time_expected) << ','
               << detail::format_number(row.cost.total);
        else
            os << ",,,";
        os << ',' << row.status << '\n';
    }
}

} // namespace resdim
