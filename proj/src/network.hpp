#pragma once

#include <string>
#include <utility>
#include <vector>

#include "resdim/lp.hpp"
#include "resdim/types.hpp"
#include "resdim/validate.hpp"

namespace resdim::detail {

// Appends the DC network block shared by every energy-stage builder: per-node
// balance equalities, two-sided flow limits per line, and one angle reference
// pin per connected component. `injections` carries per node the (column,
// coefficient) pairs already accumulated by the caller; the angle terms are
// added here. Row order: balance (per node), then fhi/flo interleaved per
// line, then reference pins.
inline void add_network_rows(LinearProgram& lp, const SystemCase& sys,
                             const std::vector<int>& theta,
                             std::vector<std::vector<std::pair<int, double>>>& injections,
                             const std::vector<double>& balance_rhs, const std::string& suffix) {
    const int nn = sys.num_nodes();
    for (const auto& line : sys.lines) {
        double b = 1.0 / line.reactance;
        // node `from` exports (th_f - th_t)/x; node `to` the negative
        injections[line.from].push_back({theta[line.from], -b});
        injections[line.from].push_back({theta[line.to], b});
        injections[line.to].push_back({theta[line.to], -b});
        injections[line.to].push_back({theta[line.from], b});
    }
    for (int n = 0; n < nn; ++n)
        lp.add_row("bal_" + sys.nodes[n].id + suffix, RowSense::Equal, balance_rhs[n],
                   injections[n]);
    for (const auto& line : sys.lines) {
        double b = 1.0 / line.reactance;
        std::vector<std::pair<int, double>> flow = {{theta[line.from], b}, {theta[line.to], -b}};
        lp.add_row("fhi_" + line.id + suffix, RowSense::LessEqual, line.capacity, flow);
        lp.add_row("flo_" + line.id + suffix, RowSense::GreaterEqual, -line.capacity, flow);
    }
    NetworkComponents comps = network_components(sys);
    for (int ref : comps.reference)
        lp.add_row("ref_" + sys.nodes[ref].id + suffix, RowSense::Equal, 0.0,
                   {{theta[ref], 1.0}});
}

} // namespace resdim::detail
