#pragma once

#include <string>
#include <vector>

#include "resdim/lp.hpp"
#include "resdim/stochastic.hpp"
#include "resdim/types.hpp"

namespace resdim::detail {

// Column indices of the first-stage quantities a real-time block couples to.
struct FirstStageCols {
    std::vector<int> ru, rd; // per generator
    std::vector<int> pw;     // per farm
    std::vector<int> th;     // per node (day-ahead angles)
};

// Appends the first-stage columns and rows of the co-optimization skeleton —
// everything StochasticLayout places before the scenario blocks — including
// the first-stage objective terms.
void append_first_stage(LinearProgram& lp, const SystemCase& sys, const StochasticLayout& lay);

// Appends one scenario's real-time block: columns rru/rrd/sh/sp/rth, then the
// deployment caps and the deviation network rows. Objective terms carry
// weight `pi`; the first-stage couplings use the given column indices.
void append_rt_block(LinearProgram& lp, const SystemCase& sys, const FirstStageCols& fs,
                     const std::vector<double>& wind, double pi, const std::string& tag);

} // namespace resdim::detail
