#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace resdim {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };

// Sparse linear program: min c'x  s.t.  rows, l <= x <= u.
struct LinearProgram {
    struct Row {
        std::string name;
        RowSense sense = RowSense::LessEqual;
        double rhs = 0.0;
        std::vector<std::pair<int, double>> coeffs; // (variable, coefficient)
    };

    std::vector<std::string> var_names;
    std::vector<double> lower, upper, objective;
    std::vector<Row> rows;

    int add_variable(const std::string& name, double lb, double ub, double cost) {
        var_names.push_back(name);
        lower.push_back(lb);
        upper.push_back(ub);
        objective.push_back(cost);
        return static_cast<int>(var_names.size()) - 1;
    }
    int add_row(const std::string& name, RowSense sense, double rhs,
                std::vector<std::pair<int, double>> coeffs) {
        rows.push_back({name, sense, rhs, std::move(coeffs)});
        return static_cast<int>(rows.size()) - 1;
    }
    int num_vars() const { return static_cast<int>(var_names.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

// Result of an LP or MILP solve. For LPs, duals follow the convention
// objective = sum_r dual_r * rhs_r + sum_j reduced_cost_j * x_j, so a binding
// >= row has a nonnegative dual and a binding <= row a nonpositive one in a
// minimization. For MILPs, duals/reduced costs are empty and bound/gap report
// the branch-and-bound proof state.
struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    long iterations = 0;
    // MILP-only fields
    double bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
};

// Every numeric knob of the kernel lives here so tolerances stay consistent
// across modules.
struct SolverConfig {
    double feas_tol = 1e-9;  // simplex bound/ratio tolerance
    double opt_tol = 1e-9;   // reduced-cost optimality tolerance
    double pivot_tol = 1e-9; // smallest acceptable pivot magnitude
    long max_iterations = 1000000;
    int refactor_interval = 100;
    int bland_trigger = 800; // consecutive degenerate pivots before Bland's rule engages

    double mip_gap_abs = 1e-6;
    double mip_gap_rel = 1e-6;
    long max_nodes = 2000000;
    double integrality_tol = 1e-7;
    double complementarity_tol = 1e-7;
    // Complementarity handling: branching (default) or big-M binaries. Big-M
    // requires per-pair bounds on both members and runs a post-solve audit
    // that fails if any member sits within 1% of its M.
    bool complementarity_big_m = false;
    int rounding_heuristic_interval = 50; // nodes between rounding attempts, 0 = off
};

// Mixed-integer program: LP plus binary marks and complementarity pairs.
// Pair (a, b) requires x_a * x_b = 0 with both variables nonnegative.
struct MixedIntegerProgram {
    LinearProgram lp;
    std::vector<int> binaries;
    std::vector<std::pair<int, int>> complementarity;
    // Optional per-pair big-M bounds (upper bounds on the pair members);
    // required only when SolverConfig::complementarity_big_m is set.
    std::vector<std::pair<double, double>> big_m;
};

struct MilpCallbacks {
    // Called with a node relaxation solution; may return a full candidate
    // vector. Candidates are verified against all rows, bounds, binaries and
    // pairs before being accepted as incumbents, so an inexact heuristic can
    // never corrupt the solve.
    std::function<std::optional<std::vector<double>>(const std::vector<double>&)> candidate;
};

// Bounded-variable two-phase revised simplex (artificial-variable phase 1,
// Dantzig pricing with Bland's rule after the degeneracy heuristic trips,
// deterministic tie-breaking throughout).
SolveResult solve_lp(const LinearProgram& lp, const SolverConfig& cfg = {});

// Branch & bound over binaries (most-fractional) and complementarity pairs
// (most-violated product), best-bound node selection, warm-started node LPs.
SolveResult solve_milp(const MixedIntegerProgram& mip, const SolverConfig& cfg = {},
                       const MilpCallbacks& callbacks = {});

// Plain-text dump of a problem for cross-checking against external tools.
void write_lp_text(std::ostream& os, const LinearProgram& lp);
void write_lp_text(std::ostream& os, const MixedIntegerProgram& mip);

} // namespace resdim
