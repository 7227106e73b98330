#include "resdim/lp.hpp"

#include <cmath>
#include <ostream>

#include "resdim/errors.hpp"
#include "simplex.hpp"

namespace resdim {

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

SolveResult solve_lp(const LinearProgram& lp, const SolverConfig& cfg) {
    detail::Simplex s(lp, cfg);
    SolveResult res;
    res.status = s.solve();
    res.iterations = s.iterations();
    res.objective = s.objective();
    res.x = s.structural_x();
    if (res.status == SolveStatus::Optimal) {
        res.duals = s.row_duals();
        res.reduced_costs = s.structural_reduced_costs();
        res.bound = res.objective;
    }
    return res;
}

namespace {

void write_term(std::ostream& os, bool first, double coef, const std::string& name) {
    if (coef >= 0.0)
        os << (first ? "" : " + ") << coef << " " << name;
    else
        os << (first ? "-" : " - ") << -coef << " " << name;
}

void write_body(std::ostream& os, const LinearProgram& lp) {
    os << "minimize\n  ";
    bool first = true;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (lp.objective[j] == 0.0) continue;
        write_term(os, first, lp.objective[j], lp.var_names[j]);
        first = false;
    }
    if (first) os << "0";
    os << "\nsubject to\n";
    for (const auto& row : lp.rows) {
        os << "  " << row.name << ": ";
        bool f = true;
        for (auto [j, v] : row.coeffs) {
            if (v == 0.0) continue;
            write_term(os, f, v, lp.var_names[j]);
            f = false;
        }
        if (f) os << "0";
        switch (row.sense) {
        case RowSense::LessEqual: os << " <= "; break;
        case RowSense::Equal: os << " = "; break;
        case RowSense::GreaterEqual: os << " >= "; break;
        }
        os << row.rhs << "\n";
    }
    os << "bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        os << "  ";
        if (lp.lower[j] == -kInf)
            os << "-inf";
        else
            os << lp.lower[j];
        os << " <= " << lp.var_names[j] << " <= ";
        if (lp.upper[j] == kInf)
            os << "inf";
        else
            os << lp.upper[j];
        os << "\n";
    }
}

} // namespace

void write_lp_text(std::ostream& os, const LinearProgram& lp) {
    write_body(os, lp);
    os << "end\n";
}

void write_lp_text(std::ostream& os, const MixedIntegerProgram& mip) {
    write_body(os, mip.lp);
    if (!mip.binaries.empty()) {
        os << "binaries\n ";
        for (int j : mip.binaries) os << " " << mip.lp.var_names[j];
        os << "\n";
    }
    if (!mip.complementarity.empty()) {
        os << "complementarity\n";
        for (auto [a, b] : mip.complementarity)
            os << "  " << mip.lp.var_names[a] << " * " << mip.lp.var_names[b] << " = 0\n";
    }
    os << "end\n";
}

} // namespace resdim
