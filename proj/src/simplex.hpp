#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

#include "resdim/lp.hpp"

namespace resdim::detail {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeAtZero };

// Basis + nonbasic states; nonbasic values are implied (bound or 0 for free).
struct BasisSnapshot {
    std::vector<int> basic;
    std::vector<VarState> state;
};

// Bounded-variable two-phase revised simplex over an explicit column list
// (structural variables, one slack per row, one artificial slot per row).
// The basis is kept as a sparse LU factorization (Eigen) plus product-form
// eta updates between refactorizations. Cold solves feasibilize with the
// artificial-variable phase 1; warm re-solves after bound changes restore
// feasibility by minimizing each violated variable's excursion in turn (the
// violated variable itself plays the artificial's role).
class Simplex {
  public:
    Simplex(const LinearProgram& lp, const SolverConfig& cfg);

    // Bound edits apply to structural columns (branch & bound drives these).
    void set_bounds(int col, double lb, double ub);
    void reset_bounds(); // restore the original LP bounds on every structural column
    double lower(int col) const { return lb_[col]; }
    double upper(int col) const { return ub_[col]; }

    SolveStatus solve();

    double objective() const { return objective_; }
    double value(int col) const { return xval_[col]; }
    std::vector<double> structural_x() const;
    std::vector<double> row_duals();                // valid after an Optimal solve
    std::vector<double> structural_reduced_costs(); // valid after an Optimal solve
    long iterations() const { return iterations_; }

    BasisSnapshot snapshot() const { return {basic_, state_}; }
    void restore(const BasisSnapshot& s);
    bool initialized() const { return initialized_; }

    int num_structural() const { return n_; }
    int num_rows() const { return m_; }

  private:
    struct Eta {
        int row;
        double pivot;
        std::vector<std::pair<int, double>> entries; // excludes the pivot row
    };
    enum class RunOutcome { PhaseOptimal, Unbounded, IterLimit, GoalReached };

    int slack_col(int r) const { return n_ + r; }
    int art_col(int r) const { return n_ + m_ + r; }
    bool is_artificial(int col) const { return col >= n_ + m_; }

    void build(const LinearProgram& lp);
    void init_states();
    bool factorize(); // false if the basis matrix is numerically singular
    void ftran(Eigen::VectorXd& v) const;
    void btran(Eigen::VectorXd& v) const;
    void compute_basics();
    template <typename F> void for_each_entry(int col, F&& f) const;
    double col_dot(int col, const Eigen::VectorXd& v) const;
    double bound_tol(double bound) const { return cfg_.feas_tol * (1.0 + std::abs(bound)) * 10.0; }
    // -1 below lower, +1 above upper, 0 feasible
    int violation_side(int col) const;
    double total_infeasibility() const;
    double phase_cost(const std::vector<double>& cost, int col) const {
        return col < static_cast<int>(cost.size()) ? cost[col] : 0.0;
    }
    double eval_objective(const std::vector<double>& cost) const;
    SolveStatus cold_phase1();
    SolveStatus restore_feasibility();
    RunOutcome run(const std::vector<double>& cost, int goal_col, bool allow_unbounded);
    void snap_nonbasic(int col);
    void finalize();

    SolverConfig cfg_;
    int m_ = 0, n_ = 0, ncols_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_; // structural columns only
    std::vector<double> rhs_;
    std::vector<double> lb_, ub_;         // all columns
    std::vector<double> lb0_, ub0_;       // original structural bounds
    std::vector<double> cost2_;           // phase-2 objective over all columns
    std::vector<double> art_sign_;        // per row, set when the artificial activates
    std::vector<int> basic_;              // column occupying each basis position
    std::vector<int> basis_pos_;          // per column, basis position or -1
    std::vector<VarState> state_;
    std::vector<double> xval_;
    std::vector<char> restoring_;         // columns whose violated bound is temporarily relaxed
    int restoring_count_ = 0;

    // mutable: Eigen exposes adjoint() as non-const even though solving is
    // logically const
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool lu_valid_ = false;
    std::vector<Eta> etas_;
    Eigen::VectorXd work_, work2_;

    bool initialized_ = false;
    bool bland_ = false;
    int degen_streak_ = 0;
    long iterations_ = 0; // cumulative across solves; the limit applies per solve
    long iter_base_ = 0;
    double objective_ = 0.0;
    double bnorm_ = 0.0; // 1 + max |rhs|
};

} // namespace resdim::detail
