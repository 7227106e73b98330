#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "resdim/errors.hpp"

namespace resdim::detail {

namespace {
constexpr double kDrop = 1e-11;     // coefficient magnitudes below this never block
constexpr double kTieTol = 1e-12;   // ratio-test tie window
constexpr double kDegenStep = 1e-9; // steps below this count as degenerate
} // namespace

Simplex::Simplex(const LinearProgram& lp, const SolverConfig& cfg) : cfg_(cfg) { build(lp); }

void Simplex::build(const LinearProgram& lp) {
    m_ = lp.num_rows();
    n_ = lp.num_vars();
    ncols_ = n_ + 2 * m_;

    cols_.assign(n_, {});
    rhs_.assign(m_, 0.0);
    lb_.assign(ncols_, 0.0);
    ub_.assign(ncols_, 0.0);
    cost2_.assign(ncols_, 0.0);
    art_sign_.assign(m_, 1.0);

    for (int j = 0; j < n_; ++j) {
        double l = lp.lower[j], u = lp.upper[j];
        if (std::isnan(l) || std::isnan(u) || std::isnan(lp.objective[j]))
            throw SolverError("nan in variable data: " + lp.var_names[j]);
        lb_[j] = l;
        ub_[j] = u;
        cost2_[j] = lp.objective[j];
    }
    lb0_.assign(lb_.begin(), lb_.begin() + n_);
    ub0_.assign(ub_.begin(), ub_.begin() + n_);

    std::map<int, double> merged;
    for (int r = 0; r < m_; ++r) {
        const auto& row = lp.rows[r];
        if (std::isnan(row.rhs)) throw SolverError("nan rhs in row " + row.name);
        merged.clear();
        for (auto [j, v] : row.coeffs) {
            if (j < 0 || j >= n_) throw SolverError("bad variable index in row " + row.name);
            if (std::isnan(v) || std::isinf(v)) throw SolverError("bad coefficient in row " + row.name);
            merged[j] += v;
        }
        for (auto [j, v] : merged)
            if (v != 0.0) cols_[j].push_back({r, v});
        rhs_[r] = row.rhs;
        // slack bounds by sense: row + slack == rhs
        int s = slack_col(r);
        switch (row.sense) {
        case RowSense::LessEqual: lb_[s] = 0.0; ub_[s] = kInf; break;
        case RowSense::GreaterEqual: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case RowSense::Equal: lb_[s] = 0.0; ub_[s] = 0.0; break;
        }
        // artificial slots stay fixed at zero until phase 1 activates them
        lb_[art_col(r)] = 0.0;
        ub_[art_col(r)] = 0.0;
        bnorm_ = std::max(bnorm_, std::abs(row.rhs));
    }
    // cols_ built row-by-row in ascending row order already
    bnorm_ += 1.0;
    xval_.assign(ncols_, 0.0);
    state_.assign(ncols_, VarState::AtLower);
    restoring_.assign(ncols_, 0);
    work_.resize(m_);
    work2_.resize(m_);
}

template <typename F> void Simplex::for_each_entry(int col, F&& f) const {
    if (col < n_) {
        for (auto [r, v] : cols_[col]) f(r, v);
    } else if (col < n_ + m_) {
        f(col - n_, 1.0);
    } else {
        f(col - n_ - m_, art_sign_[col - n_ - m_]);
    }
}

double Simplex::col_dot(int col, const Eigen::VectorXd& v) const {
    double acc = 0.0;
    for_each_entry(col, [&](int r, double a) { acc += a * v[r]; });
    return acc;
}

void Simplex::snap_nonbasic(int col) {
    if (state_[col] == VarState::Basic) return;
    double l = lb_[col], u = ub_[col];
    if (l == u) {
        state_[col] = VarState::AtLower;
        xval_[col] = l;
        return;
    }
    switch (state_[col]) {
    case VarState::AtLower:
        if (l != -kInf) {
            xval_[col] = l;
        } else if (u != kInf) {
            state_[col] = VarState::AtUpper;
            xval_[col] = u;
        } else {
            state_[col] = VarState::FreeAtZero;
            xval_[col] = 0.0;
        }
        break;
    case VarState::AtUpper:
        if (u != kInf) {
            xval_[col] = u;
        } else if (l != -kInf) {
            state_[col] = VarState::AtLower;
            xval_[col] = l;
        } else {
            state_[col] = VarState::FreeAtZero;
            xval_[col] = 0.0;
        }
        break;
    case VarState::FreeAtZero:
        if (l != -kInf) {
            state_[col] = VarState::AtLower;
            xval_[col] = l;
        } else if (u != kInf) {
            state_[col] = VarState::AtUpper;
            xval_[col] = u;
        } else {
            xval_[col] = 0.0;
        }
        break;
    case VarState::Basic: break;
    }
}

void Simplex::set_bounds(int col, double l, double u) {
    lb_[col] = l;
    ub_[col] = u;
    snap_nonbasic(col);
}

void Simplex::reset_bounds() {
    for (int j = 0; j < n_; ++j) {
        lb_[j] = lb0_[j];
        ub_[j] = ub0_[j];
        snap_nonbasic(j);
    }
}

void Simplex::restore(const BasisSnapshot& s) {
    basic_ = s.basic;
    state_ = s.state;
    basis_pos_.assign(ncols_, -1);
    for (int r = 0; r < m_; ++r) basis_pos_[basic_[r]] = r;
    for (int j = 0; j < ncols_; ++j)
        if (state_[j] != VarState::Basic) snap_nonbasic(j);
    lu_valid_ = false;
    etas_.clear();
    initialized_ = true;
}

void Simplex::init_states() {
    basic_.assign(m_, -1);
    basis_pos_.assign(ncols_, -1);
    for (int r = 0; r < m_; ++r) {
        int s = slack_col(r);
        basic_[r] = s;
        basis_pos_[s] = r;
        state_[s] = VarState::Basic;
        // deactivate artificials
        int a = art_col(r);
        lb_[a] = 0.0;
        ub_[a] = 0.0;
        art_sign_[r] = 1.0;
        state_[a] = VarState::AtLower;
        xval_[a] = 0.0;
    }
    for (int j = 0; j < n_; ++j) {
        state_[j] = VarState::AtLower;
        snap_nonbasic(j);
    }
    etas_.clear();
    lu_valid_ = false;
}

bool Simplex::factorize() {
    etas_.clear();
    if (m_ == 0) {
        lu_valid_ = true;
        return true;
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(m_) * 4);
    for (int r = 0; r < m_; ++r)
        for_each_entry(basic_[r], [&](int row, double v) { trips.emplace_back(row, r, v); });
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(B);
    lu_valid_ = lu_.info() == Eigen::Success;
    return lu_valid_;
}

void Simplex::ftran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    v = lu_.solve(v);
    for (const auto& e : etas_) {
        double t = v[e.row] / e.pivot;
        if (t != 0.0)
            for (auto [i, val] : e.entries) v[i] -= val * t;
        v[e.row] = t;
    }
}

void Simplex::btran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double acc = v[it->row];
        for (auto [i, val] : it->entries) acc -= val * v[i];
        v[it->row] = acc / it->pivot;
    }
    v = lu_.adjoint().solve(v);
}

void Simplex::compute_basics() {
    if (m_ == 0) return;
    for (int r = 0; r < m_; ++r) work_[r] = rhs_[r];
    for (int j = 0; j < ncols_; ++j) {
        if (state_[j] == VarState::Basic || xval_[j] == 0.0) continue;
        double x = xval_[j];
        for_each_entry(j, [&](int r, double v) { work_[r] -= v * x; });
    }
    ftran(work_);
    for (int r = 0; r < m_; ++r) xval_[basic_[r]] = work_[r];
}

int Simplex::violation_side(int col) const {
    double x = xval_[col];
    if (x < lb_[col] - bound_tol(lb_[col])) return -1;
    if (x > ub_[col] + bound_tol(ub_[col])) return +1;
    return 0;
}

double Simplex::total_infeasibility() const {
    double t = 0.0;
    for (int r = 0; r < m_; ++r) {
        int c = basic_[r];
        if (xval_[c] < lb_[c])
            t += lb_[c] - xval_[c];
        else if (xval_[c] > ub_[c])
            t += xval_[c] - ub_[c];
    }
    return t;
}

double Simplex::eval_objective(const std::vector<double>& cost) const {
    double acc = 0.0;
    for (size_t j = 0; j < cost.size(); ++j)
        if (cost[j] != 0.0) acc += cost[j] * xval_[j];
    return acc;
}

// One simplex phase: price with `cost`, pivot until optimal for that cost.
// goal_col >= 0 stops as soon as that column's bound violation clears.
// Feasibility phases pass allow_unbounded = false: their objectives are
// bounded below by construction, so an unblocked direction there is always
// pricing/ratio-test disagreement through stale eta files, never a ray.
Simplex::RunOutcome Simplex::run(const std::vector<double>& cost, int goal_col,
                                 bool allow_unbounded) {
    bland_ = false;
    degen_streak_ = 0;
    double cscale = 1.0;
    for (double c : cost) cscale = std::max(cscale, std::abs(c));
    const double dtol = cfg_.opt_tol * cscale;

    std::vector<int> rejected; // entering columns rejected for tiny pivots this round
    std::vector<int> restore_scan;
    if (restoring_count_ > 0)
        for (int j = 0; j < ncols_; ++j)
            if (restoring_[j]) restore_scan.push_back(j);

    while (true) {
        if (iterations_ - iter_base_ >= cfg_.max_iterations) return RunOutcome::IterLimit;
        if (static_cast<int>(etas_.size()) >= cfg_.refactor_interval) {
            if (!factorize()) throw SolverError("basis factorization failed mid-solve");
            compute_basics();
        }

        // pricing: y = B^-T c_B, then reduced costs column by column
        if (m_ > 0) {
            for (int r = 0; r < m_; ++r) work_[r] = phase_cost(cost, basic_[r]);
            btran(work_);
        }
        int q = -1, dir = 0;
        double best = dtol;
        for (int j = 0; j < ncols_; ++j) {
            VarState st = state_[j];
            if (st == VarState::Basic) continue;
            if (ub_[j] - lb_[j] <= 0.0) continue; // fixed
            if (!rejected.empty() &&
                std::find(rejected.begin(), rejected.end(), j) != rejected.end())
                continue;
            double d = phase_cost(cost, j) - (m_ > 0 ? col_dot(j, work_) : 0.0);
            int cand_dir = 0;
            if (st == VarState::AtLower && d < -dtol)
                cand_dir = +1;
            else if (st == VarState::AtUpper && d > dtol)
                cand_dir = -1;
            else if (st == VarState::FreeAtZero && std::abs(d) > dtol)
                cand_dir = d < 0 ? +1 : -1;
            if (cand_dir == 0) continue;
            if (bland_) { // lowest eligible index
                q = j;
                dir = cand_dir;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                q = j;
                dir = cand_dir;
            }
        }
        if (q < 0) return RunOutcome::PhaseOptimal;

        // direction through the basis
        for (int r = 0; r < m_; ++r) work2_[r] = 0.0;
        for_each_entry(q, [&](int r, double v) { work2_[r] = v; });
        ftran(work2_);

        // ratio test
        double t_own = (lb_[q] != -kInf && ub_[q] != kInf) ? ub_[q] - lb_[q] : kInf;
        double t_best = kInf;
        int r_best = -1;
        double pivot_best = 0.0;
        VarState land_best = VarState::AtLower;
        for (int r = 0; r < m_; ++r) {
            double wr = work2_[r];
            if (std::abs(wr) <= kDrop) continue;
            int i = basic_[r];
            double rate = -dir * wr; // dx_i / dt
            double allow;
            VarState land;
            int vs = restoring_[i] ? violation_side(i) : 0;
            if (vs < 0) { // below lower bound: block only when climbing back to it
                if (rate <= kDrop) continue;
                allow = (lb_[i] - xval_[i]) / rate;
                land = VarState::AtLower;
            } else if (vs > 0) {
                if (rate >= -kDrop) continue;
                allow = (ub_[i] - xval_[i]) / rate;
                land = VarState::AtUpper;
            } else if (rate > kDrop) {
                if (ub_[i] == kInf) continue;
                allow = (ub_[i] - xval_[i]) / rate;
                land = VarState::AtUpper;
            } else if (rate < -kDrop) {
                if (lb_[i] == -kInf) continue;
                allow = (lb_[i] - xval_[i]) / rate;
                land = VarState::AtLower;
            } else {
                continue;
            }
            if (allow < 0.0) allow = 0.0;
            bool better;
            if (r_best < 0)
                better = allow < kInf;
            else if (allow < t_best - kTieTol)
                better = true;
            else if (allow > t_best + kTieTol)
                better = false;
            else if (bland_)
                better = i < basic_[r_best];
            else if (std::abs(wr) > std::abs(pivot_best) + kTieTol)
                better = true;
            else if (std::abs(wr) < std::abs(pivot_best) - kTieTol)
                better = false;
            else
                better = i < basic_[r_best];
            if (better) {
                t_best = allow;
                r_best = r;
                pivot_best = wr;
                land_best = land;
            }
        }

        if (r_best < 0 && t_own == kInf) {
            if (!etas_.empty()) { // re-derive the direction from a fresh basis
                if (!factorize()) throw SolverError("basis factorization failed mid-solve");
                compute_basics();
                continue;
            }
            if (!allow_unbounded) { // bounded phase: the column is numerically unusable
                rejected.push_back(q);
                continue;
            }
            return RunOutcome::Unbounded;
        }

        if (r_best >= 0 && t_best < t_own) {
            // basis change; guard the pivot magnitude
            if (std::abs(pivot_best) < cfg_.pivot_tol) {
                if (!etas_.empty()) { // try again with a fresh factorization
                    if (!factorize()) throw SolverError("basis factorization failed mid-solve");
                    compute_basics();
                    continue;
                }
                rejected.push_back(q);
                continue;
            }
            double t = t_best;
            if (t > 0.0)
                for (int r = 0; r < m_; ++r)
                    if (std::abs(work2_[r]) > kDrop) xval_[basic_[r]] -= dir * t * work2_[r];
            double start = state_[q] == VarState::AtLower   ? lb_[q]
                           : state_[q] == VarState::AtUpper ? ub_[q]
                                                            : 0.0;
            xval_[q] = start + dir * t;
            int leave = basic_[r_best];
            xval_[leave] = land_best == VarState::AtLower ? lb_[leave] : ub_[leave];
            state_[leave] = land_best;
            basis_pos_[leave] = -1;
            basic_[r_best] = q;
            basis_pos_[q] = r_best;
            state_[q] = VarState::Basic;
            Eta eta;
            eta.row = r_best;
            eta.pivot = pivot_best;
            for (int r = 0; r < m_; ++r)
                if (r != r_best && std::abs(work2_[r]) > kDrop) eta.entries.push_back({r, work2_[r]});
            etas_.push_back(std::move(eta));
            ++iterations_;
            rejected.clear();
            if (restoring_[leave] && violation_side(leave) == 0) {
                restoring_[leave] = 0;
                --restoring_count_;
            }
            if (t <= kDegenStep) {
                if (++degen_streak_ > cfg_.bland_trigger) bland_ = true;
            } else {
                degen_streak_ = 0;
                bland_ = false;
            }
        } else {
            // bound flip (t_own <= t_best), entering never becomes basic
            if (t_own == kInf) return RunOutcome::Unbounded;
            double t = t_own;
            for (int r = 0; r < m_; ++r)
                if (std::abs(work2_[r]) > kDrop) xval_[basic_[r]] -= dir * t * work2_[r];
            state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
            xval_[q] = dir > 0 ? ub_[q] : lb_[q];
            ++iterations_;
            rejected.clear();
            if (t <= kDegenStep) {
                if (++degen_streak_ > cfg_.bland_trigger) bland_ = true;
            } else {
                degen_streak_ = 0;
                bland_ = false;
            }
        }

        if (restoring_count_ > 0) {
            for (int j : restore_scan)
                if (restoring_[j] && (state_[j] != VarState::Basic || violation_side(j) == 0)) {
                    restoring_[j] = 0;
                    --restoring_count_;
                }
            if (goal_col >= 0 && !restoring_[goal_col]) return RunOutcome::GoalReached;
        }
    }
}

// Classic artificial-variable phase 1 from the all-slack basis.
SolveStatus Simplex::cold_phase1() {
    int nviol = 0;
    for (int r = 0; r < m_; ++r)
        if (violation_side(basic_[r]) != 0) ++nviol;
    if (nviol == 0) return SolveStatus::Optimal;

    std::vector<double> cost1(ncols_, 0.0);
    for (int r = 0; r < m_; ++r) {
        int s = basic_[r];
        if (violation_side(s) == 0) continue;
        // the cold basis holds the row's slack here; park it at zero and hand
        // the residual to the artificial
        double resid = xval_[s];
        state_[s] = lb_[s] == -kInf ? VarState::AtUpper : VarState::AtLower;
        xval_[s] = 0.0;
        int a = art_col(r);
        art_sign_[r] = resid >= 0.0 ? 1.0 : -1.0;
        lb_[a] = 0.0;
        ub_[a] = kInf;
        basic_[r] = a;
        basis_pos_[s] = -1;
        basis_pos_[a] = r;
        state_[a] = VarState::Basic;
        xval_[a] = std::abs(resid);
        cost1[a] = 1.0;
    }
    if (!factorize()) throw SolverError("phase-1 basis factorization failed");
    compute_basics();

    RunOutcome out = run(cost1, -1, false);
    if (out == RunOutcome::IterLimit) return SolveStatus::IterationLimit;
    if (out == RunOutcome::Unbounded) throw SolverError("phase 1 reported unbounded");
    double infeas = eval_objective(cost1);
    if (infeas > 1e-7 * bnorm_) return SolveStatus::Infeasible;
    for (int r = 0; r < m_; ++r) {
        int a = art_col(r);
        lb_[a] = 0.0;
        ub_[a] = 0.0;
        if (state_[a] != VarState::Basic) {
            state_[a] = VarState::AtLower;
            xval_[a] = 0.0;
        } else {
            xval_[a] = 0.0; // basic at (numerically) zero on a dependent row
        }
    }
    return SolveStatus::Optimal;
}

// Warm-start feasibility: for each violated basic column, relax the violated
// bound and minimize the excursion until the column re-enters its box.
SolveStatus Simplex::restore_feasibility() {
    std::vector<int> viols;
    for (int r = 0; r < m_; ++r) {
        int c = basic_[r];
        if (violation_side(c) != 0 && !restoring_[c]) {
            restoring_[c] = 1;
            ++restoring_count_;
            viols.push_back(c);
        }
    }
    if (viols.empty()) return SolveStatus::Optimal;
    std::sort(viols.begin(), viols.end());

    std::vector<double> costR(ncols_, 0.0);
    for (int v : viols) {
        if (!restoring_[v]) continue; // recovered while restoring another column
        int side = violation_side(v);
        if (side == 0) {
            restoring_[v] = 0;
            --restoring_count_;
            continue;
        }
        costR[v] = side > 0 ? 1.0 : -1.0;
        RunOutcome out = run(costR, v, false);
        costR[v] = 0.0;
        if (out == RunOutcome::IterLimit) {
            for (int j : viols)
                if (restoring_[j]) {
                    restoring_[j] = 0;
                    --restoring_count_;
                }
            return SolveStatus::IterationLimit;
        }
        if (out == RunOutcome::Unbounded) throw SolverError("feasibility phase reported unbounded");
        if (out == RunOutcome::PhaseOptimal && restoring_[v]) {
            if (violation_side(v) != 0) {
                for (int j : viols)
                    if (restoring_[j]) {
                        restoring_[j] = 0;
                        --restoring_count_;
                    }
                return SolveStatus::Infeasible;
            }
            restoring_[v] = 0;
            --restoring_count_;
        }
    }
    // defensive: nothing must stay flagged between solves
    for (int j = 0; j < ncols_ && restoring_count_ > 0; ++j)
        if (restoring_[j]) {
            restoring_[j] = 0;
            --restoring_count_;
        }
    return SolveStatus::Optimal;
}

void Simplex::finalize() {
    if (!factorize()) throw SolverError("final basis factorization failed");
    compute_basics();
    for (int j = 0; j < ncols_; ++j) {
        if (state_[j] != VarState::Basic) continue;
        if (lb_[j] != -kInf && std::abs(xval_[j] - lb_[j]) <= bound_tol(lb_[j]))
            xval_[j] = lb_[j];
        else if (ub_[j] != kInf && std::abs(xval_[j] - ub_[j]) <= bound_tol(ub_[j]))
            xval_[j] = ub_[j];
    }
    objective_ = eval_objective(cost2_);
}

SolveStatus Simplex::solve() {
    iter_base_ = iterations_;
    // contradictory boxes are detectable without pivoting
    for (int j = 0; j < ncols_; ++j)
        if (lb_[j] > ub_[j]) {
            objective_ = 0.0;
            return SolveStatus::Infeasible;
        }

    SolveStatus feas = SolveStatus::Optimal;
    if (!initialized_) {
        init_states();
        if (!factorize()) throw SolverError("slack basis factorization failed");
        compute_basics();
        feas = cold_phase1();
        initialized_ = true;
    } else {
        bool ok = lu_valid_ && etas_.empty();
        if (!ok && !factorize()) {
            // restored basis went numerically singular: rebuild from scratch
            init_states();
            if (!factorize()) throw SolverError("slack basis factorization failed");
            compute_basics();
            feas = cold_phase1();
        } else {
            compute_basics();
            feas = restore_feasibility();
        }
    }
    if (feas != SolveStatus::Optimal) {
        objective_ = eval_objective(cost2_);
        return feas;
    }

    for (int attempt = 0; attempt < 3; ++attempt) {
        RunOutcome out = run(cost2_, -1, true);
        if (out == RunOutcome::Unbounded) {
            objective_ = eval_objective(cost2_);
            return SolveStatus::Unbounded;
        }
        if (out == RunOutcome::IterLimit) {
            objective_ = eval_objective(cost2_);
            return SolveStatus::IterationLimit;
        }
        finalize();
        double worst = 0.0;
        for (int r = 0; r < m_; ++r) {
            int c = basic_[r];
            if (xval_[c] < lb_[c])
                worst = std::max(worst, lb_[c] - xval_[c]);
            else if (xval_[c] > ub_[c])
                worst = std::max(worst, xval_[c] - ub_[c]);
        }
        if (worst <= 1e-7 * bnorm_) return SolveStatus::Optimal;
        SolveStatus st = restore_feasibility(); // numerical drift: repair and re-optimize
        if (st != SolveStatus::Optimal) {
            objective_ = eval_objective(cost2_);
            return st;
        }
    }
    throw SolverError("numerical instability: feasibility could not be held at optimum");
}

std::vector<double> Simplex::structural_x() const {
    return std::vector<double>(xval_.begin(), xval_.begin() + n_);
}

std::vector<double> Simplex::row_duals() {
    if (m_ == 0) return {};
    if (!lu_valid_ || !etas_.empty()) {
        if (!factorize()) throw SolverError("dual extraction factorization failed");
        compute_basics();
    }
    for (int r = 0; r < m_; ++r) work_[r] = cost2_[basic_[r]];
    btran(work_);
    std::vector<double> y(m_);
    for (int r = 0; r < m_; ++r) y[r] = work_[r];
    return y;
}

std::vector<double> Simplex::structural_reduced_costs() {
    std::vector<double> d(n_, 0.0);
    if (m_ == 0) {
        for (int j = 0; j < n_; ++j) d[j] = cost2_[j];
        return d;
    }
    std::vector<double> y = row_duals(); // leaves a clean factorization behind
    Eigen::VectorXd yv(m_);
    for (int r = 0; r < m_; ++r) yv[r] = y[r];
    for (int j = 0; j < n_; ++j)
        d[j] = state_[j] == VarState::Basic ? 0.0 : cost2_[j] - col_dot(j, yv);
    return d;
}

} // namespace resdim::detail
