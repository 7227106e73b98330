#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

#include "resdim/errors.hpp"
#include "resdim/lp.hpp"
#include "simplex.hpp"

namespace resdim {

namespace {

struct Fix {
    int var;
    double lb, ub;
};

struct Node {
    double bound = -kInf; // parent relaxation objective
    long id = 0;
    std::vector<Fix> fixes;
    std::shared_ptr<const detail::BasisSnapshot> warm;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound; // min-bound first
        return a.id > b.id;                               // then oldest first
    }
};

// Full feasibility check for incumbent candidates; heuristic solutions never
// enter the incumbent slot unverified.
bool verify_candidate(const MixedIntegerProgram& mip, const SolverConfig& cfg,
                      const std::vector<double>& v) {
    const auto& lp = mip.lp;
    if (static_cast<int>(v.size()) != lp.num_vars()) return false;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (!std::isfinite(v[j])) return false;
        double tol = 1e-7;
        if (lp.lower[j] != -kInf && v[j] < lp.lower[j] - tol * (1.0 + std::abs(lp.lower[j])))
            return false;
        if (lp.upper[j] != kInf && v[j] > lp.upper[j] + tol * (1.0 + std::abs(lp.upper[j])))
            return false;
    }
    for (int j : mip.binaries)
        if (std::abs(v[j] - std::round(v[j])) > cfg.integrality_tol) return false;
    for (auto [a, b] : mip.complementarity)
        if (v[a] * v[b] > cfg.complementarity_tol) return false;
    for (const auto& row : lp.rows) {
        double acc = 0.0;
        for (auto [j, c] : row.coeffs) acc += c * v[j];
        double tol = 1e-7 * (1.0 + std::abs(row.rhs));
        switch (row.sense) {
        case RowSense::LessEqual:
            if (acc > row.rhs + tol) return false;
            break;
        case RowSense::GreaterEqual:
            if (acc < row.rhs - tol) return false;
            break;
        case RowSense::Equal:
            if (std::abs(acc - row.rhs) > tol) return false;
            break;
        }
    }
    return true;
}

double candidate_objective(const LinearProgram& lp, const std::vector<double>& v) {
    double acc = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) acc += lp.objective[j] * v[j];
    return acc;
}

SolveResult branch_and_bound(const MixedIntegerProgram& mip, const SolverConfig& cfg,
                             const MilpCallbacks& callbacks) {
    const auto& lp = mip.lp;
    for (int j : mip.binaries) {
        if (j < 0 || j >= lp.num_vars()) throw SolverError("binary index out of range");
        if (lp.lower[j] < -1e-12 || lp.upper[j] > 1.0 + 1e-12)
            throw SolverError("binary variable bounds must lie within [0, 1]: " +
                              lp.var_names[j]);
    }
    for (auto [a, b] : mip.complementarity) {
        if (a < 0 || a >= lp.num_vars() || b < 0 || b >= lp.num_vars())
            throw SolverError("complementarity index out of range");
        if (lp.lower[a] < -1e-12 || lp.lower[b] < -1e-12)
            throw SolverError("complementarity pair members must be nonnegative: " +
                              lp.var_names[a] + ", " + lp.var_names[b]);
    }

    detail::Simplex s(lp, cfg);
    SolveResult res;
    res.bound = -kInf;

    bool have_inc = false;
    double inc_obj = kInf;
    std::vector<double> inc_x;

    auto gap_tol = [&]() {
        return std::max(cfg.mip_gap_abs, cfg.mip_gap_rel * std::abs(inc_obj));
    };
    auto offer = [&](const std::vector<double>& v) {
        if (!verify_candidate(mip, cfg, v)) return;
        double obj = candidate_objective(lp, v);
        if (!have_inc || obj < inc_obj - 1e-12) {
            have_inc = true;
            inc_obj = obj;
            inc_x = v;
        }
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{});
    long next_id = 1;
    long processed = 0;
    double best_bound = -kInf;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        best_bound = std::max(best_bound, node.bound);
        if (have_inc && node.bound >= inc_obj - gap_tol()) {
            // best-bound order: everything left is at least this node's bound
            best_bound = std::max(best_bound, std::min(node.bound, inc_obj));
            break;
        }
        if (processed >= cfg.max_nodes) {
            res.status = SolveStatus::IterationLimit;
            res.objective = have_inc ? inc_obj : 0.0;
            res.x = inc_x;
            res.bound = best_bound;
            res.gap = have_inc ? inc_obj - best_bound : kInf;
            res.iterations = s.iterations();
            res.nodes = processed;
            return res;
        }
        ++processed;

        if (node.warm) s.restore(*node.warm);
        s.reset_bounds();
        for (const auto& f : node.fixes) s.set_bounds(f.var, f.lb, f.ub);
        SolveStatus st = s.solve();

        if (st == SolveStatus::Infeasible) continue;
        if (st == SolveStatus::Unbounded) {
            // only reachable at the root: children are restrictions of a
            // bounded parent, and binaries/pair members are box-bounded
            res.status = SolveStatus::Unbounded;
            res.bound = -kInf;
            res.iterations = s.iterations();
            res.nodes = processed;
            return res;
        }
        if (st == SolveStatus::IterationLimit) {
            res.status = SolveStatus::IterationLimit;
            res.objective = have_inc ? inc_obj : 0.0;
            res.x = inc_x;
            res.bound = best_bound;
            res.gap = have_inc ? inc_obj - best_bound : kInf;
            res.iterations = s.iterations();
            res.nodes = processed;
            return res;
        }

        double obj = s.objective();
        if (processed == 1) best_bound = std::max(best_bound, obj);
        if (have_inc && obj >= inc_obj - gap_tol()) continue;

        std::vector<double> x = s.structural_x();

        // violation scan
        int frac_var = -1;
        double frac_best = cfg.integrality_tol;
        for (int j : mip.binaries) {
            double f = std::abs(x[j] - std::round(x[j]));
            if (f > frac_best + 1e-15) {
                frac_best = f;
                frac_var = j;
            }
        }
        int pair_idx = -1;
        double pair_best = cfg.complementarity_tol;
        for (size_t k = 0; k < mip.complementarity.size(); ++k) {
            auto [a, b] = mip.complementarity[k];
            double p = x[a] * x[b];
            if (p > pair_best + 1e-15) {
                pair_best = p;
                pair_idx = static_cast<int>(k);
            }
        }

        if (frac_var < 0 && pair_idx < 0) {
            offer(x); // node relaxation is integral and complementary
            continue;
        }

        if (callbacks.candidate) {
            if (auto cand = callbacks.candidate(x)) offer(*cand);
        }
        if (cfg.rounding_heuristic_interval > 0 &&
            processed % cfg.rounding_heuristic_interval == 0) {
            std::vector<double> r = x;
            for (int j : mip.binaries) r[j] = std::round(r[j]);
            for (auto [a, b] : mip.complementarity) {
                if (r[a] * r[b] <= cfg.complementarity_tol) continue;
                if (r[a] < r[b])
                    r[a] = 0.0;
                else
                    r[b] = 0.0;
            }
            offer(r);
        }
        if (have_inc && obj >= inc_obj - gap_tol()) continue; // heuristic may have closed it

        auto warm = std::make_shared<detail::BasisSnapshot>(s.snapshot());
        Node left, right;
        left.bound = right.bound = obj;
        left.fixes = node.fixes;
        right.fixes = node.fixes;
        left.warm = right.warm = warm;
        // fixes intersect the original box so a variable that cannot reach the
        // fixed value yields an infeasible child instead of a relaxed bound
        if (frac_var >= 0) {
            left.fixes.push_back(
                {frac_var, lp.lower[frac_var], std::min(lp.upper[frac_var], 0.0)});
            right.fixes.push_back(
                {frac_var, std::max(lp.lower[frac_var], 1.0), lp.upper[frac_var]});
        } else {
            auto [a, b] = mip.complementarity[pair_idx];
            left.fixes.push_back({a, lp.lower[a], std::min(lp.upper[a], 0.0)});
            right.fixes.push_back({b, lp.lower[b], std::min(lp.upper[b], 0.0)});
        }
        left.id = next_id++;
        right.id = next_id++;
        open.push(std::move(left));
        open.push(std::move(right));
    }

    res.iterations = s.iterations();
    res.nodes = processed;
    if (!have_inc) {
        res.status = SolveStatus::Infeasible;
        res.bound = 0.0;
        return res;
    }
    if (open.empty()) best_bound = inc_obj; // search exhausted: proof complete
    res.status = SolveStatus::Optimal;
    res.objective = inc_obj;
    res.x = inc_x;
    res.bound = std::min(best_bound, inc_obj);
    res.gap = inc_obj - res.bound;
    return res;
}

// Reformulate complementarity pairs with indicator binaries: x_a <= M_a * y,
// x_b <= M_b * (1 - y). Sound only if the M bounds truly dominate the pair
// members, so the audit below rejects solutions that crowd their M.
SolveResult solve_big_m(const MixedIntegerProgram& mip, const SolverConfig& cfg,
                        const MilpCallbacks& callbacks) {
    if (mip.big_m.size() != mip.complementarity.size())
        throw SolverError("big-M mode requires one (M_a, M_b) bound per complementarity pair");
    MixedIntegerProgram wide;
    wide.lp = mip.lp;
    wide.binaries = mip.binaries;
    const int n0 = mip.lp.num_vars();
    for (size_t k = 0; k < mip.complementarity.size(); ++k) {
        auto [a, b] = mip.complementarity[k];
        auto [ma, mb] = mip.big_m[k];
        if (!(ma > 0.0) || !(mb > 0.0) || !std::isfinite(ma) || !std::isfinite(mb))
            throw SolverError("big-M bounds must be finite and positive");
        int y = wide.lp.add_variable("bigm_y" + std::to_string(k), 0.0, 1.0, 0.0);
        wide.binaries.push_back(y);
        wide.lp.add_row("bigm_a" + std::to_string(k), RowSense::LessEqual, 0.0,
                        {{a, 1.0}, {y, -ma}});
        wide.lp.add_row("bigm_b" + std::to_string(k), RowSense::LessEqual, mb,
                        {{b, 1.0}, {y, mb}});
    }

    MilpCallbacks inner;
    if (callbacks.candidate) {
        inner.candidate =
            [&](const std::vector<double>& x) -> std::optional<std::vector<double>> {
            std::vector<double> base(x.begin(), x.begin() + n0);
            auto cand = callbacks.candidate(base);
            if (!cand) return std::nullopt;
            // re-derive the indicator settings the candidate implies
            cand->resize(wide.lp.num_vars(), 0.0);
            for (size_t k = 0; k < mip.complementarity.size(); ++k) {
                auto [a, b] = mip.complementarity[k];
                (*cand)[n0 + static_cast<int>(k)] = (*cand)[a] > cfg.complementarity_tol ? 1.0 : 0.0;
            }
            return cand;
        };
    }

    SolveResult res = branch_and_bound(wide, cfg, inner);
    if (res.status == SolveStatus::Optimal && !res.x.empty()) {
        for (size_t k = 0; k < mip.complementarity.size(); ++k) {
            auto [a, b] = mip.complementarity[k];
            auto [ma, mb] = mip.big_m[k];
            if (res.x[a] > 0.99 * ma || res.x[b] > 0.99 * mb)
                throw SolverError("big-M audit failed: a pair member sits within 1% of its M");
        }
        res.x.resize(n0);
    }
    return res;
}

} // namespace

SolveResult solve_milp(const MixedIntegerProgram& mip, const SolverConfig& cfg,
                       const MilpCallbacks& callbacks) {
    if (mip.binaries.empty() && mip.complementarity.empty()) return solve_lp(mip.lp, cfg);
    if (cfg.complementarity_big_m && !mip.complementarity.empty())
        return solve_big_m(mip, cfg, callbacks);
    return branch_and_bound(mip, cfg, callbacks);
}

} // namespace resdim
