#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "resdim/lp.hpp"

namespace resdim::test {

// Exhaustive vertex enumeration for small LPs: every choice of n active
// constraints among {rows-as-equalities, variable bounds} is solved densely,
// feasible candidates are kept, and the best objective wins. Independent of
// the simplex code path by construction.
inline std::optional<double> vertex_enum_optimum(const LinearProgram& lp,
                                                 double feas_tol = 1e-7) {
    const int n = lp.num_vars();
    struct Con {
        std::vector<double> a;
        double rhs;
    };
    std::vector<Con> cons;
    for (const auto& row : lp.rows) {
        Con c{std::vector<double>(n, 0.0), row.rhs};
        for (auto [j, v] : row.coeffs) c.a[j] += v;
        cons.push_back(std::move(c));
    }
    for (int j = 0; j < n; ++j) {
        if (lp.lower[j] != -kInf) {
            Con c{std::vector<double>(n, 0.0), lp.lower[j]};
            c.a[j] = 1.0;
            cons.push_back(std::move(c));
        }
        if (lp.upper[j] != kInf) {
            Con c{std::vector<double>(n, 0.0), lp.upper[j]};
            c.a[j] = 1.0;
            cons.push_back(std::move(c));
        }
    }
    const int total = static_cast<int>(cons.size());
    if (total < n) return std::nullopt;

    auto feasible = [&](const Eigen::VectorXd& x) {
        for (int j = 0; j < n; ++j) {
            if (lp.lower[j] != -kInf && x[j] < lp.lower[j] - feas_tol) return false;
            if (lp.upper[j] != kInf && x[j] > lp.upper[j] + feas_tol) return false;
        }
        for (const auto& row : lp.rows) {
            double acc = 0.0;
            for (auto [j, v] : row.coeffs) acc += v * x[j];
            double tol = feas_tol * (1.0 + std::abs(row.rhs));
            if (row.sense == RowSense::LessEqual && acc > row.rhs + tol) return false;
            if (row.sense == RowSense::GreaterEqual && acc < row.rhs - tol) return false;
            if (row.sense == RowSense::Equal && std::abs(acc - row.rhs) > tol) return false;
        }
        return true;
    };

    std::optional<double> best;
    std::vector<int> pick(n);
    // iterate combinations of size n out of `total`
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    bool done = n > total;
    while (!done) {
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd b(n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) A(r, c) = cons[idx[r]].a[c];
            b[r] = cons[idx[r]].rhs;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible()) {
            Eigen::VectorXd x = lu.solve(b);
            if (feasible(x)) {
                double obj = 0.0;
                for (int j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
                if (!best || obj < *best) best = obj;
            }
        }
        // next combination
        int i = n - 1;
        while (i >= 0 && idx[i] == total - n + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int k = i + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
    }
    return best;
}

// Random box-bounded LP, feasible by construction: row right-hand sides are
// anchored on a random interior point.
inline LinearProgram random_feasible_lp(std::mt19937& rng, int max_vars = 5, int max_rows = 5) {
    std::uniform_int_distribution<int> nv(1, max_vars), nr(0, max_rows);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> cost(-10.0, 10.0);
    std::uniform_real_distribution<double> coef(-5.0, 5.0);

    LinearProgram lp;
    const int n = nv(rng);
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
        double lb = std::floor(u01(rng) * 4.0);
        double ub = lb + 1.0 + std::floor(u01(rng) * 9.0);
        lp.add_variable("x" + std::to_string(j), lb, ub, cost(rng));
        x0[j] = lb + u01(rng) * (ub - lb);
    }
    const int m = nr(rng);
    for (int r = 0; r < m; ++r) {
        std::vector<std::pair<int, double>> coeffs;
        double lhs = 0.0;
        for (int j = 0; j < n; ++j) {
            if (u01(rng) < 0.6) {
                double v = coef(rng);
                if (v == 0.0) continue;
                coeffs.push_back({j, v});
                lhs += v * x0[j];
            }
        }
        if (coeffs.empty()) continue;
        double roll = u01(rng);
        if (roll < 0.4)
            lp.add_row("r" + std::to_string(r), RowSense::LessEqual, lhs + u01(rng) * 5.0, coeffs);
        else if (roll < 0.8)
            lp.add_row("r" + std::to_string(r), RowSense::GreaterEqual, lhs - u01(rng) * 5.0,
                       coeffs);
        else
            lp.add_row("r" + std::to_string(r), RowSense::Equal, lhs, coeffs);
    }
    return lp;
}

// Duality checks for an Optimal result on a minimization:
//   objective == y'b + d'x   (within tol, bounded-variable convention)
//   sign conventions per row sense, complementary slackness on rows and bounds
inline void check_duality(const LinearProgram& lp, const SolveResult& res, double tol,
                          std::vector<std::string>& failures) {
    auto fail = [&](const std::string& s) { failures.push_back(s); };
    double ydotb = 0.0;
    for (int r = 0; r < lp.num_rows(); ++r) ydotb += res.duals[r] * lp.rows[r].rhs;
    double dterm = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) dterm += res.reduced_costs[j] * res.x[j];
    if (std::abs(res.objective - (ydotb + dterm)) > tol * (1.0 + std::abs(res.objective)))
        fail("strong duality identity violated");

    for (int r = 0; r < lp.num_rows(); ++r) {
        const auto& row = lp.rows[r];
        double acc = 0.0;
        for (auto [j, v] : row.coeffs) acc += v * res.x[j];
        double slack = row.rhs - acc;
        double rtol = tol * (1.0 + std::abs(row.rhs));
        switch (row.sense) {
        case RowSense::LessEqual:
            if (acc > row.rhs + rtol) fail("row violated: " + row.name);
            if (res.duals[r] > tol) fail("sign of dual on <= row: " + row.name);
            if (slack > rtol && std::abs(res.duals[r]) > tol)
                fail("complementary slackness on row: " + row.name);
            break;
        case RowSense::GreaterEqual:
            if (acc < row.rhs - rtol) fail("row violated: " + row.name);
            if (res.duals[r] < -tol) fail("sign of dual on >= row: " + row.name);
            if (-slack > rtol && std::abs(res.duals[r]) > tol)
                fail("complementary slackness on row: " + row.name);
            break;
        case RowSense::Equal:
            if (std::abs(slack) > rtol) fail("row violated: " + row.name);
            break;
        }
    }
    for (int j = 0; j < lp.num_vars(); ++j) {
        double d = res.reduced_costs[j];
        bool atl = lp.lower[j] != -kInf &&
                   std::abs(res.x[j] - lp.lower[j]) <= tol * (1.0 + std::abs(lp.lower[j]));
        bool atu = lp.upper[j] != kInf &&
                   std::abs(res.x[j] - lp.upper[j]) <= tol * (1.0 + std::abs(lp.upper[j]));
        if (d > tol && !atl) fail("positive reduced cost off lower bound: " + lp.var_names[j]);
        if (d < -tol && !atu) fail("negative reduced cost off upper bound: " + lp.var_names[j]);
    }
}

} // namespace resdim::test
