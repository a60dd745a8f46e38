#include "mdiqkd/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdiqkd::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-10;
constexpr double kFeasTol = 1e-7;
constexpr double kPruneTol = 1e-12;

// Dense tableau for "min c.x, A x = b, x >= 0" once slacks/artificials are in.
// Column layout: structural | slack | artificial | rhs.
struct Tableau {
    std::size_t m = 0;       // rows
    std::size_t n_total = 0; // columns excluding rhs
    std::vector<std::vector<double>> a;  // m x (n_total + 1)
    std::vector<double> cost;            // n_total, current phase objective
    std::vector<std::size_t> basis;      // per row

    double rhs(std::size_t i) const { return a[i][n_total]; }

    void pivot(std::size_t prow, std::size_t pcol) {
        const double piv = a[prow][pcol];
        auto& row = a[prow];
        for (auto& v : row) v /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == prow) continue;
            const double f = a[i][pcol];
            if (f == 0.0) continue;
            auto& dst = a[i];
            for (std::size_t j = 0; j <= n_total; ++j) dst[j] -= f * row[j];
        }
        basis[prow] = pcol;
    }
};

// Reduced cost of column j under the current basis: c_j - c_B . B^{-1} A_j.
std::vector<double> reduced_costs(const Tableau& t) {
    std::vector<double> rc(t.cost);
    for (std::size_t i = 0; i < t.m; ++i) {
        const double cb = t.cost[t.basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < t.n_total; ++j) rc[j] -= cb * t.a[i][j];
    }
    return rc;
}

double basis_objective(const Tableau& t) {
    double z = 0.0;
    for (std::size_t i = 0; i < t.m; ++i) z += t.cost[t.basis[i]] * t.rhs(i);
    return z;
}

// Bland's rule: entering = lowest-index column with negative reduced cost,
// leaving = min ratio with lowest basis index on ties. Returns iterations,
// or -1 on unbounded.
int simplex_phase(Tableau& t, const std::vector<bool>& allowed, int max_iters) {
    int iters = 0;
    while (iters < max_iters) {
        const std::vector<double> rc = reduced_costs(t);
        std::size_t enter = t.n_total;
        for (std::size_t j = 0; j < t.n_total; ++j) {
            if (!allowed[j]) continue;
            if (rc[j] < -kReducedCostTol) {
                enter = j;
                break;
            }
        }
        if (enter == t.n_total) return iters;  // optimal
        std::size_t leave = t.m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.m; ++i) {
            const double aij = t.a[i][enter];
            if (aij <= kPivotTol) continue;
            const double ratio = t.rhs(i) / aij;
            if (ratio < best_ratio - 1e-15 ||
                (std::abs(ratio - best_ratio) <= 1e-15 && leave < t.m &&
                 t.basis[i] < t.basis[leave])) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave == t.m) return -1;  // unbounded
        t.pivot(leave, enter);
        ++iters;
    }
    throw std::runtime_error("lp: iteration limit exceeded");
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "?";
}

void Problem::add_row(std::vector<double> coeffs, double bound) {
    if (coeffs.size() != num_vars) throw std::invalid_argument("lp: row arity mismatch");
    rows.push_back(std::move(coeffs));
    bounds.push_back(bound);
}

Solution solve(const Problem& problem) {
    const std::size_t n = problem.num_vars;
    const std::size_t m_user = problem.rows.size();
    if (problem.objective.size() != n || problem.upper.size() != n)
        throw std::invalid_argument("lp: problem arity mismatch");

    // Work on a row-equilibrated copy of the user rows.
    std::vector<std::vector<double>> a(problem.rows);
    std::vector<double> b(problem.bounds);
    for (std::size_t i = 0; i < m_user; ++i) {
        double scale = std::abs(b[i]);
        for (std::size_t j = 0; j < n; ++j)
            scale = std::max(scale, std::abs(a[i][j]) * problem.upper[j]);
        if (scale <= 0.0) scale = 1.0;
        for (auto& v : a[i]) v /= scale;
        b[i] /= scale;
    }

    // Fix negligible variables at zero: their largest possible contribution to
    // every equilibrated row is below kPruneTol, and objective-relevant
    // variables are always kept.
    std::vector<double> sign_obj(n);
    for (std::size_t j = 0; j < n; ++j)
        sign_obj[j] = problem.maximize ? -problem.objective[j] : problem.objective[j];
    std::vector<bool> keep(n, false);
    std::vector<double> colmax(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m_user; ++i)
            colmax[j] = std::max(colmax[j], std::abs(a[i][j]));
        keep[j] = colmax[j] * problem.upper[j] > kPruneTol || sign_obj[j] != 0.0;
    }
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
        if (keep[j]) cols.push_back(j);
    const std::size_t nk = cols.size();

    // Column max-normalization: z_k = x_{cols[k]} * cs_k. Columns kept only
    // for the objective (all-zero coefficients) stay unscaled.
    std::vector<double> cs(nk, 1.0);
    for (std::size_t k = 0; k < nk; ++k)
        if (colmax[cols[k]] > 0.0) cs[k] = colmax[cols[k]];

    // Assemble all rows (user + upper bounds) in scaled variables.
    const std::size_t m = m_user + nk;
    std::vector<std::vector<double>> rows(m, std::vector<double>(nk, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t i = 0; i < m_user; ++i) {
        for (std::size_t k = 0; k < nk; ++k) rows[i][k] = a[i][cols[k]] / cs[k];
        rhs[i] = b[i];
    }
    for (std::size_t k = 0; k < nk; ++k) {
        const double ub = problem.upper[cols[k]] * cs[k];
        const double scale = std::max(1.0, ub);
        rows[m_user + k][k] = 1.0 / scale;
        rhs[m_user + k] = ub / scale;
    }

    // Tableau: structural nk + slack m + one artificial per negative-rhs row.
    std::vector<std::size_t> art_rows;
    for (std::size_t i = 0; i < m; ++i)
        if (rhs[i] < 0.0) art_rows.push_back(i);
    const std::size_t n_art = art_rows.size();

    Tableau t;
    t.m = m;
    t.n_total = nk + m + n_art;
    t.a.assign(m, std::vector<double>(t.n_total + 1, 0.0));
    t.basis.assign(m, 0);
    std::size_t art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double flip = rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < nk; ++k) t.a[i][k] = flip * rows[i][k];
        t.a[i][nk + i] = flip;  // slack
        t.a[i][t.n_total] = flip * rhs[i];
        if (flip < 0.0) {
            t.a[i][nk + m + art] = 1.0;
            t.basis[i] = nk + m + art;
            ++art;
        } else {
            t.basis[i] = nk + i;
        }
    }

    Solution sol;
    const int max_iters = 400 + 60 * static_cast<int>(m + nk);
    std::vector<bool> allow_all(t.n_total, true);

    if (n_art > 0) {
        t.cost.assign(t.n_total, 0.0);
        for (std::size_t j = nk + m; j < t.n_total; ++j) t.cost[j] = 1.0;
        const int it1 = simplex_phase(t, allow_all, max_iters);
        if (it1 < 0) throw std::runtime_error("lp: phase-1 unbounded");
        sol.iterations += it1;
        if (basis_objective(t) > kFeasTol) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Pivot any residual (degenerate) artificial out of the basis.
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis[i] < nk + m) continue;
            std::size_t enter = t.n_total;
            for (std::size_t j = 0; j < nk + m; ++j) {
                if (std::abs(t.a[i][j]) > kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < t.n_total) t.pivot(i, enter);
            // else: the row is all-zero and harmless; the artificial stays
            // basic at value zero and phase 2 forbids re-entry.
        }
    }

    t.cost.assign(t.n_total, 0.0);
    for (std::size_t k = 0; k < nk; ++k) t.cost[k] = sign_obj[cols[k]] / cs[k];
    std::vector<bool> allowed(t.n_total, true);
    for (std::size_t j = nk + m; j < t.n_total; ++j) allowed[j] = false;
    const int it2 = simplex_phase(t, allowed, max_iters);
    if (it2 < 0) {
        sol.status = Status::Unbounded;
        return sol;
    }
    sol.iterations += it2;

    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < nk) x[cols[t.basis[i]]] = t.rhs(i) / cs[t.basis[i]];
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += problem.objective[j] * x[j];
    sol.status = Status::Optimal;
    sol.objective_value = obj;
    sol.x = std::move(x);
    return sol;
}

}  // namespace mdiqkd::lp
