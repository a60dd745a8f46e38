#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mdiqkd/linprog.hpp"

using namespace mdiqkd::lp;

namespace {

// Brute-force oracle for 3-variable instances: enumerate all vertices as
// intersections of three active constraints (rows or box faces), keep the
// feasible ones, take the best objective.
struct Oracle {
    double best = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

bool solve3(const std::array<std::array<double, 3>, 3>& m, const std::array<double, 3>& rhs,
            std::array<double, 3>& x) {
    // Gaussian elimination with partial pivoting
    double a[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a[i][j] = m[i][j];
        a[i][3] = rhs[i];
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-11) return false;
        std::swap(a[piv], a[c]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int j = c; j < 4; ++j) a[r][j] -= f * a[c][j];
        }
    }
    for (int i = 0; i < 3; ++i) x[i] = a[i][3] / a[i][i];
    return true;
}

Oracle brute_force(const Problem& p) {
    // candidate hyperplanes: every row, x_j = 0, x_j = upper_j
    std::vector<std::array<double, 3>> planes;
    std::vector<double> rhs;
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        planes.push_back({p.rows[r][0], p.rows[r][1], p.rows[r][2]});
        rhs.push_back(p.bounds[r]);
    }
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> e{};
        e[j] = 1.0;
        planes.push_back(e);
        rhs.push_back(0.0);
        planes.push_back(e);
        rhs.push_back(p.upper[j]);
    }
    Oracle out;
    const std::size_t n = planes.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                std::array<double, 3> x;
                if (!solve3({planes[i], planes[j], planes[k]}, {rhs[i], rhs[j], rhs[k]}, x))
                    continue;
                bool ok = true;
                for (int v = 0; v < 3 && ok; ++v)
                    ok = x[v] >= -1e-8 && x[v] <= p.upper[v] + 1e-8;
                for (std::size_t r = 0; r < p.rows.size() && ok; ++r) {
                    double lhs = 0.0;
                    for (int v = 0; v < 3; ++v) lhs += p.rows[r][v] * x[v];
                    ok = lhs <= p.bounds[r] + 1e-8;
                }
                if (!ok) continue;
                double obj = 0.0;
                for (int v = 0; v < 3; ++v) obj += p.objective[v] * x[v];
                if (!out.feasible || (p.maximize ? obj > out.best : obj < out.best))
                    out.best = obj;
                out.feasible = true;
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("trivial problems") {
    Problem p;
    p.num_vars = 1;
    p.objective = {1.0};
    p.upper = {1.0};
    auto sol = solve(p);  // min y over [0,1], no rows
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(0.0));

    p.add_row({-1.0}, -0.3);  // y >= 0.3
    sol = solve(p);
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(0.3));

    p.maximize = true;
    sol = solve(p);
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(1.0));

    p.add_row({1.0}, 0.2);  // y <= 0.2 contradicts y >= 0.3
    sol = solve(p);
    CHECK(sol.status == Status::Infeasible);
}

TEST_CASE("two-variable corner") {
    Problem p;
    p.num_vars = 2;
    p.maximize = true;
    p.objective = {3.0, 2.0};
    p.upper = {10.0, 10.0};
    p.add_row({1.0, 1.0}, 4.0);
    p.add_row({1.0, 3.0}, 6.0);
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(12.0));  // x = (4, 0)
    CHECK(sol.x[0] == doctest::Approx(4.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
}

TEST_CASE("repeated solves are bit-identical") {
    Problem p;
    p.num_vars = 3;
    p.objective = {1.0, -2.0, 0.5};
    p.upper = {1.0, 2.0, 3.0};
    p.add_row({1.0, 1.0, 1.0}, 2.5);
    p.add_row({-1.0, 2.0, -0.5}, 1.0);
    p.add_row({-1.0, -1.0, -1.0}, -0.5);
    const auto a = solve(p);
    const auto b = solve(p);
    REQUIRE(a.status == Status::Optimal);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.x == b.x);
}

TEST_CASE("random 3-variable instances match the vertex-enumeration oracle") {
    std::mt19937_64 rng(2024);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Problem p;
        p.num_vars = 3;
        p.maximize = trial % 2 == 0;
        p.objective = {uni(-1, 1), uni(-1, 1), uni(-1, 1)};
        p.upper = {uni(0.5, 2.0), uni(0.5, 2.0), uni(0.5, 2.0)};
        const int rows = 2 + int(uni(0, 3.999));
        for (int r = 0; r < rows; ++r)
            p.add_row({uni(-1, 1), uni(-1, 1), uni(-1, 1)}, uni(-0.5, 1.5));
        const Oracle oracle = brute_force(p);
        const Solution sol = solve(p);
        if (!oracle.feasible) {
            CHECK(sol.status == Status::Infeasible);
            continue;
        }
        REQUIRE(sol.status == Status::Optimal);
        CHECK(sol.objective_value == doctest::Approx(oracle.best).epsilon(1e-6));
        ++solved;
    }
    CHECK(solved > 20);  // the generator must actually produce feasible cases
}

TEST_CASE("badly scaled decoy-like columns are handled") {
    // y00-like coefficient 1 against y77-like coefficient 1e-50, rhs ~1e-6:
    // the tiny column must not poison feasibility or the optimum.
    Problem p;
    p.num_vars = 3;
    p.objective = {0.0, 1.0, 0.0};
    p.upper = {1.0, 1.0, 1.0};
    p.add_row({1.0, 1e-4, 1e-50}, 2.3e-6);
    p.add_row({-1.0, -1e-4, -1e-50}, -2.2e-6);
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(0.0));
    // and maximizing pushes the mid variable to the window top
    Problem q = p;
    q.maximize = true;
    const auto sol2 = solve(q);
    REQUIRE(sol2.status == Status::Optimal);
    CHECK(sol2.objective_value == doctest::Approx(2.3e-6 / 1e-4).epsilon(1e-9));
}
