#ifndef MDIQKD_LINPROG_HPP
#define MDIQKD_LINPROG_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace mdiqkd::lp {

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

// min (or max) c.x  subject to  row.x <= bound for every row,  0 <= x <= upper.
//
// Decoy-state instances have coefficients spanning ~50 decades (mu^m / m!),
// so the solver equilibrates rows, max-normalizes columns, and fixes at zero
// any variable whose largest possible contribution to every row is below
// 1e-12 of that row's scale. Pivoting is deterministic (Bland's rule), so
// repeated solves on identical input are bit-identical.
struct Problem {
    std::size_t num_vars = 0;
    bool maximize = false;
    std::vector<double> objective;            // size num_vars
    std::vector<std::vector<double>> rows;    // each size num_vars
    std::vector<double> bounds;               // rhs per row
    std::vector<double> upper;                // per-variable upper bound

    void add_row(std::vector<double> coeffs, double bound);
};

struct Solution {
    Status status = Status::Infeasible;
    double objective_value = 0.0;
    std::vector<double> x;  // empty unless Optimal
    int iterations = 0;
};

Solution solve(const Problem& problem);

}  // namespace mdiqkd::lp

#endif
