#ifndef MDIQKD_DECOY_HPP
#define MDIQKD_DECOY_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdiqkd/counts.hpp"
#include "mdiqkd/finitesize.hpp"
#include "mdiqkd/linprog.hpp"

namespace mdiqkd::decoy {

struct DecoyError : std::runtime_error {
    explicit DecoyError(const std::string& what) : std::runtime_error(what) {}
};

// Gains from counts. With merge_bell set, singlet and triplet tallies are
// summed per class pair before dividing; otherwise the dataset must carry a
// single Bell state (or already-merged records).
GainsTable gains_from_counts(const CountsDataset& data, bool merge_bell = false);

// 1 - [Gamma(1+K, mu_i)/K!] [Gamma(1+K, mu_j)/K!] via the exact finite-series
// identity Gamma(1+K, mu)/K! = e^{-mu} sum_{l<=K} mu^l/l!.
double truncation_remainder(int K, double mu_i, double mu_j);

// The linear system over yields y^{m,n}, m,n in [0,K]. Upper and lower rows
// for the six retained class pairs (uu, uv, uw, vu, vv, wu) and a single
// cumulative pair of rows for vw/wv/ww, whose fluctuation factor pools the
// three samples. 7+7 = 14 rows in the default configuration.
struct ConstraintSet {
    int K = 7;
    std::size_t num_vars = 0;  // (K+1)^2 yields; error problems append e
    lp::Problem problem;
    std::vector<std::string> row_labels;
    std::size_t yield_rows = 0;
    std::size_t error_rows = 0;
    std::size_t dropped_yield_rows = 0;
    std::size_t dropped_error_rows = 0;
};

// Yield constraints only. n_sigmas is the loosening applied to the gain
// windows (0 = exact). Throws DecoyError if one of the nine X-basis class
// pairs is missing.
ConstraintSet build_yield_constraints(const GainsTable& x_gains, int K, double n_sigmas);

// Appends the 6 per-pair error rows and the cumulative vw/wv/ww row to an
// existing yield ConstraintSet and adds the scalar e as a final variable.
// Rows whose error rate is absent (zero coincidences) are dropped and
// counted. y11_lower multiplies e in each row.
void append_error_constraints(ConstraintSet& cs, const GainsTable& x_gains, double y11_lower,
                              double n_sigmas);

struct YieldBounds {
    double y11_lower = 0.0;
    double e11_upper = 1.0;
    int K = 7;
    bool finite_size = false;
    double sigmas_yield = 0.0;   // slack actually applied to gain windows
    double sigmas_error = 0.0;   // slack actually applied to error rows
    double failure_budget = 0.0; // sum of per-constraint epsilons
    std::size_t dropped_error_rows = 0;
};

struct BoundOptions {
    int K = 7;
    finitesize::FluctuationPolicy policy = finitesize::FluctuationPolicy::auto_consistency();
};

// min y^{1,1} over the yield constraints. Throws DecoyError carrying the LP
// status when the system is infeasible.
double bound_single_photon_yield(const GainsTable& x_gains, int K, double n_sigmas);

// max e over yield constraints + 7 error rows, clamped to [0, 1]. Throws
// DecoyError when y11_lower <= 0 (bound undefined) or the LP is infeasible.
double bound_single_photon_error(const GainsTable& x_gains, double y11_lower, int K,
                                 double n_sigmas_yield, double n_sigmas_error);

// Full decoy estimation with policy resolution. For auto_consistency the
// whole 21-row system gets the smallest sigma count that makes it feasible
// (bisection, 5% margin), applied uniformly like the fixed mode.
YieldBounds solve_bounds(const GainsTable& x_gains, const BoundOptions& options);

}  // namespace mdiqkd::decoy

#endif
