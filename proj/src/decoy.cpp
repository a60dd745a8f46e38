#include "mdiqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>

namespace mdiqkd::decoy {

namespace {

using IL = IntensityLabel;

constexpr std::pair<IL, IL> kRetainedPairs[6] = {
    {IL::u, IL::u}, {IL::u, IL::v}, {IL::u, IL::w},
    {IL::v, IL::u}, {IL::v, IL::v}, {IL::w, IL::u}};
constexpr std::pair<IL, IL> kCumulativePairs[3] = {{IL::v, IL::w}, {IL::w, IL::v}, {IL::w, IL::w}};

std::size_t yindex(int K, int m, int n) {
    return static_cast<std::size_t>(m) * (K + 1) + static_cast<std::size_t>(n);
}

// mu^m / m! for m = 0..K
std::vector<double> poisson_weights(int K, double mu) {
    std::vector<double> w(K + 1, 1.0);
    for (int m = 1; m <= K; ++m) w[m] = w[m - 1] * mu / m;
    return w;
}

const GainRecord& require_pair(const GainsTable& gains, IL a, IL b) {
    const GainRecord* rec = gains.find(Basis::X, a, b);
    if (rec == nullptr)
        throw DecoyError(std::string("decoy: dataset incomplete, missing X-basis pair (") +
                         to_string(a) + "," + to_string(b) + ")");
    return *rec;
}

double pooled_gain_fluctuation(const GainsTable& gains, double n_sigmas) {
    if (n_sigmas <= 0.0) return 0.0;
    double counts = 0.0;
    for (const auto& [a, b] : kCumulativePairs) counts += require_pair(gains, a, b).coincidences;
    if (counts <= 0.0) return 0.0;
    return finitesize::fluctuation(counts, n_sigmas);
}

struct ErrorRowData {
    std::vector<double> coeffs;
    double rhs = 0.0;
    bool usable = false;
};

}  // namespace

GainsTable gains_from_counts(const CountsDataset& data, bool merge_bell) {
    const CountsDataset* src = &data;
    CountsDataset merged;
    if (merge_bell) {
        merged = finitesize::merge_bell(data);
        src = &merged;
    }
    GainsTable out;
    for (const auto& r : src->records) {
        if (!(r.pairs_emitted > 0.0))
            throw DecoyError("gains_from_counts: pairs_emitted must be positive");
        GainRecord g;
        g.basis = r.basis;
        g.class_a = r.class_a;
        g.class_b = r.class_b;
        g.flux_a = r.flux_a;
        g.flux_b = r.flux_b;
        g.coincidences = r.coincidences;
        g.error_coincidences = r.error_coincidences;
        g.pairs_emitted = r.pairs_emitted;
        g.gain = r.coincidences / r.pairs_emitted;
        if (r.coincidences > 0.0) g.error_rate = r.error_coincidences / r.coincidences;
        out.records.push_back(g);
    }
    return out;
}

double truncation_remainder(int K, double mu_i, double mu_j) {
    if (K < 1) throw std::domain_error("truncation_remainder: K must be >= 1");
    if (mu_i < 0.0 || mu_j < 0.0)
        throw std::domain_error("truncation_remainder: negative flux");
    auto regularized = [K](double mu) {
        double term = 1.0, sum = 1.0;
        for (int l = 1; l <= K; ++l) {
            term *= mu / l;
            sum += term;
        }
        return std::exp(-mu) * sum;
    };
    return 1.0 - regularized(mu_i) * regularized(mu_j);
}

ConstraintSet build_yield_constraints(const GainsTable& x_gains, int K, double n_sigmas) {
    if (K < 1) throw std::domain_error("build_yield_constraints: K must be >= 1");
    const GainsTable gains = finitesize::loosen(x_gains.x_basis(), n_sigmas);

    ConstraintSet cs;
    cs.K = K;
    cs.num_vars = static_cast<std::size_t>(K + 1) * (K + 1);
    cs.problem.num_vars = cs.num_vars;
    cs.problem.objective.assign(cs.num_vars, 0.0);
    cs.problem.upper.assign(cs.num_vars, 1.0);

    auto mixture_row = [&](double mu_i, double mu_j) {
        const auto wa = poisson_weights(K, mu_i);
        const auto wb = poisson_weights(K, mu_j);
        std::vector<double> row(cs.num_vars, 0.0);
        for (int m = 0; m <= K; ++m)
            for (int n = 0; n <= K; ++n) row[yindex(K, m, n)] = wa[m] * wb[n];
        return row;
    };

    for (const auto& [a, b] : kRetainedPairs) {
        const GainRecord& rec = require_pair(gains, a, b);
        const double ee = std::exp(rec.flux_a + rec.flux_b);
        const std::vector<double> row = mixture_row(rec.flux_a, rec.flux_b);
        if (rec.fluctuation_undefined && n_sigmas > 0.0) {
            ++cs.dropped_yield_rows;  // gain window undefined for zero counts
            continue;
        }
        const double rem = truncation_remainder(K, rec.flux_a, rec.flux_b);
        cs.problem.add_row(row, ee * rec.gain * rec.gain_factor_hi);
        cs.row_labels.push_back(std::string("yield-upper ") + to_string(a) + to_string(b));
        std::vector<double> neg(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) neg[j] = -row[j];
        cs.problem.add_row(std::move(neg), -(ee * (rec.gain * rec.gain_factor_lo - rem)));
        cs.row_labels.push_back(std::string("yield-lower ") + to_string(a) + to_string(b));
    }

    // Cumulative constraint over vw/wv/ww with a pooled fluctuation factor.
    const double f_pool = pooled_gain_fluctuation(gains, n_sigmas);
    const double hi = 1.0 + f_pool;
    const double lo = std::max(1.0 - f_pool, 0.0);
    std::vector<double> cum(cs.num_vars, 0.0);
    double cum_hi = 0.0, cum_lo = 0.0;
    for (const auto& [a, b] : kCumulativePairs) {
        const GainRecord& rec = require_pair(gains, a, b);
        const double ee = std::exp(rec.flux_a + rec.flux_b);
        const std::vector<double> row = mixture_row(rec.flux_a, rec.flux_b);
        for (std::size_t j = 0; j < cum.size(); ++j) cum[j] += row[j];
        const double rem = truncation_remainder(K, rec.flux_a, rec.flux_b);
        cum_hi += ee * rec.gain * hi;
        cum_lo += ee * (rec.gain * lo - rem);
    }
    cs.problem.add_row(cum, cum_hi);
    cs.row_labels.push_back("yield-upper vw+wv+ww");
    std::vector<double> neg(cum.size());
    for (std::size_t j = 0; j < cum.size(); ++j) neg[j] = -cum[j];
    cs.problem.add_row(std::move(neg), -cum_lo);
    cs.row_labels.push_back("yield-lower vw+wv+ww");

    cs.yield_rows = cs.problem.rows.size();
    return cs;
}

void append_error_constraints(ConstraintSet& cs, const GainsTable& x_gains, double y11_lower,
                              double n_sigmas) {
    const int K = cs.K;
    const GainsTable gains = finitesize::loosen(x_gains.x_basis(), n_sigmas);

    // Grow the problem by the scalar e as the last variable.
    const std::size_t nv = cs.num_vars;
    cs.problem.num_vars = nv + 1;
    cs.problem.objective.assign(nv + 1, 0.0);
    cs.problem.upper.assign(nv + 1, 1.0);
    for (auto& row : cs.problem.rows) row.push_back(0.0);

    auto vacuum_terms = [&](std::vector<double>& row, double mu_i, double mu_j, double weight) {
        const auto wa = poisson_weights(K, mu_i);
        const auto wb = poisson_weights(K, mu_j);
        row[yindex(K, 0, 0)] += 0.5 * weight;
        for (int n = 1; n <= K; ++n) row[yindex(K, 0, n)] += 0.5 * weight * wb[n];
        for (int m = 1; m <= K; ++m) row[yindex(K, m, 0)] += 0.5 * weight * wa[m];
    };

    for (const auto& [a, b] : kRetainedPairs) {
        const GainRecord& rec = require_pair(gains, a, b);
        if (!rec.error_rate.has_value() ||
            (n_sigmas > 0.0 && rec.error_coincidences <= 0.0)) {
            ++cs.dropped_error_rows;
            continue;
        }
        std::vector<double> row(nv + 1, 0.0);
        vacuum_terms(row, rec.flux_a, rec.flux_b, 1.0);
        row[nv] = rec.flux_a * rec.flux_b * y11_lower;
        const double qe = rec.gain * *rec.error_rate;
        cs.problem.add_row(std::move(row),
                           std::exp(rec.flux_a + rec.flux_b) * qe * rec.error_factor_hi);
        cs.row_labels.push_back(std::string("error ") + to_string(a) + to_string(b));
        ++cs.error_rows;
    }

    // Cumulative error constraint, Eq.-condSE shape: 1/(mu_i mu_j) weights,
    // 3 y11 e on the left, pooled fluctuation on the observed error counts.
    std::vector<double> row(nv + 1, 0.0);
    double rhs = 0.0;
    double pooled_counts = 0.0;
    int usable = 0;
    for (const auto& [a, b] : kCumulativePairs) {
        const GainRecord& rec = require_pair(gains, a, b);
        if (rec.error_rate.has_value() && (n_sigmas <= 0.0 || rec.error_coincidences > 0.0)) {
            pooled_counts += rec.error_coincidences;
            ++usable;
        }
    }
    const double f_pool = (n_sigmas > 0.0 && pooled_counts > 0.0)
                              ? finitesize::fluctuation(pooled_counts, n_sigmas)
                              : 0.0;
    for (const auto& [a, b] : kCumulativePairs) {
        const GainRecord& rec = require_pair(gains, a, b);
        if (!rec.error_rate.has_value() || (n_sigmas > 0.0 && rec.error_coincidences <= 0.0))
            continue;
        const double weight = 1.0 / (rec.flux_a * rec.flux_b);
        vacuum_terms(row, rec.flux_a, rec.flux_b, weight);
        rhs += weight * std::exp(rec.flux_a + rec.flux_b) * rec.gain * *rec.error_rate *
               (1.0 + f_pool);
    }
    if (usable > 0) {
        row[nv] = usable * y11_lower;
        cs.problem.add_row(std::move(row), rhs);
        cs.row_labels.push_back("error vw+wv+ww");
        ++cs.error_rows;
    } else {
        ++cs.dropped_error_rows;
    }
}

double bound_single_photon_yield(const GainsTable& x_gains, int K, double n_sigmas) {
    ConstraintSet cs = build_yield_constraints(x_gains, K, n_sigmas);
    cs.problem.objective[yindex(K, 1, 1)] = 1.0;
    cs.problem.maximize = false;
    const lp::Solution sol = lp::solve(cs.problem);
    if (sol.status != lp::Status::Optimal)
        throw DecoyError(std::string("yield bound: LP ") + lp::to_string(sol.status));
    return std::clamp(sol.objective_value, 0.0, 1.0);
}

double bound_single_photon_error(const GainsTable& x_gains, double y11_lower, int K,
                                 double n_sigmas_yield, double n_sigmas_error) {
    if (!(y11_lower > 0.0))
        throw DecoyError("error bound: undefined for vanishing single-photon yield");
    ConstraintSet cs = build_yield_constraints(x_gains, K, n_sigmas_yield);
    append_error_constraints(cs, x_gains, y11_lower, n_sigmas_error);
    cs.problem.objective.back() = 1.0;
    cs.problem.maximize = true;
    const lp::Solution sol = lp::solve(cs.problem);
    if (sol.status != lp::Status::Optimal)
        throw DecoyError(std::string("error bound: LP ") + lp::to_string(sol.status));
    return std::clamp(sol.objective_value, 0.0, 1.0);
}

namespace {

// Feasibility of the full 21-row system at slack n. The e-multiplier is
// immaterial for feasibility (e = 0 is always a candidate), so a placeholder
// bound of 1 is used.
bool system_feasible(const GainsTable& g, int K, double n) {
    try {
        ConstraintSet cs = build_yield_constraints(g, K, n);
        append_error_constraints(cs, g, 1.0, n);
        cs.problem.objective.back() = 1.0;
        cs.problem.maximize = true;
        return lp::solve(cs.problem).status == lp::Status::Optimal;
    } catch (const DecoyError&) {
        return false;
    }
}

// Smallest n in [0, hi] for which feasible(n) holds, to bisection accuracy.
template <typename Feasible>
double minimal_sigmas(Feasible feasible, double hi) {
    if (feasible(0.0)) return 0.0;
    if (!feasible(hi)) return -1.0;
    double lo = 0.0;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

YieldBounds solve_bounds(const GainsTable& x_gains, const BoundOptions& options) {
    using Mode = finitesize::FluctuationPolicy::Mode;
    constexpr double kAutoMargin = 1.05;
    constexpr double kAutoFloor = 0.25;  // guards knife-edge bounds against count noise
    constexpr double kAutoMax = 16.0;

    YieldBounds out;
    out.K = options.K;
    out.finite_size = options.policy.mode == Mode::fixed;

    double n = 0.0;
    if (options.policy.mode == Mode::fixed) {
        n = options.policy.n_sigmas;
    } else if (options.policy.mode == Mode::auto_consistency) {
        const double n_min = minimal_sigmas(
            [&](double m) { return system_feasible(x_gains, options.K, m); }, kAutoMax);
        if (n_min < 0.0) throw DecoyError("decoy bounds: infeasible at any consistency slack");
        n = std::max(n_min * kAutoMargin, kAutoFloor);
    }

    out.sigmas_yield = n;
    out.sigmas_error = n;
    out.y11_lower = bound_single_photon_yield(x_gains, options.K, n);
    if (out.y11_lower <= 0.0) {
        // Nothing to bound the error against; report the degenerate result.
        out.y11_lower = 0.0;
        out.e11_upper = 1.0;
        return out;
    }
    out.e11_upper = bound_single_photon_error(x_gains, out.y11_lower, options.K, n, n);

    ConstraintSet cs = build_yield_constraints(x_gains, options.K, n);
    append_error_constraints(cs, x_gains, out.y11_lower, n);
    out.dropped_error_rows = cs.dropped_error_rows;
    out.failure_budget = (14.0 + 7.0) * finitesize::epsilon_from_sigmas(n);
    return out;
}

}  // namespace mdiqkd::decoy
