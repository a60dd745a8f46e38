#ifndef MDIQKD_FINITESIZE_HPP
#define MDIQKD_FINITESIZE_HPP

#include "mdiqkd/counts.hpp"

namespace mdiqkd::finitesize {

// epsilon = 1 - erf(n / sqrt 2), computed via erfc so it stays accurate down
// to ~1e-30. Throws std::domain_error for n < 0.
double epsilon_from_sigmas(double n);

// F(x, n) = n / sqrt(x). Throws std::domain_error for x <= 0.
double fluctuation(double x, double n);

// How the decoy constraints are loosened against statistical fluctuations.
//
//  none             exact constraints (truncation slack only); used for
//                   exactly model-consistent data such as soundness tests.
//  fixed            the paper's finite-size treatment: n_sigmas-sigma
//                   loosening of every constraint.
//  auto_consistency default for measured data: per-stage minimal sigma count
//                   that makes the (noisy) constraint system feasible, found
//                   by bisection. Vanishes as the sample grows.
struct FluctuationPolicy {
    enum class Mode { none, fixed, auto_consistency };

    Mode mode = Mode::auto_consistency;
    double n_sigmas = 7.0;      // fixed mode only
    int constraint_count = 21;

    double epsilon() const;       // per-constraint failure probability (fixed mode)
    double total_budget() const;  // constraint_count * epsilon

    static FluctuationPolicy none();
    static FluctuationPolicy fixed(double n_sigmas);
    static FluctuationPolicy auto_consistency();
};

// Attaches [1 +/- F] factors: F(N Q, n) for gain constraints and
// F(N Q E, n) for error-product constraints. Upper factors inflate, lower
// factors deflate and clamp at 0. Records with zero counts get the
// undefined flag set; their constraints are dropped downstream.
GainsTable loosen(const GainsTable& gains, double n_sigmas);

// Sums singlet and triplet counts per class pair; pairs_emitted unchanged.
// Throws std::invalid_argument when a Bell partner record is missing.
CountsDataset merge_bell(const CountsDataset& data);

}  // namespace mdiqkd::finitesize

#endif
