#ifndef MDIQKD_COUNTS_HPP
#define MDIQKD_COUNTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "mdiqkd/protocol.hpp"

namespace mdiqkd {

// One tally row: coincidence and error-coincidence counts for a basis pair,
// intensity-class pair and Bell state. Counts are doubles so expected-mode
// simulations can carry fractional tallies. A record without a Bell tag
// holds singlet+triplet counts gathered in a single group.
struct CountsRecord {
    Basis basis = Basis::X;
    IntensityLabel class_a = IntensityLabel::u;
    IntensityLabel class_b = IntensityLabel::u;
    std::optional<BellOutcome> bell;
    double coincidences = 0.0;
    double error_coincidences = 0.0;
    double pairs_emitted = 0.0;
    double flux_a = 0.0;
    double flux_b = 0.0;
};

struct CountsDataset {
    std::string channel_label;
    double attenuation_db = 0.0;
    std::vector<CountsRecord> records;

    const CountsRecord* find(Basis basis, IntensityLabel a, IntensityLabel b,
                             std::optional<BellOutcome> bell) const;

    // Per-record invariants plus schema shape: errors <= coincidences,
    // pairs_emitted > 0, ZZ records only for (s, s), consistent flux per
    // class and user. Throws std::invalid_argument naming the record.
    void validate() const;
};

// Dataset restricted to one Bell state (ZZ and XX records alike).
CountsDataset filter_bell(const CountsDataset& data, BellOutcome bell);

// Per-class-pair gain Q = C/N and error rate E = C_err/C, together with the
// statistical-fluctuation metadata attached by finitesize::loosen.
struct GainRecord {
    Basis basis = Basis::X;
    IntensityLabel class_a = IntensityLabel::u;
    IntensityLabel class_b = IntensityLabel::u;
    double flux_a = 0.0;
    double flux_b = 0.0;
    double gain = 0.0;
    std::optional<double> error_rate;  // absent when coincidences == 0
    double coincidences = 0.0;
    double error_coincidences = 0.0;
    double pairs_emitted = 0.0;
    // multiplicative loosening factors, [1 +/- F]:
    double gain_factor_hi = 1.0;
    double gain_factor_lo = 1.0;
    double error_factor_hi = 1.0;
    bool fluctuation_undefined = false;
};

struct GainsTable {
    std::vector<GainRecord> records;

    const GainRecord* find(Basis basis, IntensityLabel a, IntensityLabel b) const;
    GainsTable x_basis() const;
};

}  // namespace mdiqkd

#endif
