#include <doctest.h>

#include <cmath>

#include "mdiqkd/dataset_io.hpp"
#include "mdiqkd/decoy.hpp"
#include "mdiqkd/finitesize.hpp"

using namespace mdiqkd;
using namespace mdiqkd::finitesize;
using IL = IntensityLabel;

TEST_CASE("epsilon_from_sigmas") {
    CHECK(epsilon_from_sigmas(0.0) == doctest::Approx(1.0));
    CHECK(epsilon_from_sigmas(1.0) == doctest::Approx(0.31731050786291415).epsilon(1e-12));
    // n = 7 gives 2.56e-12 (two significant figures)
    const double eps7 = epsilon_from_sigmas(7.0);
    CHECK(eps7 == doctest::Approx(2.56e-12).epsilon(5e-3));
    CHECK(21.0 * eps7 < 5.4e-11);
    // strictly decreasing, stays accurate far into the tail
    double prev = 2.0;
    for (double n = 0.0; n <= 11.0; n += 0.5) {
        const double e = epsilon_from_sigmas(n);
        CHECK(e < prev);
        prev = e;
    }
    CHECK(epsilon_from_sigmas(11.0) > 1e-30);
    CHECK_THROWS_AS(epsilon_from_sigmas(-1.0), std::domain_error);
}

TEST_CASE("fluctuation function") {
    CHECK(fluctuation(100.0, 7.0) == doctest::Approx(0.7));
    CHECK(fluctuation(4.0, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(fluctuation(0.0, 7.0), std::domain_error);
    CHECK_THROWS_AS(fluctuation(-5.0, 7.0), std::domain_error);
    // the sqrt(2) merging advantage, exactly
    CHECK(fluctuation(2.0 * 12345.0, 7.0) ==
          doctest::Approx(fluctuation(12345.0, 7.0) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("policy bookkeeping") {
    const auto p = FluctuationPolicy::fixed(7.0);
    CHECK(p.constraint_count == 21);
    CHECK(p.epsilon() == doctest::Approx(epsilon_from_sigmas(7.0)));
    CHECK(p.total_budget() == doctest::Approx(21.0 * epsilon_from_sigmas(7.0)));
}

TEST_CASE("loosen attaches adversarial factors") {
    GainsTable t;
    GainRecord r;
    r.basis = Basis::X;
    r.class_a = IL::u;
    r.class_b = IL::u;
    r.flux_a = r.flux_b = 0.01;
    r.pairs_emitted = 1e6;
    r.coincidences = 49.0;
    r.gain = 49.0 / 1e6;
    r.error_coincidences = 25.0;
    r.error_rate = 25.0 / 49.0;
    t.records.push_back(r);

    const auto loosened = loosen(t, 7.0);
    const auto& lr = loosened.records[0];
    // N Q = 49 -> F = 1; the lower factor clamps at zero
    CHECK(lr.gain_factor_hi == doctest::Approx(2.0));
    CHECK(lr.gain_factor_lo == doctest::Approx(0.0));
    CHECK(lr.error_factor_hi == doctest::Approx(1.0 + 7.0 / std::sqrt(25.0)));
    CHECK(lr.gain_factor_lo <= 1.0);
    CHECK(lr.gain_factor_hi >= 1.0);

    const auto untouched = loosen(t, 0.0);
    CHECK(untouched.records[0].gain_factor_hi == 1.0);
    CHECK(untouched.records[0].gain_factor_lo == 1.0);

    GainsTable zero = t;
    zero.records[0].coincidences = 0.0;
    zero.records[0].gain = 0.0;
    zero.records[0].error_rate.reset();
    CHECK(loosen(zero, 7.0).records[0].fluctuation_undefined);
}

TEST_CASE("merge_bell arithmetic and invariants") {
    CountsDataset data;
    auto add = [&](BellOutcome bell, double c, double err) {
        CountsRecord r;
        r.basis = Basis::X;
        r.class_a = IL::u;
        r.class_b = IL::u;
        r.bell = bell;
        r.coincidences = c;
        r.error_coincidences = err;
        r.pairs_emitted = 100.0;
        r.flux_a = r.flux_b = 0.01;
        data.records.push_back(r);
    };
    add(BellOutcome::Singlet, 10.0, 2.0);
    add(BellOutcome::Triplet, 12.0, 3.0);
    const auto merged = merge_bell(data);
    REQUIRE(merged.records.size() == 1);
    CHECK(merged.records[0].coincidences == doctest::Approx(22.0));
    CHECK(merged.records[0].error_coincidences == doctest::Approx(5.0));
    CHECK(merged.records[0].pairs_emitted == doctest::Approx(100.0));  // unchanged
    CHECK_FALSE(merged.records[0].bell.has_value());

    CountsDataset missing;
    missing.records.push_back(data.records[0]);  // singlet only
    CHECK_THROWS_AS(merge_bell(missing), std::invalid_argument);
    CHECK_THROWS_AS(merge_bell(merged), std::invalid_argument);  // already merged
}

TEST_CASE("merge_bell on the finite-size table reproduces the paper's sums") {
    const auto data =
        io::load_dataset(std::string(MDIQKD_DATA_DIR) + "/table2-4_2.33dB_finite.csv");
    const auto merged = merge_bell(data);
    const CountsRecord* uu = merged.find(Basis::X, IL::u, IL::u, std::nullopt);
    REQUIRE(uu != nullptr);
    CHECK(uu->coincidences == doctest::Approx(4771407.0 + 4853012.0));  // = 9624419
    CHECK(uu->pairs_emitted == doctest::Approx(2e12));
}

TEST_CASE("merge-then-gains commutes with gains-then-tally-addition") {
    const auto data = io::load_dataset(std::string(MDIQKD_DATA_DIR) + "/table2-4_6.15dB.csv");
    const auto via_merge = decoy::gains_from_counts(merge_bell(data));
    const auto direct = decoy::gains_from_counts(data, true);
    REQUIRE(via_merge.records.size() == direct.records.size());
    for (const auto& r : via_merge.records) {
        const GainRecord* d = direct.find(r.basis, r.class_a, r.class_b);
        REQUIRE(d != nullptr);
        CHECK(r.gain == doctest::Approx(d->gain).epsilon(1e-14));
        CHECK(*r.error_rate == doctest::Approx(*d->error_rate).epsilon(1e-14));
    }
}
