#include <doctest.h>

#include <algorithm>
#include <random>

#include "mdiqkd/protocol.hpp"

using namespace mdiqkd;

namespace {

ClickPattern pattern(bool ch, bool cv, bool dh, bool dv) { return ClickPattern{ch, cv, dh, dv}; }

int orthogonal_pairs(const ClickPattern& p) {
    int n = 0;
    n += p.ch && p.dv;
    n += p.cv && p.dh;
    n += p.ch && p.cv;
    n += p.dh && p.dv;
    return n;
}

}  // namespace

TEST_CASE("classify_coincidence on the canonical patterns") {
    auto singlet = classify_coincidence(pattern(true, false, false, true));  // cH/dV
    REQUIRE(singlet.size() == 1);
    CHECK(singlet[0] == BellOutcome::Singlet);

    auto singlet2 = classify_coincidence(pattern(false, true, true, false));  // cV/dH
    REQUIRE(singlet2.size() == 1);
    CHECK(singlet2[0] == BellOutcome::Singlet);

    auto triplet = classify_coincidence(pattern(true, true, false, false));  // cH/cV
    REQUIRE(triplet.size() == 1);
    CHECK(triplet[0] == BellOutcome::Triplet);

    CHECK(classify_coincidence(pattern(true, false, false, false)).empty());  // single click
    CHECK(classify_coincidence(pattern(true, false, true, false)).empty());   // same-pol pair
}

TEST_CASE("classify_coincidence expands multi-click patterns to all pairs") {
    // {cH, cV, dV}: triplet (cH/cV) and singlet (cH/dV); cV/dV is same-pol.
    auto events = classify_coincidence(pattern(true, true, false, true));
    REQUIRE(events.size() == 2);
    CHECK(std::count(events.begin(), events.end(), BellOutcome::Singlet) == 1);
    CHECK(std::count(events.begin(), events.end(), BellOutcome::Triplet) == 1);

    // all 16 subsets: outcome count equals the orthogonal-pair count
    for (int mask = 0; mask < 16; ++mask) {
        const ClickPattern p = pattern(mask & 1, mask & 2, mask & 4, mask & 8);
        CHECK(int(classify_coincidence(p).size()) == orthogonal_pairs(p));
    }
}

TEST_CASE("sift_and_flip") {
    CHECK(sift_and_flip(Basis::Z, Basis::Z, BellOutcome::Singlet, 0) == 1);
    CHECK(!sift_and_flip(Basis::Z, Basis::X, BellOutcome::Singlet, 0).has_value());
    CHECK(sift_and_flip(Basis::X, Basis::X, BellOutcome::Triplet, 0) == 0);

    for (int b : {0, 1}) {
        CHECK(sift_and_flip(Basis::Z, Basis::Z, BellOutcome::Singlet, b) == 1 - b);
        CHECK(sift_and_flip(Basis::Z, Basis::Z, BellOutcome::Triplet, b) == 1 - b);
        CHECK(sift_and_flip(Basis::X, Basis::X, BellOutcome::Triplet, b) == b);
        CHECK(sift_and_flip(Basis::X, Basis::X, BellOutcome::Singlet, b) == 1 - b);
    }
}

TEST_CASE("binary_entropy values and edge cases") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.0034) == doctest::Approx(0.032777663325).epsilon(1e-9));
    CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("binary_entropy symmetry") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const double p = (rng() >> 11) * 0x1.0p-53;
        CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1.0 - p)).epsilon(1e-12));
    }
}

TEST_CASE("poisson_pmf values") {
    CHECK(poisson_pmf(0, 0.0) == 1.0);
    CHECK(poisson_pmf(3, 0.0) == 0.0);
    CHECK(poisson_pmf(1, 0.7) == doctest::Approx(0.34760971265398666).epsilon(1e-12));
    CHECK(poisson_pmf(2, 0.01) == doctest::Approx(4.950249168745841e-05).epsilon(1e-12));
    CHECK_THROWS_AS(poisson_pmf(-1, 0.5), std::domain_error);
    CHECK_THROWS_AS(poisson_pmf(2, -0.5), std::domain_error);
}

TEST_CASE("poisson_pmf normalizes over n <= 40 for mu <= 1") {
    for (double mu : {0.001, 0.01, 0.08, 0.55, 0.7, 1.0}) {
        double sum = 0.0;
        for (int n = 0; n <= 40; ++n) sum += poisson_pmf(n, mu);
        CHECK(sum <= 1.0 + 1e-15);
        CHECK(sum >= 1.0 - 1e-12);
    }
}

TEST_CASE("protocol config defaults and validation") {
    ProtocolConfig cfg;
    CHECK(cfg.p_s == doctest::Approx(45.0 / 48.0));
    CHECK(cfg.class_probability(IntensityLabel::u) == doctest::Approx(1.0 / 48.0));
    CHECK(cfg.class_probability(IntensityLabel::s) +
              3.0 * cfg.class_probability(IntensityLabel::w) ==
          doctest::Approx(1.0));
    CHECK(cfg.f_ec == doctest::Approx(1.16));
    CHECK_NOTHROW(cfg.validate());

    ProtocolConfig bad = cfg;
    bad.flux_a = {0.7, 0.002, 0.01, 0.001};  // u < v violates ordering
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.flux_b[0] = 1.5;  // signal flux above 1
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.f_ec = 0.9;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("class/basis wiring") {
    CHECK(basis_of(IntensityLabel::s) == Basis::Z);
    for (auto l : {IntensityLabel::u, IntensityLabel::v, IntensityLabel::w})
        CHECK(basis_of(l) == Basis::X);
    CHECK(basis_of(Polarization::H) == Basis::Z);
    CHECK(basis_of(Polarization::A) == Basis::X);
    CHECK(bit_of(Polarization::H) == 0);
    CHECK(bit_of(Polarization::V) == 1);
    CHECK(bit_of(Polarization::D) == 0);
    CHECK(bit_of(Polarization::A) == 1);
}
