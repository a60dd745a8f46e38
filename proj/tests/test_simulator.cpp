#include <doctest.h>

#include <cmath>

#include "mdiqkd/decoy.hpp"
#include "mdiqkd/keyrate.hpp"
#include "mdiqkd/optics.hpp"
#include "mdiqkd/simulator.hpp"

using namespace mdiqkd;
using namespace mdiqkd::sim;
using IL = IntensityLabel;

namespace {

ProtocolConfig paper_protocol() { return ProtocolConfig{}; }

double merged_error_rate(const CountsDataset& d, Basis basis, IL a, IL b) {
    double c = 0.0, e = 0.0;
    for (const auto& r : d.records) {
        if (r.basis == basis && r.class_a == a && r.class_b == b) {
            c += r.coincidences;
            e += r.error_coincidences;
        }
    }
    return c > 0.0 ? e / c : 0.0;
}

double total(const CountsDataset& d, BellOutcome bell) {
    double c = 0.0;
    for (const auto& r : d.records)
        if (r.bell == bell) c += r.coincidences;
    return c;
}

}  // namespace

TEST_CASE("detector presets match the published operating points") {
    const auto room = DetectorModel::preset(TemperaturePreset::room_20C);
    CHECK(room.efficiency == doctest::Approx(0.30));
    CHECK(room.dark_prob_per_gate == doctest::Approx(6.50e-5));
    CHECK(room.afterpulse_prob == doctest::Approx(0.065));
    const auto cold = DetectorModel::preset(TemperaturePreset::cold_0C);
    CHECK(cold.dark_prob_per_gate == doctest::Approx(2.64e-5));
    CHECK(cold.afterpulse_prob == doctest::Approx(0.086));
}

TEST_CASE("click_probability") {
    CHECK(click_probability(0.0, 0.0) == 0.0);
    CHECK(click_probability(0.0, 6.5e-5) == doctest::Approx(6.5e-5));
    CHECK(click_probability(100.0, 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(click_probability(-1.0, 0.0), std::domain_error);
}

TEST_CASE("no V-polarized light means no orthogonal coincidences") {
    // both users send H in the Z basis, zero noise: cV/dV never click
    ProtocolConfig p = paper_protocol();
    DetectorModel det{0.3, 0.0, 0.0};
    SimOptions opt;
    opt.rounds = 200000;
    opt.mode = SimMode::expected;
    opt.overlap = 0.0;
    const auto res = run_campaign(p, ChannelConfig::total_db(2.33), det, opt);
    // with noise off, same-bit Z errors are impossible
    for (const auto& r : res.counts.records)
        if (r.basis == Basis::Z) CHECK(r.error_coincidences == doctest::Approx(0.0));
}

TEST_CASE("vacuum-only fluxes with dark counts produce dark-dark accidentals") {
    ProtocolConfig p = paper_protocol();
    p.flux_a = {1e-12, 0.0, 0.0, 0.0};  // effectively vacuum everywhere
    p.flux_b = {1e-12, 0.0, 0.0, 0.0};
    const double dark = 1e-5;
    DetectorModel det{0.3, dark, 0.0};
    SimOptions opt;
    opt.rounds = 1000000;
    opt.mode = SimMode::expected;
    opt.overlap = 0.0;
    const auto res = run_campaign(p, ChannelConfig::total_db(0.0), det, opt);
    const CountsRecord* uu = res.counts.find(Basis::X, IL::u, IL::u, BellOutcome::Singlet);
    REQUIRE(uu != nullptr);
    // two singlet detector pairs, each firing with probability ~dark^2
    const double per_round = uu->coincidences / uu->pairs_emitted;
    CHECK(per_round == doctest::Approx(2.0 * dark * dark).epsilon(0.01));
    // and accidental errors hit half the coincidences
    CHECK(uu->error_coincidences / uu->coincidences == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("expected-mode counts scale exactly linearly with rounds") {
    ProtocolConfig p = paper_protocol();
    DetectorModel det = DetectorModel::preset(TemperaturePreset::room_20C);
    SimOptions opt;
    opt.mode = SimMode::expected;
    opt.overlap = 0.98;
    opt.rounds = 1000000;
    const auto a = run_campaign(p, ChannelConfig::total_db(2.33), det, opt);
    opt.rounds = 3000000;
    const auto b = run_campaign(p, ChannelConfig::total_db(2.33), det, opt);
    REQUIRE(a.counts.records.size() == b.counts.records.size());
    for (std::size_t i = 0; i < a.counts.records.size(); ++i) {
        CHECK(b.counts.records[i].coincidences ==
              doctest::Approx(3.0 * a.counts.records[i].coincidences).epsilon(1e-12));
        CHECK(b.counts.records[i].pairs_emitted ==
              doctest::Approx(3.0 * a.counts.records[i].pairs_emitted).epsilon(1e-12));
    }
}

TEST_CASE("two-source singlet suppression matches the HOM phase average") {
    // At first order in the flux, the two-source part of the phase-averaged
    // D/D singlet rate scales as (1 - m^2) = (1 - 2V): rate(m) - rate(0)
    // equals -m^2/2 x (mu_a mu_b) per D/D round at low flux.
    ProtocolConfig p = paper_protocol();
    const double mu = 1e-4;
    p.flux_a = {0.7, mu, 0.0, 0.0};
    p.flux_b = {0.7, mu, 0.0, 0.0};
    DetectorModel det{1.0, 0.0, 0.0};
    SimOptions opt;
    opt.mode = SimMode::expected;
    opt.rounds = 1u << 24;

    auto singlet_uu_rate = [&](double overlap) {
        SimOptions o = opt;
        o.overlap = overlap;
        const auto res = run_campaign(p, ChannelConfig::total_db(0.0), det, o);
        const CountsRecord* uu = res.counts.find(Basis::X, IL::u, IL::u, BellOutcome::Singlet);
        REQUIRE(uu != nullptr);
        return uu->coincidences / uu->pairs_emitted;
    };
    const double v = 0.48;
    const double m = std::sqrt(2.0 * v);
    const double r0 = singlet_uu_rate(0.0);
    const double rm = singlet_uu_rate(m);
    // Same-bit (D/D) singlets are suppressed by m^2 sin^2(phi), opposite-bit
    // (D/A) singlets enhanced by the same amount, so the class tally is
    // overlap-independent at first order...
    CHECK(std::abs(rm - r0) / r0 < 2e-3);
    // ...and the interference shows up in the error rate: suppressed D/D
    // singlets decode as errors, so E_XX(uu) = (1 - V)/2 at low flux.
    SimOptions o = opt;
    o.overlap = m;
    const auto res = run_campaign(p, ChannelConfig::total_db(0.0), det, o);
    const double e_uu = merged_error_rate(res.counts, Basis::X, IL::u, IL::u);
    CHECK(e_uu == doctest::Approx((1.0 - v) / 2.0).epsilon(5e-3));
}

TEST_CASE("monte carlo is deterministic and converges to expected mode") {
    ProtocolConfig p = paper_protocol();
    // friendlier operating point so tallies are meaningfully populated
    p.flux_a = {0.7, 0.2, 0.1, 0.05};
    p.flux_b = {0.7, 0.2, 0.1, 0.05};
    p.p_s = 0.25;
    DetectorModel det{0.5, 1e-4, 0.0};
    SimOptions opt;
    opt.rounds = 10000000;
    opt.seed = 77;
    opt.mode = SimMode::monte_carlo;
    opt.overlap = 0.9;
    const auto mc1 = run_campaign(p, ChannelConfig::total_db(3.0), det, opt);
    const auto mc2 = run_campaign(p, ChannelConfig::total_db(3.0), det, opt);
    REQUIRE(mc1.counts.records.size() == mc2.counts.records.size());
    for (std::size_t i = 0; i < mc1.counts.records.size(); ++i) {
        CHECK(mc1.counts.records[i].coincidences == mc2.counts.records[i].coincidences);
        CHECK(mc1.counts.records[i].error_coincidences ==
              mc2.counts.records[i].error_coincidences);
    }

    SimOptions exp_opt = opt;
    exp_opt.mode = SimMode::expected;
    const auto ex = run_campaign(p, ChannelConfig::total_db(3.0), det, exp_opt);
    // every nonzero expected tally within 5 binomial sigmas
    for (const auto& er : ex.counts.records) {
        const CountsRecord* mr =
            mc1.counts.find(er.basis, er.class_a, er.class_b, er.bell);
        REQUIRE(mr != nullptr);
        if (er.coincidences < 10.0) continue;
        const double q = er.coincidences / er.pairs_emitted;
        const double sigma = std::sqrt(er.coincidences * (1.0 - q)) + 1e-9;
        CHECK(std::abs(mr->coincidences - er.coincidences) < 5.0 * sigma);
    }
}

TEST_CASE("singlet and triplet totals balance for identical detectors") {
    ProtocolConfig p = paper_protocol();
    DetectorModel det = DetectorModel::preset(TemperaturePreset::room_20C);
    SimOptions opt;
    opt.mode = SimMode::expected;
    opt.rounds = 1u << 22;
    opt.overlap = std::sqrt(2.0 * 0.485);
    const auto res = run_campaign(p, ChannelConfig::total_db(2.33), det, opt);
    const double s = total(res.counts, BellOutcome::Singlet);
    const double t = total(res.counts, BellOutcome::Triplet);
    CHECK(std::abs(s - t) / std::max(s, t) < 0.05);
    // pie-chart quadrants populated
    CHECK(res.stats.s1 > 0.0);
    CHECK(res.stats.s2 > 0.0);
    CHECK(res.stats.t1 > 0.0);
    CHECK(res.stats.t2 > 0.0);
    CHECK(res.stats.singlet_total() == doctest::Approx(s).epsilon(1e-9));
}

TEST_CASE("X-basis error rate approaches 1/2 at vanishing flux") {
    ProtocolConfig p = paper_protocol();
    p.flux_a = {0.7, 1e-6, 5e-7, 2e-7};
    p.flux_b = {0.7, 1e-6, 5e-7, 2e-7};
    DetectorModel det = DetectorModel::preset(TemperaturePreset::room_20C);
    SimOptions opt;
    opt.mode = SimMode::expected;
    opt.rounds = 1u << 22;
    opt.overlap = std::sqrt(2.0 * 0.485);
    const auto res = run_campaign(p, ChannelConfig::total_db(2.33), det, opt);
    const double e_ww = merged_error_rate(res.counts, Basis::X, IL::w, IL::w);
    CHECK(e_ww == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("zero rounds is a domain error") {
    SimOptions opt;
    opt.rounds = 0;
    CHECK_THROWS_AS(run_campaign(paper_protocol(), ChannelConfig::total_db(2.33),
                                 DetectorModel{}, opt),
                    std::domain_error);
}

TEST_CASE("simulate_round contract") {
    ProtocolConfig p = paper_protocol();
    DetectorModel det = DetectorModel::preset(TemperaturePreset::room_20C);
    Rng rng(2719);
    int rounds_with_outcomes = 0;
    for (int i = 0; i < 200000; ++i) {
        const auto r = simulate_round(p, ChannelConfig::total_db(2.33), det, 0.98, rng);
        // class fixes the basis of the polarization choice
        CHECK(basis_of(r.pol_a) == basis_of(r.class_a));
        CHECK(basis_of(r.pol_b) == basis_of(r.class_b));
        if (basis_of(r.class_a) != basis_of(r.class_b)) {
            CHECK(r.outcomes.empty());  // sifted away
        } else {
            CHECK(r.outcomes.size() == classify_coincidence(r.clicks).size());
        }
        rounds_with_outcomes += !r.outcomes.empty();
    }
    CHECK(rounds_with_outcomes > 1000);  // the operating point actually produces coincidences
}
