#include "mdiqkd/simulator.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mdiqkd::sim {

namespace {

using IL = IntensityLabel;

constexpr int kPhaseGridPoints = 64;
constexpr std::uint64_t kBlockRounds = 1u << 20;

struct Jones {
    double h = 0.0;
    double v = 0.0;
};

Jones jones_of(Polarization p) {
    constexpr double r = 0.70710678118654752440;
    switch (p) {
        case Polarization::H: return {1.0, 0.0};
        case Polarization::V: return {0.0, 1.0};
        case Polarization::D: return {r, r};
        case Polarization::A: return {r, -r};
    }
    return {};
}

std::array<Polarization, 2> pols_of(Basis b) {
    if (b == Basis::Z) return {Polarization::H, Polarization::V};
    return {Polarization::D, Polarization::A};
}

// Mean photoelectron numbers at the four detectors for one choice of
// effective fluxes, polarizations, overlap and relative phase. Detector
// order matches enum Detector: cH, cV, dH, dV.
std::array<double, 4> detector_intensities(double mu_a, double mu_b, Polarization pol_a,
                                           Polarization pol_b, double overlap, double phase) {
    const Jones a = jones_of(pol_a);
    const Jones b = jones_of(pol_b);
    const double cross = overlap * std::sqrt(mu_a * mu_b) * std::sin(phase);
    std::array<double, 4> intensity{};
    const double base_h = 0.5 * (mu_a * a.h * a.h + mu_b * b.h * b.h);
    const double base_v = 0.5 * (mu_a * a.v * a.v + mu_b * b.v * b.v);
    intensity[0] = base_h - cross * a.h * b.h;  // cH
    intensity[1] = base_v - cross * a.v * b.v;  // cV
    intensity[2] = base_h + cross * a.h * b.h;  // dH
    intensity[3] = base_v + cross * a.v * b.v;  // dV
    return intensity;
}

struct TallyKey {
    Basis basis;
    IL class_a;
    IL class_b;
    BellOutcome bell;
    bool operator<(const TallyKey& o) const {
        return std::tie(basis, class_a, class_b, bell) <
               std::tie(o.basis, o.class_a, o.class_b, o.bell);
    }
};

struct Tally {
    double coincidences = 0.0;
    double errors = 0.0;
};

struct Accumulator {
    std::map<TallyKey, Tally> tallies;
    std::map<std::pair<IL, IL>, double> pairs_emitted;
    CampaignStats stats;
};

// Weighted tally of one click pattern for a basis-matched choice.
void tally_pattern(Accumulator& acc, Basis basis, IL ca, IL cb, Polarization pa, Polarization pb,
                   const ClickPattern& clicks, double weight) {
    if (clicks.ch && clicks.dv) acc.stats.s1 += weight;
    if (clicks.cv && clicks.dh) acc.stats.s2 += weight;
    if (clicks.ch && clicks.cv) acc.stats.t1 += weight;
    if (clicks.dh && clicks.dv) acc.stats.t2 += weight;
    for (BellOutcome bell : classify_coincidence(clicks)) {
        const auto decoded = sift_and_flip(basis, basis, bell, bit_of(pb));
        auto& t = acc.tallies[TallyKey{basis, ca, cb, bell}];
        t.coincidences += weight;
        if (decoded.has_value() && *decoded != bit_of(pa)) t.errors += weight;
    }
}

struct EffectiveFlux {
    double a = 0.0;
    double b = 0.0;
};

EffectiveFlux effective_flux(const ProtocolConfig& protocol, const ChannelConfig& channel,
                             const DetectorModel& det, IL ca, IL cb) {
    const double ta = std::pow(10.0, -channel.attenuation_db_a / 10.0) * det.efficiency;
    const double tb = std::pow(10.0, -channel.attenuation_db_b / 10.0) * det.efficiency;
    return {protocol.flux(ca, true) * ta, protocol.flux(cb, false) * tb};
}

// Average click probability across detectors, choices and phases; the input
// to the afterpulse fixed point.
double mean_click_probability(const ProtocolConfig& protocol, const ChannelConfig& channel,
                              const DetectorModel& det, double overlap, double dark_eff) {
    double mean = 0.0;
    for (IL ca : {IL::s, IL::u, IL::v, IL::w}) {
        for (IL cb : {IL::s, IL::u, IL::v, IL::w}) {
            const double pc = protocol.class_probability(ca) * protocol.class_probability(cb);
            const EffectiveFlux mu = effective_flux(protocol, channel, det, ca, cb);
            for (Polarization pa : pols_of(basis_of(ca))) {
                for (Polarization pb : pols_of(basis_of(cb))) {
                    for (int k = 0; k < kPhaseGridPoints; ++k) {
                        const double phase =
                            2.0 * std::numbers::pi * (k + 0.5) / kPhaseGridPoints;
                        const auto intensity =
                            detector_intensities(mu.a, mu.b, pa, pb, overlap, phase);
                        double p = 0.0;
                        for (double x : intensity) p += click_probability(x, dark_eff);
                        mean += 0.25 * pc * p / (4.0 * kPhaseGridPoints);
                    }
                }
            }
        }
    }
    return mean;
}

void run_expected(Accumulator& acc, const ProtocolConfig& protocol, const ChannelConfig& channel,
                  const DetectorModel& det, double overlap, double dark_eff, double rounds) {
    for (IL ca : {IL::s, IL::u, IL::v, IL::w}) {
        for (IL cb : {IL::s, IL::u, IL::v, IL::w}) {
            const double pc = protocol.class_probability(ca) * protocol.class_probability(cb);
            acc.pairs_emitted[{ca, cb}] = rounds * pc;
            if (basis_of(ca) != basis_of(cb)) continue;  // sifted away
            const Basis basis = basis_of(ca);
            const EffectiveFlux mu = effective_flux(protocol, channel, det, ca, cb);
            for (Polarization pa : pols_of(basis)) {
                for (Polarization pb : pols_of(basis)) {
                    for (int k = 0; k < kPhaseGridPoints; ++k) {
                        const double phase =
                            2.0 * std::numbers::pi * (k + 0.5) / kPhaseGridPoints;
                        const double w_choice =
                            rounds * pc * 0.25 / kPhaseGridPoints;
                        const auto intensity =
                            detector_intensities(mu.a, mu.b, pa, pb, overlap, phase);
                        std::array<double, 4> p{};
                        for (int d = 0; d < 4; ++d)
                            p[d] = click_probability(intensity[d], dark_eff);
                        // all 16 click patterns
                        for (int mask = 0; mask < 16; ++mask) {
                            ClickPattern clicks{bool(mask & 1), bool(mask & 2), bool(mask & 4),
                                                bool(mask & 8)};
                            if (clicks.count() < 2) continue;
                            double w = w_choice;
                            for (int d = 0; d < 4; ++d)
                                w *= (mask >> d & 1) ? p[d] : 1.0 - p[d];
                            if (w <= 0.0) continue;
                            tally_pattern(acc, basis, ca, cb, pa, pb, clicks, w);
                        }
                    }
                }
            }
        }
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

IL sample_class(const ProtocolConfig& protocol, Rng& rng) {
    const double x = rng.uniform();
    const double px = (1.0 - protocol.p_s) / 3.0;
    if (x < protocol.p_s) return IL::s;
    if (x < protocol.p_s + px) return IL::u;
    if (x < protocol.p_s + 2.0 * px) return IL::v;
    return IL::w;
}

void run_monte_carlo_block(Accumulator& acc, const ProtocolConfig& protocol,
                           const ChannelConfig& channel, const DetectorModel& det, double overlap,
                           std::uint64_t rounds, std::uint64_t seed) {
    Rng rng(seed);
    for (std::uint64_t r = 0; r < rounds; ++r) {
        const RoundResult round = simulate_round(protocol, channel, det, overlap, rng);
        acc.pairs_emitted[{round.class_a, round.class_b}] += 1.0;
        if (basis_of(round.class_a) != basis_of(round.class_b) || round.clicks.count() < 2)
            continue;
        tally_pattern(acc, basis_of(round.class_a), round.class_a, round.class_b, round.pol_a,
                      round.pol_b, round.clicks, 1.0);
    }
}

}  // namespace

RoundResult simulate_round(const ProtocolConfig& protocol, const ChannelConfig& channel,
                           const DetectorModel& detector, double overlap, Rng& rng) {
    RoundResult out;
    out.class_a = sample_class(protocol, rng);
    out.class_b = sample_class(protocol, rng);
    const Basis basis_a = basis_of(out.class_a);
    const Basis basis_b = basis_of(out.class_b);
    out.pol_a = pols_of(basis_a)[rng.uniform() < 0.5 ? 0 : 1];
    out.pol_b = pols_of(basis_b)[rng.uniform() < 0.5 ? 0 : 1];
    const double theta_a = 2.0 * std::numbers::pi * rng.uniform();
    const double theta_b = 2.0 * std::numbers::pi * rng.uniform();
    const double dark_eff =
        detector.dark_prob_per_gate * (1.0 + detector.afterpulse_prob);
    const EffectiveFlux mu =
        effective_flux(protocol, channel, detector, out.class_a, out.class_b);
    const auto intensity =
        detector_intensities(mu.a, mu.b, out.pol_a, out.pol_b, overlap, theta_b - theta_a);
    out.clicks.ch = rng.bernoulli(click_probability(intensity[0], dark_eff));
    out.clicks.cv = rng.bernoulli(click_probability(intensity[1], dark_eff));
    out.clicks.dh = rng.bernoulli(click_probability(intensity[2], dark_eff));
    out.clicks.dv = rng.bernoulli(click_probability(intensity[3], dark_eff));
    if (basis_a == basis_b) {
        for (BellOutcome bell : classify_coincidence(out.clicks)) {
            const auto decoded = sift_and_flip(basis_a, basis_b, bell, bit_of(out.pol_b));
            out.outcomes.push_back(
                {bell, decoded.has_value() && *decoded != bit_of(out.pol_a)});
        }
    }
    return out;
}

ChannelConfig ChannelConfig::total_db(double total, std::string label) {
    ChannelConfig c;
    c.attenuation_db_a = 0.5 * total;
    c.attenuation_db_b = 0.5 * total;
    c.label = std::move(label);
    return c;
}

DetectorModel DetectorModel::preset(TemperaturePreset t) {
    switch (t) {
        case TemperaturePreset::room_20C: return {0.30, 6.50e-5, 0.065};
        case TemperaturePreset::cold_0C: return {0.30, 2.64e-5, 0.086};
    }
    return {};
}

double click_probability(double mean_photons_at_detector, double effective_dark_prob) {
    if (mean_photons_at_detector < 0.0)
        throw std::domain_error("click_probability: negative intensity");
    return 1.0 - (1.0 - effective_dark_prob) * std::exp(-mean_photons_at_detector);
}

CampaignResult run_campaign(const ProtocolConfig& protocol, const ChannelConfig& channel,
                            const DetectorModel& detector, const SimOptions& options) {
    protocol.validate();
    if (!(options.overlap >= 0.0 && options.overlap <= 1.0))
        throw std::domain_error("run_campaign: overlap must be in [0,1]");
    std::uint64_t rounds = options.rounds;
    if (rounds == 0 && options.duration_s > 0.0)
        rounds = static_cast<std::uint64_t>(options.duration_s * protocol.clock_hz);
    if (rounds == 0) throw std::domain_error("run_campaign: zero rounds");

    // Afterpulses trail a detector's own clicks, and the gated deadtime
    // blanks the cycles right after real detections, so their surviving
    // coincidence contribution rides on the noise floor. One fixed-point
    // pass of d <- dark + p_ap d on that channel:
    const double dark_eff =
        detector.dark_prob_per_gate * (1.0 + detector.afterpulse_prob);

    Accumulator acc;
    acc.stats.effective_dark_prob = dark_eff;
    acc.stats.mean_click_probability =
        mean_click_probability(protocol, channel, detector, options.overlap, dark_eff);

    if (options.mode == SimMode::expected) {
        run_expected(acc, protocol, channel, detector, options.overlap, dark_eff,
                     static_cast<double>(rounds));
    } else {
        std::uint64_t done = 0, block = 0;
        while (done < rounds) {
            const std::uint64_t n = std::min<std::uint64_t>(kBlockRounds, rounds - done);
            run_monte_carlo_block(acc, protocol, channel, detector, options.overlap, n,
                                  splitmix64(options.seed ^ splitmix64(block)));
            done += n;
            ++block;
        }
    }

    CampaignResult result;
    result.stats = acc.stats;
    result.counts.channel_label =
        channel.label.empty() ? "simulated" : channel.label;
    result.counts.attenuation_db = channel.total_attenuation_db();

    // Emit the schema rows: ZZ (s,s) plus the nine X-basis pairs, both Bell
    // states, even when a tally is zero.
    auto emit = [&](Basis basis, IL a, IL b) {
        for (BellOutcome bell : {BellOutcome::Singlet, BellOutcome::Triplet}) {
            CountsRecord rec;
            rec.basis = basis;
            rec.class_a = a;
            rec.class_b = b;
            rec.bell = bell;
            rec.flux_a = protocol.flux(a, true);
            rec.flux_b = protocol.flux(b, false);
            rec.pairs_emitted = acc.pairs_emitted[{a, b}];
            const auto it = acc.tallies.find(TallyKey{basis, a, b, bell});
            if (it != acc.tallies.end()) {
                rec.coincidences = it->second.coincidences;
                rec.error_coincidences = it->second.errors;
            }
            if (rec.pairs_emitted > 0.0) result.counts.records.push_back(rec);
        }
    };
    emit(Basis::Z, IL::s, IL::s);
    for (IL a : {IL::u, IL::v, IL::w})
        for (IL b : {IL::u, IL::v, IL::w}) emit(Basis::X, a, b);
    return result;
}

}  // namespace mdiqkd::sim
