#ifndef MDIQKD_SIMULATOR_HPP
#define MDIQKD_SIMULATOR_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdiqkd/counts.hpp"
#include "mdiqkd/protocol.hpp"

namespace mdiqkd::sim {

struct ChannelConfig {
    double attenuation_db_a = 0.0;
    double attenuation_db_b = 0.0;
    std::string label;

    // The paper quotes a single total attenuation; split it equally.
    static ChannelConfig total_db(double total_db, std::string label = {});
    double total_attenuation_db() const { return attenuation_db_a + attenuation_db_b; }
};

enum class TemperaturePreset { room_20C, cold_0C };

struct DetectorModel {
    double efficiency = 0.30;
    double dark_prob_per_gate = 6.50e-5;
    double afterpulse_prob = 0.065;

    static DetectorModel preset(TemperaturePreset t);
};

// p_click = 1 - (1 - d_eff) exp(-mean_photons), the threshold-detector model.
double click_probability(double mean_photons_at_detector, double effective_dark_prob);

enum class SimMode { monte_carlo, expected };

struct SimOptions {
    std::uint64_t rounds = 0;   // takes precedence when nonzero
    double duration_s = 0.0;    // otherwise rounds = duration_s * clock_hz
    std::uint64_t seed = 1;
    SimMode mode = SimMode::expected;
    double overlap = 1.0;       // mode overlap m in [0, 1]; HOM visibility V = m^2/2
};

// Side tallies mirroring the Fig.-2 pie chart (sifted coincidences per
// detector-pair outcome) plus the mean click probability used for the
// afterpulse fixed point.
struct CampaignStats {
    double s1 = 0.0;  // cH/dV
    double s2 = 0.0;  // cV/dH
    double t1 = 0.0;  // cH/cV
    double t2 = 0.0;  // dH/dV
    double mean_click_probability = 0.0;
    double effective_dark_prob = 0.0;

    double singlet_total() const { return s1 + s2; }
    double triplet_total() const { return t1 + t2; }
};

struct CampaignResult {
    CountsDataset counts;
    CampaignStats stats;
};

// Deterministic uniform sampling on top of mt19937_64, independent of the
// standard library's distribution implementations.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform() { return (engine() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
};

struct RoundOutcome {
    BellOutcome bell;
    bool error;  // decoded bit disagrees with Alice's
};

// One protocol round: sampled choices, sampled clicks, and the sifted Bell
// outcomes (empty on basis mismatch or when fewer than two detectors fire).
struct RoundResult {
    IntensityLabel class_a, class_b;
    Polarization pol_a, pol_b;
    ClickPattern clicks;
    std::vector<RoundOutcome> outcomes;
};

RoundResult simulate_round(const ProtocolConfig& protocol, const ChannelConfig& channel,
                           const DetectorModel& detector, double overlap, Rng& rng);

// Simulates the full coincidence experiment: class/polarization choices per
// the protocol probabilities, independent uniform pulse phases, 50:50
// beam-splitter mixing of the two coherent fields in the H/V detection basis
// with partial mode overlap, and threshold detectors with dark counts and
// afterpulsing. The afterpulse probability inflates the noise channel
// (d_eff = dark (1 + p_ap)); gated deadtime suppresses the rest, matching
// the measured Z-basis error scale. Expected mode integrates the relative
// phase on a fixed 64-point grid and the choices analytically; monte_carlo
// samples rounds in independently seeded blocks whose tallies merge by
// addition.
CampaignResult run_campaign(const ProtocolConfig& protocol, const ChannelConfig& channel,
                            const DetectorModel& detector, const SimOptions& options);

}  // namespace mdiqkd::sim

#endif
