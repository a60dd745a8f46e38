#ifndef MDIQKD_KEYRATE_HPP
#define MDIQKD_KEYRATE_HPP

#include <optional>
#include <string>
#include <vector>

#include "mdiqkd/counts.hpp"
#include "mdiqkd/decoy.hpp"

namespace mdiqkd::keyrate {

struct KeyRateInputs {
    double p_z = 45.0 / 48.0;
    double flux_s_a = 0.7;
    double flux_s_b = 0.7;
    double q_zz = 0.0;   // per clock cycle (unconditional)
    double e_zz = 0.0;
    double y11_lower = 0.0;
    double e11_upper = 0.0;
    double f_ec = 1.16;
    double clock_hz = 1e9;
};

struct KeyRateTerms {
    double single_photon_term = 0.0;  // p_z^2 (s_i e^{-s_i})(s_j e^{-s_j}) y11 [1 - h(e11)]
    double ec_term = 0.0;             // f_ec Q_zz h(E_zz)
    double rate_per_pulse = 0.0;      // max(single_photon_term - ec_term, 0)
    double rate_bits_per_s = 0.0;
};

KeyRateTerms key_rate(const KeyRateInputs& inputs);

struct DistillOptions {
    bool merge_bell = false;
    finitesize::FluctuationPolicy policy = finitesize::FluctuationPolicy::auto_consistency();
    int K = 7;
    double p_z = 45.0 / 48.0;
    double f_ec = 1.16;
    double clock_hz = 1e9;
};

struct StateResult {
    std::string label;  // "singlet", "triplet" or "merged"
    decoy::YieldBounds bounds;
    double q_zz_per_clock = 0.0;
    double e_zz = 0.0;
    KeyRateTerms terms;
    std::string annotation;  // set when a stage degenerated (e.g. zero yield)
};

struct KeyRateReport {
    std::string channel_label;
    double attenuation_db = 0.0;
    bool merged = false;
    bool finite_size = false;
    int K = 7;
    std::vector<StateResult> states;
    double rate_total_per_pulse = 0.0;
    double rate_total_bits_per_s = 0.0;
};

struct DistillError : std::runtime_error {
    std::string stage;
    DistillError(std::string stage_, const std::string& what)
        : std::runtime_error("[" + stage_ + "] " + what), stage(std::move(stage_)) {}
};

// Full pipeline: gains -> single-photon yield bound -> single-photon error
// bound -> Eq.-level key rate, per Bell state or on the merged group.
// Throws DistillError with the failing stage on incomplete data or LP
// failure.
KeyRateReport distill(const CountsDataset& data, const DistillOptions& options);

}  // namespace mdiqkd::keyrate

#endif
