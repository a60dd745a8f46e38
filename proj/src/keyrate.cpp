#include "mdiqkd/keyrate.hpp"

#include <cmath>

namespace mdiqkd::keyrate {

namespace {

using IL = IntensityLabel;

void check_complete(const CountsDataset& data, bool merged_input) {
    const IL xs[3] = {IL::u, IL::v, IL::w};
    std::vector<std::optional<BellOutcome>> bells;
    if (merged_input) {
        bells.push_back(std::nullopt);
    } else {
        bells.push_back(BellOutcome::Singlet);
        bells.push_back(BellOutcome::Triplet);
    }
    for (const auto& bell : bells) {
        if (data.find(Basis::Z, IL::s, IL::s, bell) == nullptr)
            throw DistillError("dataset", "missing ZZ (s,s) record");
        for (IL a : xs)
            for (IL b : xs)
                if (data.find(Basis::X, a, b, bell) == nullptr)
                    throw DistillError("dataset",
                                       std::string("missing XX record (") + to_string(a) + "," +
                                           to_string(b) + ")");
    }
}

StateResult distill_one(const CountsDataset& data, const DistillOptions& options,
                        std::string label) {
    StateResult out;
    out.label = std::move(label);

    GainsTable gains;
    try {
        gains = decoy::gains_from_counts(data, false);
    } catch (const std::exception& e) {
        throw DistillError("gains", e.what());
    }

    const GainRecord* zz = gains.find(Basis::Z, IL::s, IL::s);
    if (zz == nullptr) throw DistillError("gains", "missing ZZ gain record");

    try {
        out.bounds = decoy::solve_bounds(gains.x_basis(),
                                         decoy::BoundOptions{options.K, options.policy});
    } catch (const decoy::DecoyError& e) {
        throw DistillError("decoy", e.what());
    }

    out.q_zz_per_clock = options.p_z * options.p_z * zz->gain;
    out.e_zz = zz->error_rate.value_or(0.0);

    if (out.bounds.y11_lower <= 0.0) {
        out.annotation = "single-photon yield bound is zero; rate clamped to 0";
    }

    KeyRateInputs in;
    in.p_z = options.p_z;
    in.flux_s_a = zz->flux_a;
    in.flux_s_b = zz->flux_b;
    in.q_zz = out.q_zz_per_clock;
    in.e_zz = out.e_zz;
    in.y11_lower = out.bounds.y11_lower;
    in.e11_upper = out.bounds.e11_upper;
    in.f_ec = options.f_ec;
    in.clock_hz = options.clock_hz;
    out.terms = key_rate(in);
    return out;
}

}  // namespace

KeyRateTerms key_rate(const KeyRateInputs& in) {
    KeyRateTerms t;
    const double pair_single =
        (in.flux_s_a * std::exp(-in.flux_s_a)) * (in.flux_s_b * std::exp(-in.flux_s_b));
    t.single_photon_term = in.p_z * in.p_z * pair_single * in.y11_lower *
                           (1.0 - binary_entropy(in.e11_upper));
    t.ec_term = in.f_ec * in.q_zz * binary_entropy(in.e_zz);
    t.rate_per_pulse = std::max(t.single_photon_term - t.ec_term, 0.0);
    t.rate_bits_per_s = t.rate_per_pulse * in.clock_hz;
    return t;
}

KeyRateReport distill(const CountsDataset& data, const DistillOptions& options) {
    try {
        data.validate();
    } catch (const std::exception& e) {
        throw DistillError("dataset", e.what());
    }
    const bool merged_input =
        !data.records.empty() && !data.records.front().bell.has_value();

    KeyRateReport report;
    report.channel_label = data.channel_label;
    report.attenuation_db = data.attenuation_db;
    report.merged = options.merge_bell || merged_input;
    report.finite_size = options.policy.mode == finitesize::FluctuationPolicy::Mode::fixed;
    report.K = options.K;

    if (report.merged) {
        CountsDataset merged = merged_input ? data : finitesize::merge_bell(data);
        check_complete(merged, true);
        report.states.push_back(distill_one(merged, options, "merged"));
    } else {
        check_complete(data, false);
        for (BellOutcome bell : {BellOutcome::Singlet, BellOutcome::Triplet})
            report.states.push_back(
                distill_one(filter_bell(data, bell), options, to_string(bell)));
    }
    for (const auto& s : report.states) {
        report.rate_total_per_pulse += s.terms.rate_per_pulse;
        report.rate_total_bits_per_s += s.terms.rate_bits_per_s;
    }
    return report;
}

}  // namespace mdiqkd::keyrate
