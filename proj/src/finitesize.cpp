#include "mdiqkd/finitesize.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace mdiqkd::finitesize {

double epsilon_from_sigmas(double n) {
    if (n < 0.0) throw std::domain_error("epsilon_from_sigmas: negative sigma count");
    return std::erfc(n / std::sqrt(2.0));
}

double fluctuation(double x, double n) {
    if (!(x > 0.0)) throw std::domain_error("fluctuation: sample size must be positive");
    return n / std::sqrt(x);
}

double FluctuationPolicy::epsilon() const {
    return epsilon_from_sigmas(mode == Mode::fixed ? n_sigmas : 0.0);
}

double FluctuationPolicy::total_budget() const { return constraint_count * epsilon(); }

FluctuationPolicy FluctuationPolicy::none() {
    FluctuationPolicy p;
    p.mode = Mode::none;
    return p;
}

FluctuationPolicy FluctuationPolicy::fixed(double n_sigmas) {
    FluctuationPolicy p;
    p.mode = Mode::fixed;
    p.n_sigmas = n_sigmas;
    return p;
}

FluctuationPolicy FluctuationPolicy::auto_consistency() {
    FluctuationPolicy p;
    p.mode = Mode::auto_consistency;
    return p;
}

GainsTable loosen(const GainsTable& gains, double n_sigmas) {
    GainsTable out = gains;
    for (auto& r : out.records) {
        r.gain_factor_hi = 1.0;
        r.gain_factor_lo = 1.0;
        r.error_factor_hi = 1.0;
        r.fluctuation_undefined = false;
        if (n_sigmas <= 0.0) continue;
        if (r.coincidences <= 0.0) {
            r.fluctuation_undefined = true;
            continue;
        }
        const double f = fluctuation(r.pairs_emitted * r.gain, n_sigmas);
        r.gain_factor_hi = 1.0 + f;
        r.gain_factor_lo = std::max(1.0 - f, 0.0);
        if (r.error_coincidences > 0.0) {
            const double fe =
                fluctuation(r.pairs_emitted * r.gain * *r.error_rate, n_sigmas);
            r.error_factor_hi = 1.0 + fe;
        }
    }
    return out;
}

CountsDataset merge_bell(const CountsDataset& data) {
    CountsDataset out;
    out.channel_label = data.channel_label;
    out.attenuation_db = data.attenuation_db;

    using Key = std::tuple<Basis, IntensityLabel, IntensityLabel>;
    std::map<Key, CountsRecord> merged;
    std::map<Key, int> partners;
    for (const auto& r : data.records) {
        if (!r.bell.has_value())
            throw std::invalid_argument("merge_bell: dataset is already merged");
        const Key key{r.basis, r.class_a, r.class_b};
        auto [it, fresh] = merged.try_emplace(key, r);
        if (fresh) {
            it->second.bell.reset();
        } else {
            it->second.coincidences += r.coincidences;
            it->second.error_coincidences += r.error_coincidences;
        }
        partners[key] |= (*r.bell == BellOutcome::Singlet) ? 1 : 2;
    }
    for (const auto& [key, mask] : partners) {
        if (mask != 3)
            throw std::invalid_argument("merge_bell: missing Bell partner for class pair " +
                                        std::string(to_string(std::get<1>(key))) + "," +
                                        std::string(to_string(std::get<2>(key))));
    }
    for (auto& [key, rec] : merged) out.records.push_back(rec);
    return out;
}

}  // namespace mdiqkd::finitesize
