#include "mdiqkd/counts.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace mdiqkd {

namespace {

std::string record_name(const CountsRecord& r) {
    std::string s = std::string(to_string(r.basis)) + std::string(to_string(r.basis)) + " " +
                    to_string(r.class_a) + "," + to_string(r.class_b);
    if (r.bell) s += std::string(" ") + to_string(*r.bell);
    return s;
}

}  // namespace

const CountsRecord* CountsDataset::find(Basis basis, IntensityLabel a, IntensityLabel b,
                                        std::optional<BellOutcome> bell) const {
    for (const auto& r : records) {
        if (r.basis == basis && r.class_a == a && r.class_b == b && r.bell == bell) return &r;
    }
    return nullptr;
}

void CountsDataset::validate() const {
    std::map<std::pair<IntensityLabel, bool>, double> flux_of;
    for (const auto& r : records) {
        if (r.error_coincidences > r.coincidences + 1e-9)
            throw std::invalid_argument("dataset record " + record_name(r) +
                                        ": error coincidences exceed coincidences");
        if (!(r.pairs_emitted > 0.0))
            throw std::invalid_argument("dataset record " + record_name(r) +
                                        ": pairs_emitted must be positive");
        if (r.coincidences < 0.0 || r.error_coincidences < 0.0)
            throw std::invalid_argument("dataset record " + record_name(r) + ": negative counts");
        if (r.basis == Basis::Z &&
            (r.class_a != IntensityLabel::s || r.class_b != IntensityLabel::s))
            throw std::invalid_argument("dataset record " + record_name(r) +
                                        ": ZZ records exist only for class pair (s,s)");
        if (r.basis == Basis::X &&
            (r.class_a == IntensityLabel::s || r.class_b == IntensityLabel::s))
            throw std::invalid_argument("dataset record " + record_name(r) +
                                        ": class s never appears in the X basis");
        for (bool alice : {true, false}) {
            const IntensityLabel cls = alice ? r.class_a : r.class_b;
            const double flux = alice ? r.flux_a : r.flux_b;
            if (!(flux >= 0.0) || !std::isfinite(flux))
                throw std::invalid_argument("dataset record " + record_name(r) +
                                            ": invalid flux");
            auto [it, fresh] = flux_of.try_emplace({cls, alice}, flux);
            if (!fresh && std::abs(it->second - flux) > 1e-12)
                throw std::invalid_argument("dataset record " + record_name(r) +
                                            ": inconsistent flux for class " +
                                            to_string(cls));
        }
    }
}

CountsDataset filter_bell(const CountsDataset& data, BellOutcome bell) {
    CountsDataset out;
    out.channel_label = data.channel_label;
    out.attenuation_db = data.attenuation_db;
    for (const auto& r : data.records)
        if (r.bell == bell) out.records.push_back(r);
    return out;
}

const GainRecord* GainsTable::find(Basis basis, IntensityLabel a, IntensityLabel b) const {
    for (const auto& r : records)
        if (r.basis == basis && r.class_a == a && r.class_b == b) return &r;
    return nullptr;
}

GainsTable GainsTable::x_basis() const {
    GainsTable out;
    for (const auto& r : records)
        if (r.basis == Basis::X) out.records.push_back(r);
    return out;
}

}  // namespace mdiqkd
