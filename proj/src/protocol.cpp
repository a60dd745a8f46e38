#include "mdiqkd/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace mdiqkd {

const char* to_string(IntensityLabel l) {
    switch (l) {
        case IntensityLabel::s: return "s";
        case IntensityLabel::u: return "u";
        case IntensityLabel::v: return "v";
        case IntensityLabel::w: return "w";
    }
    return "?";
}

const char* to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

const char* to_string(BellOutcome o) {
    return o == BellOutcome::Singlet ? "singlet" : "triplet";
}

std::optional<IntensityLabel> intensity_label_from_string(const std::string& s) {
    if (s == "s") return IntensityLabel::s;
    if (s == "u") return IntensityLabel::u;
    if (s == "v") return IntensityLabel::v;
    if (s == "w") return IntensityLabel::w;
    return std::nullopt;
}

bool ClickPattern::clicked(Detector d) const {
    switch (d) {
        case Detector::cH: return ch;
        case Detector::cV: return cv;
        case Detector::dH: return dh;
        case Detector::dV: return dv;
    }
    return false;
}

std::vector<BellOutcome> classify_coincidence(const ClickPattern& clicks) {
    std::vector<BellOutcome> out;
    if (clicks.ch && clicks.dv) out.push_back(BellOutcome::Singlet);
    if (clicks.cv && clicks.dh) out.push_back(BellOutcome::Singlet);
    if (clicks.ch && clicks.cv) out.push_back(BellOutcome::Triplet);
    if (clicks.dh && clicks.dv) out.push_back(BellOutcome::Triplet);
    return out;
}

std::optional<int> sift_and_flip(Basis basis_a, Basis basis_b, BellOutcome outcome, int bit_b) {
    if (basis_a != basis_b) return std::nullopt;
    if (basis_a == Basis::X && outcome == BellOutcome::Triplet) return bit_b;
    return 1 - bit_b;
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double poisson_pmf(int n, double mu) {
    if (n < 0) throw std::domain_error("poisson_pmf: negative photon count");
    if (mu < 0.0) throw std::domain_error("poisson_pmf: negative flux");
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    // exp(n log mu - mu - log n!) avoids overflow of mu^n and n!
    return std::exp(n * std::log(mu) - mu - std::lgamma(n + 1.0));
}

void ProtocolConfig::validate() const {
    for (const auto& fx : {flux_a, flux_b}) {
        const double s = fx[0], u = fx[1], v = fx[2], w = fx[3];
        if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("signal flux must be in (0,1]");
        if (!(w >= 0.0 && v >= w && u >= v && s > u))
            throw std::invalid_argument("fluxes must satisfy w <= v <= u < s, all >= 0");
        for (double f : fx)
            if (!std::isfinite(f)) throw std::invalid_argument("non-finite flux");
    }
    if (!(p_s > 0.0 && p_s < 1.0)) throw std::invalid_argument("p_s must be in (0,1)");
    if (!(f_ec > 1.0)) throw std::invalid_argument("f_ec must exceed 1");
    if (!(clock_hz > 0.0)) throw std::invalid_argument("clock_hz must be positive");
}

}  // namespace mdiqkd
