#ifndef MDIQKD_PROTOCOL_HPP
#define MDIQKD_PROTOCOL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mdiqkd {

// Intensity classes of the four-state decoy protocol. The signal class s is
// tied to the Z basis, the decoy classes u, v, w to the X basis.
enum class IntensityLabel : std::uint8_t { s = 0, u = 1, v = 2, w = 3 };

enum class Basis : std::uint8_t { Z, X };

enum class Polarization : std::uint8_t { H, V, D, A };

enum class BellOutcome : std::uint8_t { Singlet, Triplet };

// Charlie's four gated detectors: beam-splitter output c or d, then H or V
// behind the polarizing beam splitter.
enum class Detector : std::uint8_t { cH = 0, cV = 1, dH = 2, dV = 3 };

const char* to_string(IntensityLabel l);
const char* to_string(Basis b);
const char* to_string(BellOutcome o);
std::optional<IntensityLabel> intensity_label_from_string(const std::string& s);

constexpr Basis basis_of(IntensityLabel l) {
    return l == IntensityLabel::s ? Basis::Z : Basis::X;
}

constexpr Basis basis_of(Polarization p) {
    return (p == Polarization::H || p == Polarization::V) ? Basis::Z : Basis::X;
}

// Bit convention: H and D encode 0, V and A encode 1.
constexpr int bit_of(Polarization p) {
    return (p == Polarization::V || p == Polarization::A) ? 1 : 0;
}

struct IntensityClass {
    IntensityLabel label = IntensityLabel::w;
    double flux = 0.0;  // mean photon number per pulse
};

// Which detectors clicked in one gate.
struct ClickPattern {
    bool ch = false;
    bool cv = false;
    bool dh = false;
    bool dv = false;

    bool clicked(Detector d) const;
    int count() const { return int(ch) + int(cv) + int(dh) + int(dv); }
};

// Draw all pairwise orthogonal-polarization detector events from a click
// pattern. cH/dV and cV/dH are singlets, cH/cV and dH/dV triplets;
// same-polarization pairs contribute nothing. Multi-click patterns expand
// to every compatible pair, each counted once.
std::vector<BellOutcome> classify_coincidence(const ClickPattern& clicks);

// Sifting plus Bob's bit flip. Returns nothing on basis mismatch. In the
// matched X basis a triplet outcome keeps Bob's bit unflipped.
std::optional<int> sift_and_flip(Basis basis_a, Basis basis_b, BellOutcome outcome, int bit_b);

// h(p) = -p log2 p - (1-p) log2 (1-p), with h(0) = h(1) = 0.
// Throws std::domain_error outside [0, 1].
double binary_entropy(double p);

// mu^n e^{-mu} / n!, stable for n up to a few tens.
// Throws std::domain_error for negative inputs.
double poisson_pmf(int n, double mu);

// Protocol parameters. Both users share the preparation probabilities; the
// fluxes may differ per user.
struct ProtocolConfig {
    std::array<double, 4> flux_a{0.7, 0.01, 0.002, 0.001};  // indexed by IntensityLabel
    std::array<double, 4> flux_b{0.7, 0.01, 0.002, 0.001};
    double p_s = 45.0 / 48.0;  // = p_Z; p_u = p_v = p_w = (1 - p_s) / 3
    double f_ec = 1.16;
    double clock_hz = 1e9;

    double flux(IntensityLabel l, bool alice) const {
        return (alice ? flux_a : flux_b)[static_cast<std::size_t>(l)];
    }
    double class_probability(IntensityLabel l) const {
        return l == IntensityLabel::s ? p_s : (1.0 - p_s) / 3.0;
    }
    double p_z() const { return p_s; }

    // Throws std::invalid_argument on violated invariants
    // (flux ordering, probability range, f_ec > 1, positive clock).
    void validate() const;
};

}  // namespace mdiqkd

#endif
