#ifndef MDIQKD_OPTICS_HPP
#define MDIQKD_OPTICS_HPP

namespace mdiqkd::optics {

// Two-photon interference model of a pair of gain-switched laser pulses.
// Times in picoseconds, spectral widths in GHz, chirp in rad/ps^2,
// detuning in rad/ps.
struct PulseInterferenceModel {
    double fwhm_ps = 35.0;
    double sigma_t_ps = 0.0;        // derived: fwhm / (2 sqrt(2 ln 2))
    double bandwidth_ghz = 0.0;     // measured spectral FWHM
    double bandwidth_tl_ghz = 0.0;  // transform-limited FWHM for this pulse width
    double chirp_beta = 0.0;        // derived from the bandwidth excess
    double detuning_omega = 0.0;    // omega_ij = 2 pi (nu_j - nu_i)

    // Builds the model from the two measured quantities, inverting the
    // chirp/bandwidth relation. Throws std::domain_error if the bandwidth is
    // below the transform limit or the width is not positive.
    static PulseInterferenceModel from_pulse(double fwhm_ps, double bandwidth_ghz,
                                             double detuning_omega = 0.0);
};

struct JitterModel {
    double sigma_tau_ps = 0.0;  // std deviation of the relative arrival-time jitter
};

// sigma_t = fwhm / (2 sqrt(2 ln 2)). Throws std::domain_error for
// non-positive widths.
double sigma_from_fwhm(double fwhm_ps);

// Gaussian time-bandwidth product: dnu0 = (2 ln 2 / pi) / dt.
double transform_limited_bandwidth_ghz(double fwhm_ps);

// Inverts dnu = dnu0 sqrt(1 + 16 beta^2 sigma_t^4) for beta >= 0.
// Throws std::domain_error when bandwidth_ghz < transform limit.
double chirp_from_bandwidth(double bandwidth_ghz, double fwhm_ps);

// V(tau) = 1/2 exp[-(tau^2 + 4 (omega + 2 tau beta)^2 sigma_t^4) / (4 sigma_t^2)]
double visibility_given_jitter(double tau_ps, const PulseInterferenceModel& model);

// Average of V(tau) over tau ~ N(0, sigma_tau). Adaptive quadrature over
// [-8 sigma_tau, 8 sigma_tau], absolute error below 1e-8.
double mean_visibility(const JitterModel& jitter, const PulseInterferenceModel& model);

// Convenience: build the model from (jitter, bandwidth, pulse width) and average.
double mean_visibility(double sigma_tau_ps, double bandwidth_ghz, double fwhm_ps);

// First-order interference of equal-amplitude pulses: I = (1 + cos phi) / 2.
double phase_randomized_intensity(double phase_rad);

// CDF of the intensity distribution under uniform phase: F(x) = (2/pi) asin(sqrt x).
double arcsine_cdf(double x);

}  // namespace mdiqkd::optics

#endif
