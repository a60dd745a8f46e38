#include "mdiqkd/optics.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace mdiqkd::optics {

namespace {

constexpr double kTwoLn2 = 2.0 * std::numbers::ln2;

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
constexpr double kKronrodNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kKronrodWeights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGaussWeights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};

struct GkResult {
    double value;
    double error;
};

GkResult gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double fv = f(mid + half * kKronrodNodes[i]);
        k += kKronrodWeights[i] * fv;
        if (i % 2 == 1) g += kGaussWeights[i / 2] * fv;
    }
    return {k * half, std::abs((k - g) * half)};
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                     int depth) {
    const GkResult r = gauss_kronrod(f, a, b);
    if (r.error < tol || depth >= 24) return r.value;
    const double mid = 0.5 * (a + b);
    return adaptive_quad(f, a, mid, 0.5 * tol, depth + 1) +
           adaptive_quad(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace

double sigma_from_fwhm(double fwhm_ps) {
    if (!(fwhm_ps > 0.0)) throw std::domain_error("sigma_from_fwhm: width must be positive");
    return fwhm_ps / (2.0 * std::sqrt(kTwoLn2));
}

double transform_limited_bandwidth_ghz(double fwhm_ps) {
    if (!(fwhm_ps > 0.0))
        throw std::domain_error("transform_limited_bandwidth_ghz: width must be positive");
    return (kTwoLn2 / std::numbers::pi) / fwhm_ps * 1e3;  // 1/ps -> GHz
}

double chirp_from_bandwidth(double bandwidth_ghz, double fwhm_ps) {
    const double tl = transform_limited_bandwidth_ghz(fwhm_ps);
    const double ratio = bandwidth_ghz / tl;
    if (ratio < 1.0 - 1e-12)
        throw std::domain_error("chirp_from_bandwidth: bandwidth below the transform limit");
    const double sigma_t = sigma_from_fwhm(fwhm_ps);
    const double excess = std::max(ratio * ratio - 1.0, 0.0);
    return std::sqrt(excess / (16.0 * std::pow(sigma_t, 4)));
}

PulseInterferenceModel PulseInterferenceModel::from_pulse(double fwhm_ps, double bandwidth_ghz,
                                                          double detuning_omega) {
    PulseInterferenceModel m;
    m.fwhm_ps = fwhm_ps;
    m.sigma_t_ps = sigma_from_fwhm(fwhm_ps);
    m.bandwidth_tl_ghz = transform_limited_bandwidth_ghz(fwhm_ps);
    m.bandwidth_ghz = bandwidth_ghz;
    m.chirp_beta = chirp_from_bandwidth(bandwidth_ghz, fwhm_ps);
    m.detuning_omega = detuning_omega;
    return m;
}

double visibility_given_jitter(double tau_ps, const PulseInterferenceModel& model) {
    const double st2 = model.sigma_t_ps * model.sigma_t_ps;
    const double shifted = model.detuning_omega + 2.0 * tau_ps * model.chirp_beta;
    const double num = tau_ps * tau_ps + 4.0 * shifted * shifted * st2 * st2;
    return 0.5 * std::exp(-num / (4.0 * st2));
}

double mean_visibility(const JitterModel& jitter, const PulseInterferenceModel& model) {
    const double st = jitter.sigma_tau_ps;
    if (st < 0.0) throw std::domain_error("mean_visibility: negative jitter width");
    if (st == 0.0) return visibility_given_jitter(0.0, model);
    const double norm = 1.0 / (st * std::sqrt(2.0 * std::numbers::pi));
    auto integrand = [&](double tau) {
        return visibility_given_jitter(tau, model) * norm *
               std::exp(-tau * tau / (2.0 * st * st));
    };
    return adaptive_quad(integrand, -8.0 * st, 8.0 * st, 1e-8, 0);
}

double mean_visibility(double sigma_tau_ps, double bandwidth_ghz, double fwhm_ps) {
    return mean_visibility(JitterModel{sigma_tau_ps},
                           PulseInterferenceModel::from_pulse(fwhm_ps, bandwidth_ghz));
}

double phase_randomized_intensity(double phase_rad) {
    return 0.5 * (1.0 + std::cos(phase_rad));
}

double arcsine_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return (2.0 / std::numbers::pi) * std::asin(std::sqrt(x));
}

}  // namespace mdiqkd::optics
