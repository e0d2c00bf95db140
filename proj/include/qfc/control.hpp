#pragma once

#include <cmath>
#include <complex>

#include "qfc/errors.hpp"
#include "qfc/moments.hpp"
#include "qfc/quadratures.hpp"

namespace qfc {

// Gains that cancel the measurement noise in both mean-value equations once
// the moments have reached their stationary values:
//   u = m omega^2 (sqrt(1+kappa^2) - 1)            (= m omega^2 kappa z_inf)
//   v = -sqrt(2) omega sqrt(sqrt(1+kappa^2) - 1)   (= -2 kappa omega x_inf)
inline FeedbackGains optimal_gains(double kappa, const OscillatorConfig& cfg) {
    cfg.validate();
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    if (cfg.is_free()) throw FreeParticleError();
    const double wm1 = detail::sqrt1psq_m1(kappa);
    return FeedbackGains::from_dimensionless(wm1, -std::sqrt(2.0) * std::sqrt(wm1), cfg);
}

// Exponential decay rate of <Q> and <P> under optimal gains; equals -v/2.
inline double decay_rate(double kappa, double omega) {
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    return omega / std::sqrt(2.0) * std::sqrt(detail::sqrt1psq_m1(kappa));
}

// Stationary energy in units of hbar*omega: E = 1/(4 x_inf(kappa)).
inline double stationary_energy(double kappa) {
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    return kappa / (2.0 * std::sqrt(2.0) * std::sqrt(detail::sqrt1psq_m1(kappa)));
}

// Width parameter of the stationary Gaussian, psi(Q) ~ exp(-s Q^2 / 2) in
// units m = omega = hbar = 1. Satisfies s^2 = 1 - i*kappa.
inline std::complex<double> stationary_gaussian(double kappa) {
    const StationaryMoments m = stationary_moments(kappa);
    return std::complex<double>(1.0, -m.z) / (2.0 * m.x);
}

// Pump/dissipation constant of the rotating-wave master equation:
//   c = kappa omega / 4 + (u^2/(m^2 omega^2) + v^2)/(4 kappa omega) + v/2
inline double pump_constant(const FeedbackGains& g, double kappa, const OscillatorConfig& cfg) {
    cfg.validate();
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    if (cfg.is_free()) throw FreeParticleError();
    const double mw = cfg.mass * cfg.omega;
    const double kw = kappa * cfg.omega;
    return 0.25 * kw + (g.u * g.u / (mw * mw) + g.v * g.v) / (4.0 * kw) + 0.5 * g.v;
}

// Fictitious heat bath matching the feedback master equation in the RWA.
// T_eff is reported in units of hbar*omega/k_B.
struct ThermalAnalogy {
    double c = 0.0;            // 1/s
    double gamma_prime = 0.0;  // 1/s
    double N_bath = 0.0;
    double T_eff = 0.0;        // hbar*omega/k_B units
};

inline double temperature_from_occupation(double N) {
    if (N < 0.0) throw NegativeOccupationError();
    if (N == 0.0) return 0.0;
    return 1.0 / std::log((N + 1.0) / N);
}

inline ThermalAnalogy bath_parameters(const FeedbackGains& g, double kappa,
                                      const OscillatorConfig& cfg) {
    if (g.v >= 0.0) throw HeatingRegimeError();
    ThermalAnalogy a;
    a.c = pump_constant(g, kappa, cfg);
    if (a.c < 0.0) throw NegativeOccupationError();
    a.gamma_prime = -g.v;
    a.N_bath = a.c / a.gamma_prime;
    a.T_eff = temperature_from_occupation(a.N_bath);
    return a;
}

// Effective temperature straight from the ratio form
// T = 1 / (2 ln((v - kappa omega)/(v + kappa omega))), valid for u = 0.
// The ratio is negative for -kappa*omega < v < 0, where this form of the
// formula is undefined even though the occupation route still works.
inline double temperature_via_zet(double v, double kappa, double omega) {
    if (v >= 0.0) throw HeatingRegimeError();
    const double kw = kappa * omega;
    if (v == -kw) return 0.0;
    const double ratio = (v - kw) / (v + kw);
    if (ratio <= 0.0) throw InvalidAnalogyError();
    return 1.0 / (2.0 * std::log(ratio));
}

inline double temperature_kelvin(double t_hbar_omega_units, const OscillatorConfig& cfg,
                                 double boltzmann_constant) {
    if (!(boltzmann_constant > 0.0)) throw InvalidConfigError("k_B must be > 0");
    return t_hbar_omega_units * cfg.hbar * cfg.omega / boltzmann_constant;
}

// Relaxation of the mean excitation towards the bath value:
// <n>(t) = N + (n_i - N) exp(-gamma' t).
inline double mean_excitation(double t, double n_i, double N, double gamma_prime) {
    if (!(gamma_prime > 0.0)) throw InvalidConfigError("gamma_prime must be > 0");
    if (n_i < 0.0 || N < 0.0) throw InvalidConfigError("occupations must be >= 0");
    return N + (n_i - N) * std::exp(-gamma_prime * t);
}

}  // namespace qfc
