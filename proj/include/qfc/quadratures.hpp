#pragma once

#include <cmath>
#include <utility>

#include "qfc/errors.hpp"

namespace qfc {

// Physical parameters of the monitored particle. omega = 0 denotes a free
// particle and is represented exactly, never as a small frequency: the
// harmonic stationary formulas are singular in that limit and the free
// particle has its own closed forms.
struct OscillatorConfig {
    double mass = 1.0;   // kg
    double omega = 1.0;  // rad/s, >= 0
    double gamma = 1.0;  // measurement strength, > 0
    double hbar = 1.0;   // J*s

    void validate() const {
        if (!(mass > 0.0)) throw InvalidConfigError("mass must be > 0");
        if (!(omega >= 0.0)) throw InvalidConfigError("omega must be >= 0");
        if (!(gamma > 0.0)) throw InvalidConfigError("gamma must be > 0");
        if (!(hbar > 0.0)) throw InvalidConfigError("hbar must be > 0");
    }

    bool is_free() const { return omega == 0.0; }
};

// kappa = hbar*gamma / (2 m omega^2), the measurement strength relative to
// the oscillator's own dynamics.
inline double relative_strength(const OscillatorConfig& cfg) {
    cfg.validate();
    if (cfg.is_free()) throw FreeParticleError();
    return cfg.hbar * cfg.gamma / (2.0 * cfg.mass * cfg.omega * cfg.omega);
}

// Measurement strength for a given kappa in internal units (hbar=m=omega=1).
inline double gamma_for_kappa(double kappa) { return 2.0 * kappa; }

// Measured quadrature Q = alpha*q + beta*p and its conjugate
// P = -beta'*q + alpha'*p with alpha' = alpha, beta' = m^2 omega^2 beta.
// Stored frames are always normalized: alpha^2 + m^2 omega^2 beta^2 = 1,
// which keeps [Q, P] = i*hbar and the harmonic Hamiltonian form-invariant.
struct QuadratureFrame {
    double alpha = 1.0;        // dimensionless
    double beta = 0.0;         // s/kg
    double alpha_prime = 1.0;  // dimensionless
    double beta_prime = 0.0;   // kg/s
};

inline QuadratureFrame normalize_frame(double alpha_raw, double beta_raw,
                                       const OscillatorConfig& cfg) {
    cfg.validate();
    if (alpha_raw == 0.0 && beta_raw == 0.0) throw ZeroFrameError();
    const double mw = cfg.mass * cfg.omega;
    if (cfg.is_free() && beta_raw != 0.0) throw UnnormalizableFrameError();
    const double s = std::sqrt(alpha_raw * alpha_raw + mw * mw * beta_raw * beta_raw);
    QuadratureFrame f;
    f.alpha = alpha_raw / s;
    f.beta = beta_raw / s;
    f.alpha_prime = f.alpha;
    f.beta_prime = mw * mw * f.beta;
    return f;
}

inline QuadratureFrame position_frame() { return QuadratureFrame{1.0, 0.0, 1.0, 0.0}; }

// Generator of feedback F = u*Q + v*P, kept together with its dimensionless
// form (u_tilde = u/(m omega^2), v_tilde = v/omega) because the trajectory
// equations are written in the scaled variables.
struct FeedbackGains {
    double u = 0.0;        // kg/s^2
    double v = 0.0;        // 1/s
    double u_tilde = 0.0;  // u / (m omega^2)
    double v_tilde = 0.0;  // v / omega

    static FeedbackGains zero() { return FeedbackGains{}; }

    static FeedbackGains from_si(double u, double v, const OscillatorConfig& cfg) {
        cfg.validate();
        if (cfg.is_free()) throw FreeParticleError();
        const double mw2 = cfg.mass * cfg.omega * cfg.omega;
        return FeedbackGains{u, v, u / mw2, v / cfg.omega};
    }

    static FeedbackGains from_dimensionless(double u_tilde, double v_tilde,
                                            const OscillatorConfig& cfg) {
        cfg.validate();
        if (cfg.is_free()) throw FreeParticleError();
        const double mw2 = cfg.mass * cfg.omega * cfg.omega;
        return FeedbackGains{u_tilde * mw2, v_tilde * cfg.omega, u_tilde, v_tilde};
    }
};

// Change of basis for the gain pair. With q = alpha'*Q - beta*P and
// p = beta'*Q + alpha*P, the identity chi*q + delta*p = u*Q + v*P gives
//   u = chi*alpha' + delta*beta',  v = delta*alpha - chi*beta.
inline std::pair<double, double> gains_lab_to_frame(double chi, double delta,
                                                    const QuadratureFrame& f) {
    return {chi * f.alpha_prime + delta * f.beta_prime, delta * f.alpha - chi * f.beta};
}

inline std::pair<double, double> gains_frame_to_lab(double u, double v,
                                                    const QuadratureFrame& f) {
    return {u * f.alpha - v * f.beta_prime, u * f.beta + v * f.alpha_prime};
}

// Scale factors between SI and dimensionless variables (hbar = m = omega = 1,
// tau = omega*t). Mean values scale with sqrt of these.
struct DimensionlessScales {
    double q2;   // (m omega / hbar): multiplies <dQ^2> to give x
    double p2;   // 1 / (hbar m omega): multiplies <dP^2> to give y
    double qp;   // 1 / hbar: multiplies <{dQ,dP}> to give z
    double time; // omega: multiplies t to give tau
};

inline DimensionlessScales dimensionless_scales(const OscillatorConfig& cfg) {
    cfg.validate();
    if (cfg.is_free()) throw FreeParticleError();
    const double mw = cfg.mass * cfg.omega;
    return {mw / cfg.hbar, 1.0 / (cfg.hbar * mw), 1.0 / cfg.hbar, cfg.omega};
}

}  // namespace qfc
