#pragma once

#include <cmath>
#include <vector>

#include "qfc/errors.hpp"
#include "qfc/quadratures.hpp"

namespace qfc {

// Dimensionless second moments of the measured quadrature and its conjugate:
//   x = (m omega / hbar) <dQ^2>
//   y = <dP^2> / (hbar m omega)
//   z = <{dQ, dP}> / hbar
// evolving in tau = omega*t.
struct MomentState {
    double x = 0.5;
    double y = 0.5;
    double z = 0.0;
    double tau = 0.0;
};

struct MomentDerivs {
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;
};

// x*y - 1/4 - z^2/4. Zero for pure Gaussian states; under the moment flow it
// obeys d(defect)/dtau = -2 kappa x defect, so it decays and never goes
// negative from a valid start.
inline double uncertainty_defect(const MomentState& s) {
    return s.x * s.y - 0.25 - 0.25 * s.z * s.z;
}

constexpr double kHeisenbergTolerance = 1e-9;

inline void validate_moments(const MomentState& s) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
        throw IntegrationUnstableError("non-finite moment encountered");
    if (s.x <= 0.0 || s.y <= 0.0)
        throw IntegrationUnstableError("variance became non-positive (dtau too large?)");
    if (uncertainty_defect(s) < -kHeisenbergTolerance)
        throw IntegrationUnstableError("Heisenberg bound violated beyond tolerance");
}

// Deterministic moment flow under continuous measurement, Gaussian closure:
//   dx/dtau = -2 kappa x^2 + z
//   dy/dtau = (kappa/2)(1 - z^2) - z
//   dz/dtau = 2(y - x) - 2 kappa x z
inline MomentDerivs moment_rhs(const MomentState& s, double kappa) {
    return {-2.0 * kappa * s.x * s.x + s.z,
            0.5 * kappa * (1.0 - s.z * s.z) - s.z,
            2.0 * (s.y - s.x) - 2.0 * kappa * s.x * s.z};
}

// One classical 4th-order step of the moment flow.
inline MomentState moment_step_rk4(const MomentState& s, double kappa, double dtau) {
    const MomentDerivs k1 = moment_rhs(s, kappa);
    const MomentState s2{s.x + 0.5 * dtau * k1.dx, s.y + 0.5 * dtau * k1.dy,
                         s.z + 0.5 * dtau * k1.dz, s.tau};
    const MomentDerivs k2 = moment_rhs(s2, kappa);
    const MomentState s3{s.x + 0.5 * dtau * k2.dx, s.y + 0.5 * dtau * k2.dy,
                         s.z + 0.5 * dtau * k2.dz, s.tau};
    const MomentDerivs k3 = moment_rhs(s3, kappa);
    const MomentState s4{s.x + dtau * k3.dx, s.y + dtau * k3.dy, s.z + dtau * k3.dz, s.tau};
    const MomentDerivs k4 = moment_rhs(s4, kappa);
    return {s.x + dtau / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
            s.y + dtau / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
            s.z + dtau / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz),
            s.tau + dtau};
}

// Fixed-step integration, one sample per step (s0 included).
inline std::vector<MomentState> integrate_moments(const MomentState& s0, double kappa,
                                                  double tau_end, double dtau) {
    if (!(dtau > 0.0) || !(tau_end > 0.0))
        throw InvalidConfigError("tau_end and dtau must be positive");
    validate_moments(s0);
    const long n_steps = std::lround(tau_end / dtau);
    std::vector<MomentState> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    MomentState s = s0;
    out.push_back(s);
    for (long i = 0; i < n_steps; ++i) {
        s = moment_step_rk4(s, kappa, dtau);
        s.tau = s0.tau + static_cast<double>(i + 1) * dtau;
        validate_moments(s);
        out.push_back(s);
    }
    return out;
}

// Same flow without storing the path.
inline MomentState integrate_moments_final(const MomentState& s0, double kappa,
                                           double tau_end, double dtau) {
    if (!(dtau > 0.0) || !(tau_end > 0.0))
        throw InvalidConfigError("tau_end and dtau must be positive");
    validate_moments(s0);
    const long n_steps = std::lround(tau_end / dtau);
    MomentState s = s0;
    for (long i = 0; i < n_steps; ++i) {
        s = moment_step_rk4(s, kappa, dtau);
        s.tau = s0.tau + static_cast<double>(i + 1) * dtau;
        if (!std::isfinite(s.x) || s.x <= 0.0 || !std::isfinite(s.y) || s.y <= 0.0)
            throw IntegrationUnstableError("variance became non-positive (dtau too large?)");
    }
    validate_moments(s);
    return s;
}

namespace detail {

// sqrt(1 + kappa^2) - 1 without cancellation for small kappa.
inline double sqrt1psq_m1(double kappa) {
    const double k2 = kappa * kappa;
    return k2 / (1.0 + std::sqrt(1.0 + k2));
}

}  // namespace detail

// Stationary values of the moment flow. With w = sqrt(1 + kappa^2):
//   z_inf = (w - 1)/kappa
//   x_inf = sqrt(w - 1) / (sqrt(2) kappa)
//   y_inf = w * x_inf
struct StationaryMoments {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline StationaryMoments stationary_moments(double kappa) {
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    const double wm1 = detail::sqrt1psq_m1(kappa);
    const double x = std::sqrt(wm1) / (std::sqrt(2.0) * kappa);
    return {x, (1.0 + wm1) * x, wm1 / kappa};
}

// Two convergence-time diagnostics for reaching the stationary regime, in
// dimensionless time. The measurement-rate estimate and the feedback-loop
// estimate differ by a factor two; callers pick their own margin on top.
inline double convergence_tau_measurement(double kappa) {
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    return 0.5 / kappa;
}

inline double convergence_tau_feedback(double kappa) {
    if (!(kappa > 0.0)) throw InvalidConfigError("kappa must be > 0");
    return 1.0 / kappa;
}

// Second moments in SI form for general omega >= 0:
//   d varQ / dt = -gamma varQ^2 + cov/m
//   d varP / dt = hbar^2 gamma / 4 - (gamma/4) cov^2 - m omega^2 cov
//   d cov  / dt = 2 varP / m - 2 m omega^2 varQ - gamma cov varQ
// (deterministic part with third central moments set to zero).
struct SIMoments {
    double varQ = 0.0;  // units of Q^2
    double varP = 0.0;
    double cov = 0.0;   // <{dQ, dP}>
    double t = 0.0;     // s
};

inline void validate_si_moments(const SIMoments& s, const OscillatorConfig& cfg) {
    if (!std::isfinite(s.varQ) || !std::isfinite(s.varP) || !std::isfinite(s.cov))
        throw IntegrationUnstableError("non-finite SI moment encountered");
    if (s.varQ <= 0.0 || s.varP <= 0.0)
        throw IntegrationUnstableError("SI variance became non-positive");
    const double h2 = cfg.hbar * cfg.hbar;
    if (s.varQ * s.varP - 0.25 * s.cov * s.cov < 0.25 * h2 - kHeisenbergTolerance * h2)
        throw IntegrationUnstableError("Heisenberg bound violated beyond tolerance");
}

inline SIMoments si_moment_rhs(const SIMoments& s, const OscillatorConfig& cfg) {
    cfg.validate();
    const double mw2 = cfg.mass * cfg.omega * cfg.omega;
    SIMoments d;
    d.varQ = -cfg.gamma * s.varQ * s.varQ + s.cov / cfg.mass;
    d.varP = 0.25 * cfg.hbar * cfg.hbar * cfg.gamma - 0.25 * cfg.gamma * s.cov * s.cov -
             mw2 * s.cov;
    d.cov = 2.0 * s.varP / cfg.mass - 2.0 * mw2 * s.varQ - cfg.gamma * s.cov * s.varQ;
    d.t = 1.0;
    return d;
}

inline SIMoments si_moment_step_rk4(const SIMoments& s, const OscillatorConfig& cfg, double dt) {
    auto shift = [&](const SIMoments& base, const SIMoments& k, double h) {
        return SIMoments{base.varQ + h * k.varQ, base.varP + h * k.varP, base.cov + h * k.cov,
                         base.t};
    };
    const SIMoments k1 = si_moment_rhs(s, cfg);
    const SIMoments k2 = si_moment_rhs(shift(s, k1, 0.5 * dt), cfg);
    const SIMoments k3 = si_moment_rhs(shift(s, k2, 0.5 * dt), cfg);
    const SIMoments k4 = si_moment_rhs(shift(s, k3, dt), cfg);
    return {s.varQ + dt / 6.0 * (k1.varQ + 2.0 * k2.varQ + 2.0 * k3.varQ + k4.varQ),
            s.varP + dt / 6.0 * (k1.varP + 2.0 * k2.varP + 2.0 * k3.varP + k4.varP),
            s.cov + dt / 6.0 * (k1.cov + 2.0 * k2.cov + 2.0 * k3.cov + k4.cov),
            s.t + dt};
}

inline SIMoments integrate_si_moments_final(const SIMoments& s0, const OscillatorConfig& cfg,
                                            double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw InvalidConfigError("t_end and dt must be positive");
    validate_si_moments(s0, cfg);
    const long n_steps = std::lround(t_end / dt);
    SIMoments s = s0;
    for (long i = 0; i < n_steps; ++i) {
        s = si_moment_step_rk4(s, cfg, dt);
        s.t = s0.t + static_cast<double>(i + 1) * dt;
        if (!std::isfinite(s.varQ) || s.varQ <= 0.0 || !std::isfinite(s.varP) || s.varP <= 0.0)
            throw IntegrationUnstableError("SI variance became non-positive");
    }
    validate_si_moments(s, cfg);
    return s;
}

// Stationary SI moments of the free particle (omega = 0):
//   varQ = sqrt(hbar/(m gamma)),  cov = hbar,  varP = (hbar/2) sqrt(hbar m gamma)
inline SIMoments stationary_moments_free(const OscillatorConfig& cfg) {
    cfg.validate();
    if (!cfg.is_free()) throw NotFreeParticleError();
    SIMoments s;
    s.varQ = std::sqrt(cfg.hbar / (cfg.mass * cfg.gamma));
    s.cov = cfg.hbar;
    s.varP = 0.5 * cfg.hbar * std::sqrt(cfg.hbar * cfg.mass * cfg.gamma);
    return s;
}

// Appendix-D style conversions between the SI and dimensionless forms.
inline MomentState to_dimensionless(const SIMoments& s, const OscillatorConfig& cfg) {
    const DimensionlessScales sc = dimensionless_scales(cfg);
    return {s.varQ * sc.q2, s.varP * sc.p2, s.cov * sc.qp, s.t * sc.time};
}

inline SIMoments to_si(const MomentState& s, const OscillatorConfig& cfg) {
    const DimensionlessScales sc = dimensionless_scales(cfg);
    return {s.x / sc.q2, s.y / sc.p2, s.z / sc.qp, s.tau / sc.time};
}

}  // namespace qfc
