#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qfc/control.hpp"
#include "qfc/errors.hpp"
#include "qfc/fft.hpp"
#include "qfc/moments.hpp"
#include "qfc/quadratures.hpp"
#include "qfc/rng.hpp"

namespace qfc::grid {

struct GridGeometry {
    double q_min = -12.0;
    double dq = 24.0 / 1024.0;
    int n_points = 1024;

    double q_at(int j) const { return q_min + dq * static_cast<double>(j); }
    double q_max() const { return q_at(n_points - 1); }

    void validate() const {
        if (n_points < 2 || (n_points & (n_points - 1)) != 0)
            throw InvalidConfigError("n_points must be a power of two");
        if (!(dq > 0.0)) throw InvalidConfigError("dq must be > 0");
    }

    static GridGeometry centered(double half_width, int n_points) {
        GridGeometry g;
        g.n_points = n_points;
        g.dq = 2.0 * half_width / static_cast<double>(n_points);
        g.q_min = -half_width;
        return g;
    }
};

struct GridWavefunction {
    double q_min = 0.0;
    double dq = 0.0;
    int n = 0;
    std::vector<std::complex<double>> amp;

    double q_at(int j) const { return q_min + dq * static_cast<double>(j); }
};

struct Expectations {
    double norm = 0.0;
    double q = 0.0;
    double p = 0.0;
    double varq = 0.0;
    double varp = 0.0;
    double cov = 0.0;     // <{dq, dp}>
    double skew_q = 0.0;  // <dq^3>
    double energy = 0.0;
};

struct PotentialSpec {
    enum class Kind { harmonic, free_particle, quartic, tabulated };
    Kind kind = Kind::harmonic;
    double a4 = 0.0;
    double a2 = 0.0;
    std::vector<double> values;

    static PotentialSpec harmonic() { return {Kind::harmonic, 0.0, 0.0, {}}; }
    static PotentialSpec free_particle() { return {Kind::free_particle, 0.0, 0.0, {}}; }
    static PotentialSpec quartic(double a4, double a2) { return {Kind::quartic, a4, a2, {}}; }
    static PotentialSpec tabulated(std::vector<double> v) {
        return {Kind::tabulated, 0.0, 0.0, std::move(v)};
    }

    std::vector<double> evaluate(const OscillatorConfig& cfg, const GridGeometry& g) const {
        std::vector<double> V(static_cast<std::size_t>(g.n_points));
        switch (kind) {
            case Kind::harmonic:
                for (int j = 0; j < g.n_points; ++j) {
                    const double q = g.q_at(j);
                    V[static_cast<std::size_t>(j)] = 0.5 * cfg.mass * cfg.omega * cfg.omega * q * q;
                }
                break;
            case Kind::free_particle:
                break;
            case Kind::quartic:
                for (int j = 0; j < g.n_points; ++j) {
                    const double q = g.q_at(j);
                    V[static_cast<std::size_t>(j)] = a4 * q * q * q * q + a2 * q * q;
                }
                break;
            case Kind::tabulated:
                if (static_cast<int>(values.size()) != g.n_points)
                    throw InvalidConfigError("tabulated potential size mismatch");
                V = values;
                break;
        }
        for (double v : V)
            if (!std::isfinite(v)) throw InvalidConfigError("potential not finite on the grid");
        return V;
    }
};

// Configuration of a grid trajectory. Measurement is of position (the frame
// alpha = 1, beta = 0); gamma = 0 switches measurement off entirely, in which
// case the gains must be zero as well since the readout does not exist.
struct GridSimConfig {
    OscillatorConfig cfg{1.0, 1.0, 1.0, 1.0};
    PotentialSpec potential = PotentialSpec::harmonic();
    double gamma = 0.5;  // >= 0; overrides cfg.gamma on the grid
    double chi = 0.0;    // lab-frame feedback gains, F = chi q + delta p
    double delta = 0.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    int record_stride = 100;
    int snapshot_stride = 0;  // 0 = no snapshots
    GridGeometry geom;
    double init_qbar = 0.0;
    double init_pbar = 0.0;
    double init_width = 1.0 / std::sqrt(2.0);
    double boundary_threshold = 1e-6;

    void validate() const {
        cfg.validate();
        geom.validate();
        if (!(gamma >= 0.0)) throw InvalidConfigError("gamma must be >= 0");
        if (gamma == 0.0 && (chi != 0.0 || delta != 0.0))
            throw InvalidConfigError("feedback requires measurement (gamma > 0)");
        if (!(dt > 0.0)) throw InvalidConfigError("dt must be > 0");
        if (record_stride < 1) throw InvalidConfigError("record_stride must be >= 1");
        if (snapshot_stride < 0) throw InvalidConfigError("snapshot_stride must be >= 0");
        if (!(init_width > 0.0)) throw InvalidConfigError("init_width must be > 0");
    }
};

struct GridSeriesPoint {
    double tau = 0.0;
    Expectations e;
};

struct GridSnapshot {
    double tau = 0.0;
    std::vector<double> density;
};

struct GridTrajectoryResult {
    GridGeometry geom;
    std::vector<GridSeriesPoint> series;
    std::vector<GridSnapshot> snapshots;
};

// Split-step propagator for the selective stochastic Schroedinger equation
// under position measurement with linear Markovian feedback. One step is
//   half kinetic | exp(-i V dt - (gamma/4)(q-<q>)^2 dt + (sqrt(gamma)/2)(q-<q>) dW)
//   | half kinetic | feedback unitary exp(-i (chi q + delta p) dM) | renormalize
// with dM = <q> dt + dW/sqrt(gamma) built from the same dW that drives the
// measurement back-action. <q> is taken at step start. The gamma/4 in the
// exponent reproduces the Ito-form gamma/8 double commutator once dW^2 = dt
// is accounted for. The delta part of the feedback commutes with the kinetic
// factor and is applied in the same momentum-space pass.
class GridEngine {
 public:
    explicit GridEngine(const GridSimConfig& c)
        : c_(c), fft_(static_cast<std::size_t>(c.geom.n_points)) {
        c_.validate();
        const int n = c_.geom.n_points;
        V_ = c_.potential.evaluate(c_.cfg, c_.geom);
        qgrid_.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) qgrid_[static_cast<std::size_t>(j)] = c_.geom.q_at(j);
        kgrid_.resize(static_cast<std::size_t>(n));
        const double dk = 2.0 * M_PI / (c_.geom.dq * static_cast<double>(n));
        for (int m = 0; m < n; ++m) {
            const int f = m < n / 2 ? m : m - n;
            kgrid_[static_cast<std::size_t>(m)] = dk * static_cast<double>(f);
        }
        kinetic_half_.resize(static_cast<std::size_t>(n));
        potential_phase_.resize(static_cast<std::size_t>(n));
        const double hbar = c_.cfg.hbar;
        for (int m = 0; m < n; ++m) {
            const double k = kgrid_[static_cast<std::size_t>(m)];
            const double phase = -hbar * k * k * c_.dt / (4.0 * c_.cfg.mass);
            kinetic_half_[static_cast<std::size_t>(m)] = {std::cos(phase), std::sin(phase)};
        }
        for (int j = 0; j < n; ++j) {
            const double phase = -V_[static_cast<std::size_t>(j)] * c_.dt / hbar;
            potential_phase_[static_cast<std::size_t>(j)] = {std::cos(phase), std::sin(phase)};
        }
        work_.resize(static_cast<std::size_t>(n));
    }

    const GridSimConfig& config() const { return c_; }
    const std::vector<double>& potential_values() const { return V_; }

    GridWavefunction init_gaussian(double qbar, double pbar, double width) const {
        if (!(width > 0.0)) throw InvalidConfigError("width must be > 0");
        if (qbar - 8.0 * width < c_.geom.q_min || qbar + 8.0 * width > c_.geom.q_max())
            throw GridTooSmallError("8 widths around qbar do not fit inside the grid");
        GridWavefunction psi;
        psi.q_min = c_.geom.q_min;
        psi.dq = c_.geom.dq;
        psi.n = c_.geom.n_points;
        psi.amp.resize(static_cast<std::size_t>(psi.n));
        const double hbar = c_.cfg.hbar;
        for (int j = 0; j < psi.n; ++j) {
            const double d = psi.q_at(j) - qbar;
            const double envelope = std::exp(-d * d / (4.0 * width * width));
            const double phase = pbar * d / hbar;
            psi.amp[static_cast<std::size_t>(j)] =
                envelope * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        normalize(psi);
        return psi;
    }

    Expectations expectations(const GridWavefunction& psi) const {
        check_geometry(psi);
        const int n = psi.n;
        const double dq = psi.dq;
        const double hbar = c_.cfg.hbar;
        Expectations e;
        double norm2 = 0.0, q1 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = std::norm(psi.amp[static_cast<std::size_t>(j)]) * dq;
            norm2 += w;
            q1 += qgrid_[static_cast<std::size_t>(j)] * w;
        }
        e.norm = norm2;
        if (std::abs(norm2 - 1.0) > 1e-6) throw NotNormalizedError();
        e.q = q1 / norm2;
        double m2 = 0.0, m3 = 0.0, epot = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = std::norm(psi.amp[static_cast<std::size_t>(j)]) * dq;
            const double d = qgrid_[static_cast<std::size_t>(j)] - e.q;
            m2 += d * d * w;
            m3 += d * d * d * w;
            epot += V_[static_cast<std::size_t>(j)] * w;
        }
        e.varq = m2 / norm2;
        e.skew_q = m3 / norm2;

        std::copy(psi.amp.begin(), psi.amp.end(), work_.begin());
        fft_.forward(work_.data());
        double p1 = 0.0, p2 = 0.0, wsum = 0.0;
        for (int m = 0; m < n; ++m) {
            const double w = std::norm(work_[static_cast<std::size_t>(m)]);
            const double p = hbar * kgrid_[static_cast<std::size_t>(m)];
            wsum += w;
            p1 += p * w;
            p2 += p * p * w;
        }
        e.p = p1 / wsum;
        e.varp = p2 / wsum - e.p * e.p;
        e.energy = 0.5 * (p2 / wsum) / c_.cfg.mass + epot / norm2;

        // <{dq, dp}> = 2 Re <q p> - 2 <q><p>, with (p psi) formed spectrally.
        for (int m = 0; m < n; ++m)
            work_[static_cast<std::size_t>(m)] *= hbar * kgrid_[static_cast<std::size_t>(m)];
        fft_.inverse(work_.data());
        std::complex<double> qp{0.0, 0.0};
        for (int j = 0; j < n; ++j)
            qp += std::conj(psi.amp[static_cast<std::size_t>(j)]) *
                  qgrid_[static_cast<std::size_t>(j)] * work_[static_cast<std::size_t>(j)] * dq;
        e.cov = 2.0 * qp.real() / norm2 - 2.0 * e.q * e.p;
        return e;
    }

    // One SSE step in place. dW must be Normal(0, dt).
    void advance(GridWavefunction& psi, double dW) const {
        check_geometry(psi);
        const int n = psi.n;
        const double dq = psi.dq;
        const double hbar = c_.cfg.hbar;
        const double gamma = c_.gamma;

        double norm2 = 0.0, q1 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = std::norm(psi.amp[static_cast<std::size_t>(j)]) * dq;
            norm2 += w;
            q1 += qgrid_[static_cast<std::size_t>(j)] * w;
        }
        const double qbar = q1 / norm2;

        fft_.forward(psi.amp.data());
        for (int m = 0; m < n; ++m)
            psi.amp[static_cast<std::size_t>(m)] *= kinetic_half_[static_cast<std::size_t>(m)];
        fft_.inverse(psi.amp.data());

        for (int j = 0; j < n; ++j) {
            const double d = qgrid_[static_cast<std::size_t>(j)] - qbar;
            const double contraction =
                std::exp(-0.25 * gamma * d * d * c_.dt + 0.5 * std::sqrt(gamma) * d * dW);
            psi.amp[static_cast<std::size_t>(j)] *=
                contraction * potential_phase_[static_cast<std::size_t>(j)];
        }

        const bool feedback = (c_.chi != 0.0 || c_.delta != 0.0);
        const double dM = feedback ? qbar * c_.dt + dW / std::sqrt(gamma) : 0.0;

        fft_.forward(psi.amp.data());
        if (feedback && c_.delta != 0.0) {
            const double shift = c_.delta * dM;
            for (int m = 0; m < n; ++m) {
                const double phase = -shift * kgrid_[static_cast<std::size_t>(m)];
                psi.amp[static_cast<std::size_t>(m)] *=
                    kinetic_half_[static_cast<std::size_t>(m)] *
                    std::complex<double>(std::cos(phase), std::sin(phase));
            }
        } else {
            for (int m = 0; m < n; ++m)
                psi.amp[static_cast<std::size_t>(m)] *= kinetic_half_[static_cast<std::size_t>(m)];
        }
        fft_.inverse(psi.amp.data());

        if (feedback && c_.chi != 0.0) {
            const double scale = -c_.chi * dM / hbar;
            for (int j = 0; j < n; ++j) {
                const double phase = scale * qgrid_[static_cast<std::size_t>(j)];
                psi.amp[static_cast<std::size_t>(j)] *=
                    std::complex<double>(std::cos(phase), std::sin(phase));
            }
        }

        double post2 = 0.0;
        for (int j = 0; j < n; ++j) post2 += std::norm(psi.amp[static_cast<std::size_t>(j)]) * dq;
        if (!(post2 > 0.25))
            throw NormCollapseError("norm collapsed during a step (dt too large?)");
        const double inv = 1.0 / std::sqrt(post2);
        for (auto& a : psi.amp) a *= inv;
        check_boundary(psi);
    }

    GridWavefunction step_sse(const GridWavefunction& psi, double dW) const {
        GridWavefunction out = psi;
        advance(out, dW);
        return out;
    }

    // Displacement into the frame where <q> = <p> = 0; central moments are
    // untouched. Translation is spectral, the momentum removal a phase.
    GridWavefunction comoving_transform(const GridWavefunction& psi) const {
        const Expectations e = expectations(psi);
        GridWavefunction out = psi;
        fft_.forward(out.amp.data());
        for (int m = 0; m < out.n; ++m) {
            const double phase = e.q * kgrid_[static_cast<std::size_t>(m)];
            out.amp[static_cast<std::size_t>(m)] *=
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
        fft_.inverse(out.amp.data());
        const double hbar = c_.cfg.hbar;
        for (int j = 0; j < out.n; ++j) {
            const double phase = -e.p * qgrid_[static_cast<std::size_t>(j)] / hbar;
            out.amp[static_cast<std::size_t>(j)] *=
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
        normalize(out);
        return out;
    }

    GridTrajectoryResult run_trajectory(double tau_end, std::uint64_t trajectory_index = 0) const {
        if (!(tau_end > 0.0)) throw InvalidConfigError("tau_end must be positive");
        const long n_steps = std::lround(tau_end / c_.dt);
        RandomStream rng(c_.seed, trajectory_index);
        GridWavefunction psi = init_gaussian(c_.init_qbar, c_.init_pbar, c_.init_width);
        GridTrajectoryResult res;
        res.geom = c_.geom;
        for (long k = 0; k <= n_steps; ++k) {
            const double tau = static_cast<double>(k) * c_.dt;
            if (k % c_.record_stride == 0 || k == n_steps)
                res.series.push_back({tau, expectations(psi)});
            if (c_.snapshot_stride > 0 && (k % c_.snapshot_stride == 0 || k == n_steps)) {
                GridSnapshot snap;
                snap.tau = tau;
                snap.density.resize(static_cast<std::size_t>(psi.n));
                for (int j = 0; j < psi.n; ++j)
                    snap.density[static_cast<std::size_t>(j)] =
                        std::norm(psi.amp[static_cast<std::size_t>(j)]);
                res.snapshots.push_back(std::move(snap));
            }
            if (k == n_steps) break;
            advance(psi, rng.next_wiener(c_.dt));
        }
        return res;
    }

 private:
    void check_geometry(const GridWavefunction& psi) const {
        if (psi.n != c_.geom.n_points || psi.dq != c_.geom.dq || psi.q_min != c_.geom.q_min ||
            static_cast<int>(psi.amp.size()) != psi.n)
            throw InvalidConfigError("wavefunction does not match the engine grid");
    }

    void normalize(GridWavefunction& psi) const {
        double norm2 = 0.0;
        for (const auto& a : psi.amp) norm2 += std::norm(a);
        norm2 *= psi.dq;
        if (!(norm2 > 0.0)) throw NormCollapseError("zero-norm wavefunction");
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& a : psi.amp) a *= inv;
        check_boundary(psi);
    }

    void check_boundary(const GridWavefunction& psi) const {
        const int n_edge = std::max(1, psi.n / 40);  // outer 5% of the grid in total
        double leak = 0.0;
        for (int j = 0; j < n_edge; ++j)
            leak += std::norm(psi.amp[static_cast<std::size_t>(j)]) +
                    std::norm(psi.amp[static_cast<std::size_t>(psi.n - 1 - j)]);
        leak *= psi.dq;
        if (leak > c_.boundary_threshold)
            throw BoundaryLeakError("probability reached the grid boundary");
    }

    GridSimConfig c_;
    Fft fft_;
    std::vector<double> V_;
    std::vector<double> qgrid_;
    std::vector<double> kgrid_;
    std::vector<std::complex<double>> kinetic_half_;
    std::vector<std::complex<double>> potential_phase_;
    mutable std::vector<std::complex<double>> work_;
};

// Residual of the stationary eigenpair on a grid in units hbar = m = omega = 1.
// r1 checks (H - i(gamma/4)(q^2 - <Q^2>_inf) - E) psi_inf = 0 with
// E = stationary_energy(kappa) + energy_offset; r2 checks
// ((i + z_inf) q - 2 x_inf p) psi_inf = 0. Returns max(r1, r2).
inline double stationary_eigenpair_residual(double kappa, const GridGeometry& geom,
                                            double energy_offset = 0.0) {
    geom.validate();
    const StationaryMoments sm = stationary_moments(kappa);
    const std::complex<double> s = stationary_gaussian(kappa);
    const double gamma = gamma_for_kappa(kappa);
    const double E = stationary_energy(kappa) + energy_offset;
    const int n = geom.n_points;
    const double dq = geom.dq;

    std::vector<std::complex<double>> psi(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double q = geom.q_at(j);
        psi[static_cast<std::size_t>(j)] = std::exp(-0.5 * s * q * q);
    }
    double norm2 = 0.0;
    for (const auto& a : psi) norm2 += std::norm(a);
    norm2 *= dq;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : psi) a *= inv;

    Fft fft(static_cast<std::size_t>(n));
    const double dk = 2.0 * M_PI / (dq * static_cast<double>(n));
    std::vector<double> kgrid(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        const int f = m < n / 2 ? m : m - n;
        kgrid[static_cast<std::size_t>(m)] = dk * static_cast<double>(f);
    }

    std::vector<std::complex<double>> ppsi(psi);
    fft.forward(ppsi.data());
    std::vector<std::complex<double>> kinpsi(ppsi);
    for (int m = 0; m < n; ++m) {
        const double k = kgrid[static_cast<std::size_t>(m)];
        ppsi[static_cast<std::size_t>(m)] *= k;
        kinpsi[static_cast<std::size_t>(m)] *= 0.5 * k * k;
    }
    fft.inverse(ppsi.data());
    fft.inverse(kinpsi.data());

    double r1 = 0.0, r2 = 0.0;
    const std::complex<double> iunit{0.0, 1.0};
    for (int j = 0; j < n; ++j) {
        const double q = geom.q_at(j);
        const std::complex<double> a = psi[static_cast<std::size_t>(j)];
        const std::complex<double> h =
            kinpsi[static_cast<std::size_t>(j)] + 0.5 * q * q * a;
        const std::complex<double> res1 =
            h - iunit * 0.25 * gamma * (q * q - sm.x) * a - E * a;
        const std::complex<double> res2 =
            (iunit + sm.z) * q * a - 2.0 * sm.x * ppsi[static_cast<std::size_t>(j)];
        r1 += std::norm(res1);
        r2 += std::norm(res2);
    }
    return std::sqrt(std::max(r1, r2) * dq);
}

}  // namespace qfc::grid
