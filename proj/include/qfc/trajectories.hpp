#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "qfc/errors.hpp"
#include "qfc/moments.hpp"
#include "qfc/quadratures.hpp"
#include "qfc/rng.hpp"

namespace qfc {

// Dimensionless mean values plus second moments under Gaussian closure.
// Qbar = sqrt(m omega/hbar) <Q>, Pbar = <P>/sqrt(hbar m omega).
struct GaussianTrajectoryState {
    double Qbar = 0.0;
    double Pbar = 0.0;
    MomentState moments;
    double tau = 0.0;
};

struct DriftNoise {
    double driftQ = 0.0;
    double driftP = 0.0;
    double noiseQ = 0.0;
    double noiseP = 0.0;
};

// Coefficients of the mean-value SDEs in tau time:
//   dQbar = (Pbar + v~ Qbar) dtau + sqrt(2 kappa) (x + v~/(2 kappa)) dW
//   dPbar = -(1 + u~) Qbar dtau + sqrt(kappa/2) (z - u~/kappa) dW
// The same dW drives both, and the noise factors vanish at the stationary
// moments when the gains are optimal.
inline DriftNoise drift_and_noise(const GaussianTrajectoryState& s, double kappa,
                                  const FeedbackGains& g) {
    DriftNoise d;
    d.driftQ = s.Pbar + g.v_tilde * s.Qbar;
    d.driftP = -(1.0 + g.u_tilde) * s.Qbar;
    d.noiseQ = std::sqrt(2.0 * kappa) * (s.moments.x + g.v_tilde / (2.0 * kappa));
    d.noiseP = std::sqrt(0.5 * kappa) * (s.moments.z - g.u_tilde / kappa);
    return d;
}

// Energy in units of hbar*omega, mean plus fluctuation parts.
inline double energy(const GaussianTrajectoryState& s) {
    return 0.5 * (s.Pbar * s.Pbar + s.moments.y) + 0.5 * (s.Qbar * s.Qbar + s.moments.x);
}

// Ito differential of the energy over one step. The third central moments
// (zero under Gaussian closure) can be supplied for cross-checks against the
// grid simulation.
inline double energy_increment(const GaussianTrajectoryState& s, double kappa,
                               const FeedbackGains& g, double dW, double dtau,
                               double skew_q3 = 0.0, double cross_p2q = 0.0) {
    const double ut = g.u_tilde;
    const double vt = g.v_tilde;
    const double drift = 0.25 * kappa * (1.0 - (ut / kappa) * (ut / kappa) -
                                         (vt / kappa) * (vt / kappa)) +
                         vt * (s.moments.x + vt / (2.0 * kappa) + s.Qbar * s.Qbar) -
                         0.5 * ut * (s.moments.z - ut / kappa + 2.0 * s.Qbar * s.Pbar);
    const double noise = std::sqrt(0.5 * kappa) *
                         (2.0 * s.Qbar * (s.moments.x + vt / (2.0 * kappa)) +
                          s.Pbar * (s.moments.z - ut / kappa) + skew_q3 + 0.5 * cross_p2q);
    return drift * dtau + noise * dW;
}

enum class Scheme { euler_maruyama, weak2 };

// One SDE step. dW must be Normal(0, dtau). The moments evolve by their own
// deterministic flow; the means use Euler-Maruyama or the derivative-free
// weak order-2 predictor-corrector (see README for the tableau; with the
// state-independent noise of this system the supporting values collapse to a
// stochastic trapezoid in both drift and diffusion).
inline GaussianTrajectoryState step(const GaussianTrajectoryState& s, double dW, double dtau,
                                    double kappa, const FeedbackGains& g, Scheme scheme) {
    GaussianTrajectoryState out;
    out.moments = moment_step_rk4(s.moments, kappa, dtau);
    out.tau = s.tau + dtau;
    const DriftNoise d0 = drift_and_noise(s, kappa, g);
    if (scheme == Scheme::euler_maruyama) {
        out.Qbar = s.Qbar + d0.driftQ * dtau + d0.noiseQ * dW;
        out.Pbar = s.Pbar + d0.driftP * dtau + d0.noiseP * dW;
    } else {
        GaussianTrajectoryState pred;
        pred.Qbar = s.Qbar + d0.driftQ * dtau + d0.noiseQ * dW;
        pred.Pbar = s.Pbar + d0.driftP * dtau + d0.noiseP * dW;
        pred.moments = out.moments;
        const DriftNoise d1 = drift_and_noise(pred, kappa, g);
        out.Qbar = s.Qbar + 0.5 * (d0.driftQ + d1.driftQ) * dtau +
                   0.5 * (d0.noiseQ + d1.noiseQ) * dW;
        out.Pbar = s.Pbar + 0.5 * (d0.driftP + d1.driftP) * dtau +
                   0.5 * (d0.noiseP + d1.noiseP) * dW;
    }
    if (!std::isfinite(out.Qbar) || !std::isfinite(out.Pbar))
        throw IntegrationUnstableError("non-finite mean value encountered");
    return out;
}

// Drift-only (non-selective) mean dynamics, 4th-order in the means.
inline std::vector<GaussianTrajectoryState> mean_dynamics(const GaussianTrajectoryState& s0,
                                                          double kappa, const FeedbackGains& g,
                                                          double tau_end, double dtau) {
    if (!(dtau > 0.0) || !(tau_end > 0.0))
        throw InvalidConfigError("tau_end and dtau must be positive");
    const long n_steps = std::lround(tau_end / dtau);
    std::vector<GaussianTrajectoryState> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    GaussianTrajectoryState s = s0;
    out.push_back(s);
    auto rhs = [&](double Q, double P, double& dQ, double& dP) {
        dQ = P + g.v_tilde * Q;
        dP = -(1.0 + g.u_tilde) * Q;
    };
    for (long i = 0; i < n_steps; ++i) {
        double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
        rhs(s.Qbar, s.Pbar, k1q, k1p);
        rhs(s.Qbar + 0.5 * dtau * k1q, s.Pbar + 0.5 * dtau * k1p, k2q, k2p);
        rhs(s.Qbar + 0.5 * dtau * k2q, s.Pbar + 0.5 * dtau * k2p, k3q, k3p);
        rhs(s.Qbar + dtau * k3q, s.Pbar + dtau * k3p, k4q, k4p);
        s.Qbar += dtau / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        s.Pbar += dtau / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        s.moments = moment_step_rk4(s.moments, kappa, dtau);
        s.tau = s0.tau + static_cast<double>(i + 1) * dtau;
        out.push_back(s);
    }
    return out;
}

struct EnsembleSpec {
    int n_traj = 1;
    std::uint64_t master_seed = 0;
    double dtau = 1e-3;
    double tau_end = 1.0;
    Scheme scheme = Scheme::weak2;
    FeedbackGains gains;
    double kappa = 0.0;
    int record_stride = 100;
    GaussianTrajectoryState initial;
    double step_budget = 1e9;  // n_traj * steps cap
};

struct EnsembleResult {
    std::vector<double> tau;
    std::vector<double> mean_Q, std_Q;
    std::vector<double> mean_P, std_P;
    std::vector<double> mean_E, std_E;
    std::vector<GaussianTrajectoryState> terminal;
    double kappa = 0.0;
    FeedbackGains gains;
    std::uint64_t master_seed = 0;
};

namespace detail {

// Fixed-shape pairwise reduction; the result does not depend on how the
// values were produced across workers.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace detail

// Runs n_traj independent trajectories, each on its own counter-derived
// stream, and aggregates mean/std per recorded time. Bit-identical output
// for a given spec regardless of worker count.
inline EnsembleResult run_ensemble(const EnsembleSpec& spec, int workers = 0) {
    if (spec.n_traj < 1) throw InvalidConfigError("n_traj must be >= 1");
    if (!(spec.dtau > 0.0) || !(spec.tau_end > 0.0))
        throw InvalidConfigError("tau_end and dtau must be positive");
    if (spec.record_stride < 1) throw InvalidConfigError("record_stride must be >= 1");
    const long n_steps = std::lround(spec.tau_end / spec.dtau);
    if (static_cast<double>(spec.n_traj) * static_cast<double>(n_steps) > spec.step_budget)
        throw BudgetExceededError("ensemble exceeds the configured step budget");
    validate_moments(spec.initial.moments);

    std::vector<long> record_steps;
    for (long k = 0; k <= n_steps; k += spec.record_stride) record_steps.push_back(k);
    if (record_steps.back() != n_steps) record_steps.push_back(n_steps);
    const std::size_t n_rec = record_steps.size();
    const std::size_t n_traj = static_cast<std::size_t>(spec.n_traj);

    std::vector<double> recQ(n_traj * n_rec), recP(n_traj * n_rec), recE(n_traj * n_rec);
    std::vector<GaussianTrajectoryState> terminal(n_traj);

    auto run_one = [&](std::size_t i) {
        RandomStream rng(spec.master_seed, i);
        GaussianTrajectoryState s = spec.initial;
        std::size_t rec = 0;
        for (long k = 0; k <= n_steps; ++k) {
            if (rec < n_rec && record_steps[rec] == k) {
                recQ[i * n_rec + rec] = s.Qbar;
                recP[i * n_rec + rec] = s.Pbar;
                recE[i * n_rec + rec] = energy(s);
                ++rec;
            }
            if (k == n_steps) break;
            const double dW = rng.next_wiener(spec.dtau);
            s = step(s, dW, spec.dtau, spec.kappa, spec.gains, spec.scheme);
            s.tau = spec.initial.tau + static_cast<double>(k + 1) * spec.dtau;
        }
        terminal[i] = s;
    };

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    if (static_cast<std::size_t>(n_workers) > n_traj) n_workers = static_cast<int>(n_traj);
    if (n_workers == 1) {
        for (std::size_t i = 0; i < n_traj; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n_traj; i = next.fetch_add(1))
                    run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    EnsembleResult res;
    res.kappa = spec.kappa;
    res.gains = spec.gains;
    res.master_seed = spec.master_seed;
    res.terminal = std::move(terminal);
    res.tau.resize(n_rec);
    res.mean_Q.resize(n_rec);
    res.std_Q.resize(n_rec);
    res.mean_P.resize(n_rec);
    res.std_P.resize(n_rec);
    res.mean_E.resize(n_rec);
    res.std_E.resize(n_rec);

    std::vector<double> column(n_traj);
    auto reduce = [&](const std::vector<double>& rec, std::size_t j, double& mean, double& sd) {
        for (std::size_t i = 0; i < n_traj; ++i) column[i] = rec[i * n_rec + j];
        mean = detail::pairwise_sum(column.data(), n_traj) / static_cast<double>(n_traj);
        for (std::size_t i = 0; i < n_traj; ++i) {
            const double d = column[i] - mean;
            column[i] = d * d;
        }
        sd = std::sqrt(detail::pairwise_sum(column.data(), n_traj) / static_cast<double>(n_traj));
    };
    for (std::size_t j = 0; j < n_rec; ++j) {
        res.tau[j] = spec.initial.tau + static_cast<double>(record_steps[j]) * spec.dtau;
        reduce(recQ, j, res.mean_Q[j], res.std_Q[j]);
        reduce(recP, j, res.mean_P[j], res.std_P[j]);
        reduce(recE, j, res.mean_E[j], res.std_E[j]);
    }
    return res;
}

}  // namespace qfc
