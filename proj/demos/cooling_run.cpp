// Minimal cooling experiment: a small ensemble with noise-cancelling gains,
// started from a displaced state, relaxes to the stationary energy.

#include <cmath>
#include <cstdio>

#include "qfc/control.hpp"
#include "qfc/trajectories.hpp"

int main() {
    const double kappa = 0.25;
    const qfc::OscillatorConfig osc{1.0, 1.0, 2.0 * kappa, 1.0};

    qfc::EnsembleSpec spec;
    spec.kappa = kappa;
    spec.n_traj = 32;
    spec.master_seed = 7;
    spec.dtau = 1e-3;
    spec.tau_end = 40.0;
    spec.scheme = qfc::Scheme::weak2;
    spec.gains = qfc::optimal_gains(kappa, osc);
    spec.record_stride = 2000;
    spec.initial = {0.0, 1.0,
                    {1.0 / std::sqrt(2.0), 5.0 / (8.0 * std::sqrt(2.0)), 0.5, 0.0}, 0.0};

    const auto res = qfc::run_ensemble(spec);
    std::printf("%8s %12s %12s %12s\n", "tau", "<E>", "std(E)", "|<P>|");
    for (std::size_t j = 0; j < res.tau.size(); ++j)
        std::printf("%8.1f %12.6f %12.3e %12.3e\n", res.tau[j], res.mean_E[j], res.std_E[j],
                    std::abs(res.mean_P[j]));
    std::printf("stationary energy: %.6f\n", qfc::stationary_energy(kappa));
    return 0;
}
