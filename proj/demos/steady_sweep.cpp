// Prints the stationary second moments, energy and optimal gains across a
// logarithmic sweep of the relative measurement strength.

#include <cmath>
#include <cstdio>

#include "qfc/control.hpp"
#include "qfc/moments.hpp"

int main() {
    const qfc::OscillatorConfig osc{1.0, 1.0, 0.5, 1.0};
    std::printf("%9s %9s %9s %9s %9s %10s %10s\n", "kappa", "x_inf", "y_inf", "z_inf", "E/hw",
                "u", "v");
    for (int i = 0; i <= 16; ++i) {
        const double kappa = 0.01 * std::pow(1600.0, i / 16.0);
        const auto m = qfc::stationary_moments(kappa);
        const auto g = qfc::optimal_gains(kappa, osc);
        std::printf("%9.4f %9.5f %9.5f %9.5f %9.5f %10.5f %10.5f\n", kappa, m.x, m.y, m.z,
                    qfc::stationary_energy(kappa), g.u, g.v);
    }
    return 0;
}
