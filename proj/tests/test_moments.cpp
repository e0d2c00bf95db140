#include <catch2/catch.hpp>
#include <cmath>
#include <vector>

#include "qfc/moments.hpp"
#include "qfc/rng.hpp"

using namespace qfc;

namespace {

const MomentState kFig1{1.0 / std::sqrt(2.0), 5.0 / (8.0 * std::sqrt(2.0)), 0.5, 0.0};
const std::vector<double> kKappaGrid{0.01, 0.05, 0.25, 1.0, 4.0, 16.0};

MomentState from_stationary(double kappa) {
    const auto s = stationary_moments(kappa);
    return {s.x, s.y, s.z, 0.0};
}

}  // namespace

TEST_CASE("moment flow right-hand side", "[moments]") {
    SECTION("stationary point is a fixed point") {
        for (double kappa : kKappaGrid) {
            const auto d = moment_rhs(from_stationary(kappa), kappa);
            CHECK(std::abs(d.dx) < 1e-10);
            CHECK(std::abs(d.dy) < 1e-10);
            CHECK(std::abs(d.dz) < 1e-10);
        }
    }
    SECTION("worked derivative at the transient initial conditions") {
        const auto d = moment_rhs(kFig1, 0.25);
        CHECK(d.dx == Approx(0.25).margin(1e-12));
        CHECK(d.dy == Approx(-0.40625).margin(1e-12));
        CHECK(d.dz == Approx(-0.7071067812).margin(1e-9));
    }
    SECTION("ground state is stationary without measurement") {
        const auto d = moment_rhs(MomentState{0.5, 0.5, 0.0, 0.0}, 1e-300);
        CHECK(std::abs(d.dx) < 1e-15);
        CHECK(std::abs(d.dy) < 1e-15);
        CHECK(std::abs(d.dz) < 1e-15);
    }
}

TEST_CASE("uncertainty defect", "[moments]") {
    CHECK(uncertainty_defect(kFig1) == Approx(0.0).margin(1e-14));
    CHECK(uncertainty_defect(MomentState{1.0, 1.0, 0.0, 0.0}) == Approx(0.75));
    for (double kappa : kKappaGrid)
        CHECK(std::abs(uncertainty_defect(from_stationary(kappa))) < 1e-10);
}

TEST_CASE("stationary moments closed forms", "[moments]") {
    SECTION("weak-measurement limit reaches the ground state") {
        const auto s = stationary_moments(1e-6);
        CHECK(s.x == Approx(0.5).margin(1e-9));
        CHECK(s.y == Approx(0.5).margin(1e-9));
        CHECK(s.z == Approx(0.0).margin(1e-6));
    }
    SECTION("kappa = 0.25") {
        const auto s = stationary_moments(0.25);
        CHECK(s.x == Approx(0.4961967868).margin(1e-9));
        CHECK(s.y == Approx(0.5114679408).margin(1e-9));
        CHECK(s.z == Approx(0.1231056256).margin(1e-9));
    }
    SECTION("kappa = 1") {
        const auto s = stationary_moments(1.0);
        CHECK(s.x == Approx(0.4550898606).margin(1e-9));
        CHECK(s.y == Approx(0.6435942529).margin(1e-9));
        CHECK(s.z == Approx(std::sqrt(2.0) - 1.0).margin(1e-12));
        CHECK(s.x * s.y == Approx(0.25 + 0.25 * s.z * s.z).margin(1e-12));
    }
    SECTION("product identity and monotonicity across kappa") {
        double prev_y = 0.0, prev_z = -1.0;
        for (int i = 0; i < 25; ++i) {
            const double kappa = 0.01 * std::pow(1600.0, i / 24.0);
            const auto s = stationary_moments(kappa);
            CHECK(s.x * s.y == Approx(0.25 + 0.25 * s.z * s.z).margin(1e-12));
            CHECK(s.y > prev_y);
            CHECK(s.z > prev_z);
            prev_y = s.y;
            prev_z = s.z;
        }
    }
}

TEST_CASE("moment integration", "[moments]") {
    SECTION("stationary start stays put") {
        const auto series = integrate_moments(from_stationary(0.25), 0.25, 5.0, 1e-3);
        for (const auto& s : series) {
            CHECK(s.x == Approx(series.front().x).margin(1e-12));
            CHECK(s.y == Approx(series.front().y).margin(1e-12));
            CHECK(s.z == Approx(series.front().z).margin(1e-12));
        }
    }
    SECTION("transient converges to the stationary values") {
        const auto final = integrate_moments_final(kFig1, 0.25, 50.0, 1e-3);
        const auto s = stationary_moments(0.25);
        CHECK(final.x == Approx(s.x).margin(1e-6));
        CHECK(final.y == Approx(s.y).margin(1e-6));
        CHECK(final.z == Approx(s.z).margin(1e-6));
    }
    SECTION("series and final-only integration agree") {
        const auto series = integrate_moments(kFig1, 0.25, 2.0, 1e-3);
        const auto final = integrate_moments_final(kFig1, 0.25, 2.0, 1e-3);
        CHECK(series.back().x == final.x);
        CHECK(series.back().y == final.y);
        CHECK(series.back().z == final.z);
        CHECK(series.back().tau == Approx(2.0));
    }
    SECTION("oversized steps are rejected, not clamped") {
        CHECK_THROWS_AS(integrate_moments(kFig1, 16.0, 10.0, 0.5), IntegrationUnstableError);
    }
}

TEST_CASE("defect decays as exp(-2 kappa int x)", "[moments]") {
    const double kappa = 0.25;
    MomentState s0 = kFig1;
    s0.y = (0.25 + 0.25 * s0.z * s0.z + 0.2) / s0.x;  // defect(0) = 0.2
    REQUIRE(uncertainty_defect(s0) == Approx(0.2).margin(1e-12));
    const double dtau = 1e-3;
    const auto series = integrate_moments(s0, kappa, 20.0, dtau);
    double integral_x = 0.0;
    double prev_defect = uncertainty_defect(s0);
    for (std::size_t i = 1; i < series.size(); ++i) {
        integral_x += 0.5 * dtau * (series[i - 1].x + series[i].x);
        const double defect = uncertainty_defect(series[i]);
        CHECK(defect <= prev_defect + 1e-12);  // monotone decay toward zero
        CHECK(defect >= -1e-9);
        prev_defect = defect;
        if (i % 2000 == 0) {
            const double predicted = 0.2 * std::exp(-2.0 * kappa * integral_x);
            CHECK(defect == Approx(predicted).epsilon(1e-3));
        }
    }
    // on-manifold runs keep the defect pinned at zero
    for (const auto& s : integrate_moments(kFig1, kappa, 20.0, dtau))
        CHECK(std::abs(uncertainty_defect(s)) < 1e-12);
}

TEST_CASE("SI moment flow matches the dimensionless flow under scaling", "[moments]") {
    RandomStream rng(23);
    for (int i = 0; i < 100; ++i) {
        OscillatorConfig cfg;
        cfg.mass = 0.2 + 2.0 * rng.next_uniform();
        cfg.omega = 0.2 + 2.0 * rng.next_uniform();
        cfg.gamma = 0.1 + 2.0 * rng.next_uniform();
        cfg.hbar = 0.5 + rng.next_uniform();
        const double kappa = relative_strength(cfg);
        MomentState m;
        m.x = 0.3 + rng.next_uniform();
        m.y = 0.3 + rng.next_uniform();
        m.z = rng.next_uniform() - 0.5;
        if (uncertainty_defect(m) < 0.0) m.y = (0.25 + 0.25 * m.z * m.z + 0.01) / m.x;
        const SIMoments si = to_si(m, cfg);
        const SIMoments dsi = si_moment_rhs(si, cfg);
        const auto d = moment_rhs(m, kappa);
        const DimensionlessScales sc = dimensionless_scales(cfg);
        CHECK(dsi.varQ * sc.q2 / sc.time == Approx(d.dx).margin(1e-12 * (1.0 + std::abs(d.dx))));
        CHECK(dsi.varP * sc.p2 / sc.time == Approx(d.dy).margin(1e-12 * (1.0 + std::abs(d.dy))));
        CHECK(dsi.cov * sc.qp / sc.time == Approx(d.dz).margin(1e-12 * (1.0 + std::abs(d.dz))));
        // unit conversions round-trip
        const MomentState back = to_dimensionless(si, cfg);
        CHECK(back.x == Approx(m.x).margin(1e-12));
        CHECK(back.y == Approx(m.y).margin(1e-12));
        CHECK(back.z == Approx(m.z).margin(1e-12));
    }
}

TEST_CASE("free-particle stationary moments", "[moments]") {
    SECTION("closed forms") {
        const OscillatorConfig cfg{1.0, 0.0, 1.0, 1.0};
        const auto s = stationary_moments_free(cfg);
        CHECK(s.varQ == Approx(1.0));
        CHECK(s.cov == Approx(1.0));
        CHECK(s.varP == Approx(0.5));
        CHECK(s.varQ * s.varP == Approx(0.25 + 0.25 * s.cov * s.cov).margin(1e-12));
        const auto s2 = stationary_moments_free(OscillatorConfig{2.0, 0.0, 8.0, 1.0});
        CHECK(s2.varQ == Approx(0.25));
        CHECK_THROWS_AS(stationary_moments_free(OscillatorConfig{1.0, 1.0, 1.0, 1.0}),
                        NotFreeParticleError);
    }
    SECTION("fixed point of the SI flow") {
        const OscillatorConfig cfg{1.0, 0.0, 1.0, 1.0};
        const auto s = stationary_moments_free(cfg);
        const auto d = si_moment_rhs(s, cfg);
        CHECK(std::abs(d.varQ) < 1e-14);
        CHECK(std::abs(d.varP) < 1e-14);
        CHECK(std::abs(d.cov) < 1e-14);
    }
    SECTION("long-time SI integration reaches them") {
        const OscillatorConfig cfg{1.0, 0.0, 1.0, 1.0};
        const SIMoments start{0.5, 0.5, 0.0, 0.0};
        const auto end = integrate_si_moments_final(start, cfg, 30.0, 1e-3);
        const auto s = stationary_moments_free(cfg);
        CHECK(end.varQ == Approx(s.varQ).epsilon(1e-6));
        CHECK(end.varP == Approx(s.varP).epsilon(1e-6));
        CHECK(end.cov == Approx(s.cov).epsilon(1e-6));
    }
}

TEST_CASE("moments rotate at twice the oscillator frequency without measurement", "[moments]") {
    // kappa ~ 0: variances exchange after a quarter period of the envelope,
    // i.e. tau = pi/2, and return after tau = pi.
    const MomentState start{0.8, 0.35, 0.0, 0.0};
    const double kappa = 1e-13;
    const double dtau = M_PI / 2.0 / 16384.0;  // integer number of steps
    const auto half = integrate_moments_final(start, kappa, M_PI / 2.0, dtau);
    CHECK(half.x == Approx(start.y).margin(1e-9));
    CHECK(half.y == Approx(start.x).margin(1e-9));
    const auto full = integrate_moments_final(start, kappa, M_PI, dtau);
    CHECK(full.x == Approx(start.x).margin(1e-9));
    CHECK(full.y == Approx(start.y).margin(1e-9));
    CHECK(full.z == Approx(start.z).margin(1e-9));
}
