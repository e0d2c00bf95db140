#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qfc/control.hpp"
#include "qfc/errors.hpp"
#include "qfc/moments.hpp"
#include "qfc/quadratures.hpp"

namespace qfc::fock {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

struct Operators {
    Matrix a;
    Matrix a_dag;
    Matrix n;
    Matrix H;
};

// Ladder matrices on the truncated basis {|0>, ..., |n_max>} and
// H = hbar omega (n + 1/2).
inline Operators build_operators(int n_max, const OscillatorConfig& cfg) {
    cfg.validate();
    if (n_max < 2) throw InvalidConfigError("n_max must be >= 2");
    const int d = n_max + 1;
    Operators ops;
    ops.a = Matrix::Zero(d, d);
    for (int k = 1; k < d; ++k) ops.a(k - 1, k) = std::sqrt(static_cast<double>(k));
    ops.a_dag = ops.a.adjoint();
    ops.n = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) ops.n(k, k) = static_cast<double>(k);
    ops.H = cfg.hbar * cfg.omega * (ops.n + 0.5 * Matrix::Identity(d, d));
    return ops;
}

struct ValidationThresholds {
    double hermiticity = 1e-10;
    double trace = 1e-8;
    double positivity = -1e-6;
    double leak = 1e-6;
};

struct FockDensityMatrix {
    int n_max = 0;
    Matrix rho;

    double n_mean() const {
        double s = 0.0;
        for (int k = 0; k <= n_max; ++k) s += static_cast<double>(k) * rho(k, k).real();
        return s;
    }

    double purity() const { return rho.cwiseAbs2().sum(); }

    // Population of the top two levels; the truncation watchdog.
    double leak() const { return rho(n_max, n_max).real() + rho(n_max - 1, n_max - 1).real(); }

    void validate(const ValidationThresholds& th = {}) const {
        if (n_max < 2 || rho.rows() != n_max + 1 || rho.cols() != n_max + 1)
            throw InvalidConfigError("density matrix dimension mismatch");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > th.hermiticity)
            throw NumericalError("density matrix lost hermiticity");
        if (std::abs(rho.trace().real() - 1.0) > th.trace || std::abs(rho.trace().imag()) > th.trace)
            throw NumericalError("density matrix trace drifted from one");
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                                 Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < th.positivity)
            throw PositivityLossError("density matrix developed a negative eigenvalue");
        if (leak() > th.leak)
            throw TruncationLeakError("population reached the top of the truncated basis");
    }
};

inline FockDensityMatrix number_state(int n_max, int k) {
    if (k < 0 || k > n_max) throw InvalidConfigError("number state outside the basis");
    FockDensityMatrix r;
    r.n_max = n_max;
    r.rho = Matrix::Zero(n_max + 1, n_max + 1);
    r.rho(k, k) = 1.0;
    return r;
}

// Bose-Einstein diagonal state with mean occupation N (of the untruncated
// distribution), renormalized on the truncated basis.
inline FockDensityMatrix thermal_state(int n_max, double N) {
    if (N < 0.0) throw InvalidConfigError("occupation must be >= 0");
    FockDensityMatrix r;
    r.n_max = n_max;
    r.rho = Matrix::Zero(n_max + 1, n_max + 1);
    const double ratio = N / (N + 1.0);
    double w = 1.0, total = 0.0;
    for (int k = 0; k <= n_max; ++k) {
        r.rho(k, k) = w;
        total += w;
        w *= ratio;
    }
    r.rho /= total;
    return r;
}

namespace detail {

// Tridiagonal operator with zero diagonal (any real-linear combination of
// q and p has this shape in the number basis). sup[k] = O(k, k+1),
// sub[k] = O(k+1, k).
struct OffDiagonalOperator {
    std::vector<Complex> sup;
    std::vector<Complex> sub;
};

inline OffDiagonalOperator make_qp_operator(double coef_q, double coef_p,
                                            const OscillatorConfig& cfg, int n_max) {
    const double cq = std::sqrt(cfg.hbar / (2.0 * cfg.mass * cfg.omega));
    const double cp = std::sqrt(cfg.hbar * cfg.mass * cfg.omega / 2.0);
    OffDiagonalOperator op;
    op.sup.resize(static_cast<std::size_t>(n_max));
    op.sub.resize(static_cast<std::size_t>(n_max));
    for (int k = 0; k < n_max; ++k) {
        const double root = std::sqrt(static_cast<double>(k + 1));
        // q = cq (a + a^+), p = i cp (a^+ - a)
        op.sup[static_cast<std::size_t>(k)] = root * Complex(coef_q * cq, -coef_p * cp);
        op.sub[static_cast<std::size_t>(k)] = root * Complex(coef_q * cq, coef_p * cp);
    }
    return op;
}

// C = O X - X O for tridiagonal O, dense X.
inline Matrix commutator(const OffDiagonalOperator& o, const Matrix& x) {
    const int d = static_cast<int>(x.rows());
    Matrix c = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            Complex s{0.0, 0.0};
            if (i + 1 < d) s += o.sup[static_cast<std::size_t>(i)] * x(i + 1, j);
            if (i > 0) s += o.sub[static_cast<std::size_t>(i - 1)] * x(i - 1, j);
            if (j > 0) s -= x(i, j - 1) * o.sup[static_cast<std::size_t>(j - 1)];
            if (j + 1 < d) s -= x(i, j + 1) * o.sub[static_cast<std::size_t>(j)];
            c(i, j) = s;
        }
    }
    return c;
}

inline Matrix anticommutator(const OffDiagonalOperator& o, const Matrix& x) {
    const int d = static_cast<int>(x.rows());
    Matrix c = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            Complex s{0.0, 0.0};
            if (i + 1 < d) s += o.sup[static_cast<std::size_t>(i)] * x(i + 1, j);
            if (i > 0) s += o.sub[static_cast<std::size_t>(i - 1)] * x(i - 1, j);
            if (j > 0) s += x(i, j - 1) * o.sup[static_cast<std::size_t>(j - 1)];
            if (j + 1 < d) s += x(i, j + 1) * o.sub[static_cast<std::size_t>(j)];
            c(i, j) = s;
        }
    }
    return c;
}

}  // namespace detail

// Deterministic (ensemble-averaged) part of the feedback master equation on
// the truncated basis, with M from the measurement frame and F from the
// gains:
//   drho/dt = -(i/hbar)[H, rho] - (gamma/8)[M,[M,rho]]
//             - 1/(2 hbar^2 gamma) [F,[F,rho]] - (i/(2 hbar))[F,{M,rho}]
inline Matrix full_me_rhs(const Matrix& rho, const OscillatorConfig& cfg,
                          const QuadratureFrame& frame, const FeedbackGains& gains) {
    cfg.validate();
    const int d = static_cast<int>(rho.rows());
    const int n_max = d - 1;
    const double hbar = cfg.hbar;

    Matrix out = Matrix::Zero(d, d);
    // Hamiltonian commutator: H is diagonal hbar*omega*(k + 1/2).
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = Complex(0.0, -cfg.omega * static_cast<double>(i - j)) * rho(i, j);

    const auto M = detail::make_qp_operator(frame.alpha, frame.beta, cfg, n_max);
    const Matrix m1 = detail::commutator(M, rho);
    out -= (cfg.gamma / 8.0) * detail::commutator(M, m1);

    const auto [chi, delta] = gains_frame_to_lab(gains.u, gains.v, frame);
    if (chi != 0.0 || delta != 0.0) {
        const auto F = detail::make_qp_operator(chi, delta, cfg, n_max);
        const Matrix f1 = detail::commutator(F, rho);
        out -= 1.0 / (2.0 * hbar * hbar * cfg.gamma) * detail::commutator(F, f1);
        const Matrix ac = detail::anticommutator(M, rho);
        out -= Complex(0.0, 1.0 / (2.0 * hbar)) * detail::commutator(F, ac);
    }
    return out;
}

// Rotating-wave form of the feedback master equation:
//   drho/dt = -(i/hbar)[H, rho] - (i u /(4 m omega)) [{a, a^+}, rho]
//             + (c - v) D[a] rho + c D[a^+] rho
// with the pump constant c of the control module. Ladder products follow the
// truncated-matrix semantics, which keeps the trace exactly conserved.
inline Matrix rwa_me_rhs(const Matrix& rho, const OscillatorConfig& cfg,
                         const FeedbackGains& gains) {
    cfg.validate();
    const double kappa = relative_strength(cfg);
    const double c = pump_constant(gains, kappa, cfg);
    const double pump = c;
    const double dissip = c - gains.v;
    const double lamb = gains.u / (4.0 * cfg.mass * cfg.omega);
    const int d = static_cast<int>(rho.rows());
    const int n_max = d - 1;

    Matrix out(d, d);
    for (int i = 0; i < d; ++i) {
        const double di = i < n_max ? 2.0 * i + 1.0 : static_cast<double>(n_max);
        const double ni = static_cast<double>(i);
        const double mi = i < n_max ? ni + 1.0 : 0.0;  // (a a^+) diagonal, truncated
        for (int j = 0; j < d; ++j) {
            const double dj = j < n_max ? 2.0 * j + 1.0 : static_cast<double>(n_max);
            const double nj = static_cast<double>(j);
            const double mj = j < n_max ? nj + 1.0 : 0.0;
            Complex v = Complex(0.0, -(cfg.omega * (ni - nj) + lamb * (di - dj))) * rho(i, j);
            // D[a]: a rho a^+ - {a^+ a, rho}/2
            Complex da{0.0, 0.0};
            if (i < n_max && j < n_max)
                da += std::sqrt((ni + 1.0) * (nj + 1.0)) * rho(i + 1, j + 1);
            da -= 0.5 * (ni + nj) * rho(i, j);
            // D[a^+]: a^+ rho a - {a a^+, rho}/2
            Complex dad{0.0, 0.0};
            if (i > 0 && j > 0) dad += std::sqrt(ni * nj) * rho(i - 1, j - 1);
            dad -= 0.5 * (mi + mj) * rho(i, j);
            out(i, j) = v + dissip * da + pump * dad;
        }
    }
    return out;
}

using Rhs = std::function<Matrix(const Matrix&)>;

struct FockRunPoint {
    double t = 0.0;
    double n_mean = 0.0;
    double trace = 0.0;
    double purity = 0.0;
    double leak = 0.0;
};

struct FockRunResult {
    std::vector<FockRunPoint> series;
    FockDensityMatrix final_state;
};

// Fixed-step 4th-order integration; invariants are re-checked at every
// recorded step.
inline FockRunResult integrate(const FockDensityMatrix& rho0, const Rhs& rhs, double t_end,
                               double dt, int record_stride = 1,
                               const ValidationThresholds& th = {}) {
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw InvalidConfigError("t_end and dt must be positive");
    if (record_stride < 1) throw InvalidConfigError("record_stride must be >= 1");
    rho0.validate(th);
    const long n_steps = std::lround(t_end / dt);
    FockDensityMatrix state = rho0;
    FockRunResult res;
    for (long k = 0; k <= n_steps; ++k) {
        if (k % record_stride == 0 || k == n_steps) {
            state.validate(th);
            res.series.push_back({static_cast<double>(k) * dt, state.n_mean(),
                                  state.rho.trace().real(), state.purity(), state.leak()});
        }
        if (k == n_steps) break;
        const Matrix k1 = rhs(state.rho);
        const Matrix k2 = rhs(state.rho + 0.5 * dt * k1);
        const Matrix k3 = rhs(state.rho + 0.5 * dt * k2);
        const Matrix k4 = rhs(state.rho + dt * k3);
        state.rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    res.final_state = std::move(state);
    return res;
}

struct FockRunSpec {
    enum class Generator { full, rwa };
    Generator generator = Generator::rwa;
    OscillatorConfig cfg;
    QuadratureFrame frame = position_frame();
    FeedbackGains gains;
    int n_max = 30;
    double t_end = 100.0;
    double dt = 0.01;
    int record_stride = 100;
    ValidationThresholds thresholds;
    int max_doublings = 3;
    // Initial state builder, called with the current n_max.
    std::function<FockDensityMatrix(int)> initial_state = [](int n) {
        return number_state(n, 1);
    };
};

// Runs a master-equation integration, doubling n_max and restarting when the
// truncation watchdog trips.
inline FockRunResult run_master_equation(const FockRunSpec& spec) {
    int n_max = spec.n_max;
    for (int attempt = 0;; ++attempt) {
        const Rhs rhs = spec.generator == FockRunSpec::Generator::rwa
                            ? Rhs([&](const Matrix& r) { return rwa_me_rhs(r, spec.cfg, spec.gains); })
                            : Rhs([&](const Matrix& r) {
                                  return full_me_rhs(r, spec.cfg, spec.frame, spec.gains);
                              });
        try {
            return integrate(spec.initial_state(n_max), rhs, spec.t_end, spec.dt,
                             spec.record_stride, spec.thresholds);
        } catch (const TruncationLeakError&) {
            if (attempt >= spec.max_doublings) throw;
            n_max *= 2;
        }
    }
}

}  // namespace qfc::fock
