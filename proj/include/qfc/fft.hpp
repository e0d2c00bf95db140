#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qfc/errors.hpp"

namespace qfc {

// Iterative radix-2 FFT with precomputed twiddles. Grid sizes in this
// project are powers of two by construction, so no other kernel is needed.
// Forward transform: X_k = sum_j x_j exp(-2*pi*i*j*k/n); inverse includes
// the 1/n factor.
class Fft {
 public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw InvalidConfigError("FFT size must be a power of two");
        twiddle_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
            twiddle_[k] = {std::cos(angle), std::sin(angle)};
        }
        bitrev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            bitrev_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::complex<double>* data) const { transform(data, false); }

    void inverse(std::complex<double>* data) const {
        transform(data, true);
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) data[i] *= inv;
    }

    void forward(std::vector<std::complex<double>>& v) const { forward(v.data()); }
    void inverse(std::vector<std::complex<double>>& v) const { inverse(v.data()); }

 private:
    void transform(std::complex<double>* a, bool invert) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = bitrev_[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t stride = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    std::complex<double> w = twiddle_[k * stride];
                    if (invert) w = std::conj(w);
                    const std::complex<double> u = a[i + k];
                    const std::complex<double> t = w * a[i + k + half];
                    a[i + k] = u + t;
                    a[i + k + half] = u - t;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::complex<double>> twiddle_;
    std::vector<std::size_t> bitrev_;
};

}  // namespace qfc
