#pragma once

#include <cmath>
#include <cstdint>

namespace qfc {

// Counter-based random stream built on the SplitMix64 finalizer. The k-th
// output of a stream is a pure function of (seed, k), so streams can be
// split by index without touching each other: trajectory i of an ensemble
// draws from stream(master_seed, i) regardless of scheduling order.
class RandomStream {
 public:
    RandomStream() : state_(0) {}

    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    // Stream for substream `index` of a master seed. One finalizer round
    // decorrelates neighbouring indices.
    RandomStream(std::uint64_t master_seed, std::uint64_t index)
        : state_(mix(master_seed + 0x9E3779B97F4A7C15ULL * (index + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform in the open interval (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the pair partner is cached.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Normal(0, dt): a Wiener increment over a step of length dt.
    double next_wiener(double dt) { return next_normal() * std::sqrt(dt); }

 private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace qfc
