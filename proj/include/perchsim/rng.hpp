#pragma once

#include <cmath>
#include <cstdint>

#include "perchsim/units.hpp"

namespace perchsim {

// SplitMix64: tiny, fast, and identical on every platform. All randomness in
// the project flows from one master seed through this generator so that runs
// are bit-reproducible.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Marsaglia polar method; one value per call, the pair partner is
    // cached. Avoids sin/cos so results do not depend on compiler sincos
    // contraction.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_cached_) {
            have_cached_ = false;
            return mean + sd * cached_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s <= 1e-300);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * scale;
        have_cached_ = true;
        return mean + sd * u * scale;
    }

  private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Stable mixing of a master seed with stream indices (cell, trial, channel...).
inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    return a;
}

inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return seed_mix(seed_mix(a, b), c);
}

} // namespace perchsim
