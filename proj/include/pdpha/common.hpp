#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdpha {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// splitmix64: used to derive independent sub-seeds from a base seed.
inline uint64_t mix_seed(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(a ^ mix_seed(b)); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) { return mix_seed(mix_seed(a, b) ^ mix_seed(c)); }

// Deterministic RNG with explicit float conversions so that streams are
// reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : s_(mix_seed(seed)) {
        if (s_ == 0) s_ = 0x6a09e667f3bcc909ULL;
    }

    uint64_t next_u64() {
        // xorshift64*
        uint64_t x = s_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        s_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    uint64_t below(uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller; one value per call, pair cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    uint64_t s_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pdpha
