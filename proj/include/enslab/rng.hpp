#pragma once
// Seeded deterministic randomness.  Algorithm: splitmix64 (Steele, Lea,
// Flood 2014) — a fixed-increment Weyl sequence pushed through a 64-bit
// finalizer.  Identical seed => identical sample sequence, on every platform.
// Substreams are derived by hashing (seed, stream_id) so logically distinct
// experiments never share a sequence.

#include <cmath>
#include <cstdint>

namespace enslab {

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : base_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1): top 53 bits -> dyadic rational.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal, Box-Muller; the spare is cached so a stream used only
    // through normal() consumes uniforms in deterministic pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    // Independent substream for logical experiment `stream_id`.
    RngStream split(std::uint64_t stream_id) const {
        std::uint64_t z = base_ ^ (0x9E3779B97F4A7C15ull * (stream_id + 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return RngStream(z ^ (z >> 31));
    }

    std::uint64_t seed() const { return base_; }

  private:
    std::uint64_t base_;
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace enslab
