#pragma once

#include <cmath>
#include <cstdint>

namespace salco {

// Counter-based pseudo-random stream (SplitMix64 finalizer over key+counter).
// Pure integer arithmetic, so the same seed yields the same sequence on every
// platform, and independent substreams can be forked without sharing state.
class Rng {
public:
    explicit Rng(uint64_t key) : key_(key) {}

    uint64_t next_u64() {
        ++counter_;
        return finalize(key_ + counter_ * 0x9E3779B97F4A7C15ull);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller; consumes exactly two draws per call.
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Independent child stream; forking does not advance this stream.
    Rng fork(uint64_t stream) const { return Rng(mix(key_, stream)); }

    static uint64_t mix(uint64_t a, uint64_t b) {
        return finalize(a ^ finalize(b + 0x9E3779B97F4A7C15ull));
    }

    uint64_t key() const { return key_; }

private:
    static uint64_t finalize(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    uint64_t key_;
    uint64_t counter_ = 0;
};

// Stream tags for deriving named substreams from one master seed.
namespace stream {
inline constexpr uint64_t kScene = 0x5363656e65ull;       // per-scene generation
inline constexpr uint64_t kInitParams = 0x496e6974ull;    // weight initialization
inline constexpr uint64_t kInitBoxes = 0x426f786573ull;   // random-crop region init
inline constexpr uint64_t kInitQueue = 0x51756575ull;     // memory queue fill
inline constexpr uint64_t kPairs = 0x5061697273ull;       // per-epoch pair construction
inline constexpr uint64_t kFallback = 0x46616c6cull;      // refine fallback crops
}  // namespace stream

}  // namespace salco
