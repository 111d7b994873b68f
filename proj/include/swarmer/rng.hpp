#pragma once

#include <cstdint>
#include <random>

namespace swarmer {

// Seeded random stream. Draws are derived from the raw 64-bit engine output
// so sequences are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection keeps the draw unbiased.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % n;
    }

    bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

    std::uint64_t next() { return engine_(); }

    // Independent child stream; used to give observers their own randomness.
    Rng fork(std::uint64_t salt) {
        std::seed_seq seq{static_cast<std::uint32_t>(engine_()), static_cast<std::uint32_t>(salt),
                          static_cast<std::uint32_t>(salt >> 32)};
        std::uint64_t seed = 0;
        std::uint32_t words[2];
        seq.generate(words, words + 2);
        seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        return Rng(seed);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace swarmer
