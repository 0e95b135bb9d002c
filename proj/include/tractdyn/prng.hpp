#ifndef TRACTDYN_PRNG_HPP
#define TRACTDYN_PRNG_HPP

#include <cstdint>

namespace tractdyn {

// splitmix64 (Steele, Lea, Flood). Fixed so sampled paths are bit-reproducible.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        // drop the lowest (2^64 mod bound) values so r % bound is unbiased
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

  private:
    std::uint64_t state_;
};

} // namespace tractdyn

#endif
