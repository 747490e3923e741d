#ifndef CTRW_RNG_HPP
#define CTRW_RNG_HPP

// Seeded random number streams for reproducible experiments.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard, so results are bit-identical across platforms. The standard
// *distributions* are not portable, so uniform doubles and bounded integers
// are generated here directly from the raw 64-bit output.
//
// Independent streams (network generation, initial-condition noise, retry
// attempts) are derived from one root seed with splitmix64, so changing one
// stream id never perturbs another stream.

#include <cstdint>
#include <random>

namespace ctrw {

// One splitmix64 step (Steele, Lea, Flood 2014). Used for seed derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seed for sub-stream `stream_id` of the generator rooted at `root_seed`.
inline std::uint64_t derive_stream_seed(std::uint64_t root_seed, std::uint64_t stream_id) {
    std::uint64_t state = root_seed;
    std::uint64_t mixed = splitmix64_next(state);
    state = mixed ^ (stream_id * 0xD1B54A32D192ED03ull);
    return splitmix64_next(state);
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream stream(std::uint64_t root_seed, std::uint64_t stream_id) {
        return RngStream(derive_stream_seed(root_seed, stream_id));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace ctrw

#endif
