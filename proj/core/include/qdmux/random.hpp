#pragma once

#include <cstdint>
#include <random>

namespace qdmux {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seedable random source with hand-rolled variate transforms so a given
/// seed yields the same draw sequence on every build of this code base.
/// Substreams are derived from (master seed, stream id) so Monte Carlo
/// blocks can run on any number of workers without changing the result.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : gen_(seed) {}

    static RandomSource substream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t s = master_seed ^ (stream_id * 0xD1B54A32D192ED03ULL);
        std::uint64_t mixed = splitmix64(s);
        return RandomSource(mixed);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) {
        // 1 - uniform() is in (0, 1], keeps the log finite
        return -mean * std::log(1.0 - uniform());
    }

    double normal(double mean, double sigma);

    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qdmux
