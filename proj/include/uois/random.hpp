#pragma once

// Philox4x32-10 counter-based generator and the samplers built on it. Every
// draw is defined by (seed, stream, position), so results are reproducible
// across compilers and standard libraries.

#include <array>
#include <cstdint>

namespace uois {

/// One Philox4x32-10 block: 4 output words for a 128-bit counter and 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    /// Independent generator with the same seed and a different stream id.
    Rng substream(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    double uniform();                         // [0, 1), 53 bits
    double uniform(double lo, double hi);     // [lo, hi)
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive, unbiased
    bool bernoulli(double p);
    double normal(double mean = 0.0, double stddev = 1.0);  // Box-Muller
    double gamma(double shape, double scale);                // Marsaglia-Tsang
    double beta(double a, double b);
    std::int64_t poisson(double lambda);  // Knuth, split into chunks for large rates

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

}  // namespace uois
