#include "uois/random.hpp"

#include "uois/core.hpp"

#include <cmath>
#include <numbers>

namespace uois {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint64_t m0 = 0xD2511F53u;
    constexpr std::uint64_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = m0 * ctr[0];
        const std::uint64_t p1 = m1 * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

std::uint32_t Rng::next_u32()
{
    if (used_ == 4) {
        buffer_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(stream_), std::uint32_t(stream_ >> 32)},
                             {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
        ++block_;
        used_ = 0;
    }
    return buffer_[std::size_t(used_++)];
}

std::uint64_t Rng::next_u64()
{
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double Rng::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo)
        throw Error("uniform_int: empty range");
    const std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo) + 1;
    if (span == 0)
        return std::int64_t(next_u64());
    const std::uint64_t limit = std::uint64_t(-span) % span;  // 2^64 mod span
    std::uint64_t x;
    do
        x = next_u64();
    while (x < limit);
    return lo + std::int64_t(x % span);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal(double mean, double stddev)
{
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape, double scale)
{
    if (!(shape > 0.0) || !(scale > 0.0))
        throw Error("gamma: shape and scale must be positive");
    if (shape < 1.0) {
        const double u = 1.0 - uniform();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
            return d * v * scale;
    }
}

double Rng::beta(double a, double b)
{
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

std::int64_t Rng::poisson(double lambda)
{
    if (!(lambda >= 0.0))
        throw Error("poisson: rate must be nonnegative");
    constexpr double chunk = 256.0;
    std::int64_t total = 0;
    while (lambda > 0.0) {
        const double l = std::min(lambda, chunk);
        lambda -= l;
        const double limit = std::exp(-l);
        double p = uniform();
        std::int64_t k = 0;
        while (p > limit) {
            p *= uniform();
            ++k;
        }
        total += k;
    }
    return total;
}

}  // namespace uois
