#include "uois/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

namespace uois {
namespace {

using Words = std::array<std::uint32_t, 4>;

TEST(Philox, KnownAnswerVectors)
{
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Words{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Words{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (Words{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, StreamLayout)
{
    Rng rng(0x0123456789abcdefULL, 7);
    const auto block0 = philox4x32({0, 0, 7, 0}, {0x89abcdef, 0x01234567});
    const auto block1 = philox4x32({1, 0, 7, 0}, {0x89abcdef, 0x01234567});
    for (auto w : block0)
        EXPECT_EQ(rng.next_u32(), w);
    for (auto w : block1)
        EXPECT_EQ(rng.next_u32(), w);
}

TEST(Rng, DeterministicAndStreamsDiffer)
{
    Rng a(5), b(5), c = Rng(5).substream(1);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        same += x == c.next_u64();
    }
    EXPECT_EQ(same, 0);
}

TEST(Rng, UniformIntCoversRangeUniformly)
{
    Rng rng(6);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto v = rng.uniform_int(-3, 3);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 3);
        ++counts[std::size_t(v + 3)];
    }
    double chi2 = 0;
    for (int c : counts)
        chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
    EXPECT_LT(chi2, 22.46);  // p = 0.001 at 6 dof
    EXPECT_EQ(rng.uniform_int(4, 4), 4);
}

struct Moments {
    double mean = 0, var = 0;
};

Moments sample(int n, const std::function<double()>& draw)
{
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = draw();
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    return {m, s2 / n - m * m};
}

// Sample mean within 4 standard errors, sample variance within 10%.
void expect_moments(const Moments& got, double mean, double var, int n)
{
    EXPECT_NEAR(got.mean, mean, 4 * std::sqrt(var / n));
    EXPECT_NEAR(got.var, var, 0.1 * var);
}

TEST(Rng, SamplerMoments)
{
    constexpr int n = 200000;
    Rng rng(7);
    expect_moments(sample(n, [&] { return rng.uniform(); }), 0.5, 1.0 / 12, n);
    expect_moments(sample(n, [&] { return rng.normal(2.0, 3.0); }), 2.0, 9.0, n);
    expect_moments(sample(n, [&] { return rng.gamma(2.0, 0.5); }), 1.0, 0.5, n);
    expect_moments(sample(n, [&] { return rng.gamma(0.4, 2.0); }), 0.8, 1.6, n);
    expect_moments(sample(n, [&] { return rng.gamma(1000.0, 0.001); }), 1.0, 0.001, n);
    expect_moments(sample(n, [&] { return rng.beta(1.4, 3.0); }), 1.4 / 4.4, 1.4 * 3.0 / (4.4 * 4.4 * 5.4), n);
    expect_moments(sample(n, [&] { return double(rng.poisson(2.0)); }), 2.0, 2.0, n);
    expect_moments(sample(20000, [&] { return double(rng.poisson(700.0)); }), 700.0, 700.0, 20000);
    expect_moments(sample(n, [&] { return double(rng.bernoulli(0.3)); }), 0.3, 0.21, n);
}

TEST(Rng, EdgeCases)
{
    Rng rng(8);
    EXPECT_EQ(rng.poisson(0.0), 0);
    EXPECT_FALSE(rng.bernoulli(0.0));
    EXPECT_TRUE(rng.bernoulli(1.0));
    for (int i = 0; i < 1000; ++i) {
        const double b = rng.beta(0.5, 0.5);
        ASSERT_GE(b, 0.0);
        ASSERT_LE(b, 1.0);
    }
}

}  // namespace
}  // namespace uois
