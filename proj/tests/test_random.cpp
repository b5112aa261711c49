#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shotnoise/random.hpp"
#include "shotnoise/stats.hpp"
#include "test_support.hpp"

using namespace shotnoise;

TEST(Philox, MatchesPublishedKnownAnswers)
{
    using detail::philox4x32;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
              (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameAddressSameSequence)
{
    RngStream a(7, {3, 1});
    RngStream b(7, {3, 1});
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(RngStream, FrozenFirstWords)
{
    // Regression values: the sequence must not change across builds or platforms.
    RngStream s(1, {0});
    EXPECT_EQ(s.next_u64(), 0x8d06478aa54aec44ull);
    EXPECT_EQ(s.next_u64(), 0x91e5f87d6940af1cull);
    EXPECT_EQ(s.next_u64(), 0xb08b7a5705fa4361ull);
}

TEST(RngStream, DistinctPathsDiffer)
{
    RngStream a(7, {3, 1});
    RngStream b(7, {3, 2});
    RngStream c(8, {3, 1});
    RngStream d(7, {3});
    int equal_ab = 0;
    int equal_ac = 0;
    int equal_ad = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        equal_ab += x == b.next_u64();
        equal_ac += x == c.next_u64();
        equal_ad += x == d.next_u64();
    }
    EXPECT_EQ(equal_ab, 0);
    EXPECT_EQ(equal_ac, 0);
    EXPECT_EQ(equal_ad, 0);
}

TEST(RngStream, SubstreamEqualsExplicitPath)
{
    RngStream parent(11, {4});
    parent.next_u64();  // position does not matter
    auto child = parent.substream(2);
    RngStream direct(11, {4, 2});
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(child.next_u64(), direct.next_u64());
    }
    EXPECT_EQ(parent.substream({2, 5}).stream_path(), (std::vector<std::uint64_t>{4, 2, 5}));
}

TEST(RngStream, SeekReplays)
{
    RngStream s(5, {1});
    std::vector<std::uint64_t> words;
    for (int i = 0; i < 9; ++i) {
        words.push_back(s.next_u64());
    }
    s.seek(3);
    for (int i = 3; i < 9; ++i) {
        EXPECT_EQ(s.next_u64(), words[i]);
    }
    EXPECT_EQ(s.position(), 9u);
}

TEST(RngStream, UniformInOpenInterval)
{
    RngStream s(2, {});
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(RngStream, NormalMoments)
{
    RngStream s(3, {});
    double m1 = 0.0;
    double m2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
    }
    EXPECT_NEAR(m1 / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.015);
}

TEST(GammaArrivals, EmptyForZeroCount)
{
    EXPECT_TRUE(gamma_arrivals(RngStream(1, {}), 0).empty());
}

TEST(GammaArrivals, StrictlyIncreasingAndPositive)
{
    const auto g = gamma_arrivals(RngStream(1, {9}), 10000);
    ASSERT_EQ(g.size(), 10000u);
    EXPECT_GT(g.front(), 0.0);
    for (std::size_t j = 1; j < g.size(); ++j) {
        ASSERT_GT(g[j], g[j - 1]);
    }
}

TEST(GammaArrivals, ShorterRequestIsPrefix)
{
    const RngStream s(4, {2});
    const auto short_run = gamma_arrivals(s, 100);
    const auto long_run = gamma_arrivals(s, 101);
    ASSERT_EQ(long_run.size(), 101u);
    EXPECT_TRUE(std::equal(short_run.begin(), short_run.end(), long_run.begin()));
}

TEST(GammaArrivals, LawOfLargeNumbers)
{
    double mean = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        mean += gamma_arrivals(RngStream(21, {i}), 10000).back() / 10000.0;
    }
    mean /= 100.0;
    EXPECT_GE(mean, 1.0 - 3e-2);
    EXPECT_LE(mean, 1.0 + 3e-2);
}

TEST(GammaArrivals, UntilLevelStopsAtLevel)
{
    const RngStream s(8, {1});
    const auto until = gamma_arrivals_until(s, 50.0);
    ASSERT_FALSE(until.empty());
    EXPECT_LE(until.back(), 50.0);
    const auto longer = gamma_arrivals(s, until.size() + 1);
    EXPECT_TRUE(std::equal(until.begin(), until.end(), longer.begin()));
    EXPECT_GT(longer.back(), 50.0);
    EXPECT_TRUE(gamma_arrivals_until(s, 0.0).empty());
}

TEST(Rademacher, EmptyForZeroCount)
{
    EXPECT_TRUE(rademacher(RngStream(1, {}), 0).empty());
}

TEST(Rademacher, ValuesAndMean)
{
    const auto signs = rademacher(RngStream(12, {}), 1000000);
    long sum = 0;
    for (int e : signs) {
        ASSERT_TRUE(e == 1 || e == -1);
        sum += e;
    }
    const double mean = static_cast<double>(sum) / 1e6;
    EXPECT_GE(mean, -0.004);
    EXPECT_LE(mean, 0.004);
}

TEST(SampleSas, RejectsBadParameters)
{
    EXPECT_THROW(sample_sas(RngStream(1, {}), 1.5, 0.0, 10), std::domain_error);
    EXPECT_THROW(sample_sas(RngStream(1, {}), 0.0, 1.0, 10), std::domain_error);
    EXPECT_THROW(sample_sas(RngStream(1, {}), 2.0, 1.0, 10), std::domain_error);
    EXPECT_THROW(sample_sas(RngStream(1, {}), -1.0, 1.0, 10), std::domain_error);
}

TEST(SampleSas, MedianNearZero)
{
    for (double scale : {1.0, 3.0}) {
        const EmpiricalSample sample(sample_sas(RngStream(13, {}), 1.5, scale, 100000));
        EXPECT_LE(std::abs(median(sample)), 0.02 * scale);
    }
}

TEST(SampleSas, EmpiricalCdfSymmetric)
{
    const EmpiricalSample sample(sample_sas(RngStream(14, {}), 1.5, 1.0, 10000));
    double worst = 0.0;
    for (double x : sample.sorted()) {
        // P(X <= x) + P(X < -x) - 1, with P(X < -x) from the count strictly below.
        const auto& v = sample.sorted();
        const double below = static_cast<double>(std::lower_bound(v.begin(), v.end(), -x) - v.begin()) / v.size();
        worst = std::max(worst, std::abs(sample.cdf(x) + below - 1.0));
    }
    EXPECT_LT(worst, 3.0 * 1.36 / std::sqrt(10000.0));
}

TEST(SampleSas, CauchyCaseMatchesExactLaw)
{
    const double scale = 2.0;
    const EmpiricalSample sample(sample_sas(RngStream(15, {}), 1.0, scale, 20000));
    const double d = ks_one_sample(sample, [&](double x) { return 0.5 + std::atan(x / scale) / std::numbers::pi; });
    EXPECT_LT(d, 1.36 / std::sqrt(20000.0));
}

TEST(SampleSas, CharacteristicFunction)
{
    const double alpha = 1.5;
    const double scale = 0.7;
    const auto x = sample_sas(RngStream(16, {}), alpha, scale, 200000);
    for (double theta : {0.5, 1.0, 2.0}) {
        double re = 0.0;
        for (double v : x) {
            re += std::cos(theta * v);
        }
        re /= static_cast<double>(x.size());
        EXPECT_NEAR(re, std::exp(-std::pow(scale * theta, alpha)), 0.01) << "theta=" << theta;
    }
}

TEST(SampleSas, AgreesWithSeriesOracle)
{
    const auto cms = sample_sas(RngStream(17, {}), 1.5, 1.0, 10000);
    const auto series = oracle::symmetric_series(1.5, 10000, 10000, 17);
    EXPECT_LT(ks_two_sample(EmpiricalSample(cms), EmpiricalSample(series)), 0.02);
}

TEST(SampleSas, TailProbabilityMatchesSeriesOracle)
{
    const auto cms = sample_sas(RngStream(18, {}), 1.5, 1.0, 100000);
    const auto series = oracle::symmetric_series(1.5, 500, 100000, 18);
    auto tail = [](const std::vector<double>& v) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return std::abs(x) > 10.0; })) /
               static_cast<double>(v.size());
    };
    // Both tail frequencies are binomial; compare within four joint standard deviations.
    const double p_cms = tail(cms);
    const double p_series = tail(series);
    const double sd = std::sqrt(p_series * (1.0 - p_series) / 100000.0);
    EXPECT_NEAR(p_cms, p_series, 4.0 * std::sqrt(2.0) * sd);
}

TEST(SamplePositiveStable, RejectsBadParameters)
{
    EXPECT_THROW(sample_positive_stable(RngStream(1, {}), 1.0, 1.0, 10), std::domain_error);
    EXPECT_THROW(sample_positive_stable(RngStream(1, {}), 0.0, 1.0, 10), std::domain_error);
    EXPECT_THROW(sample_positive_stable(RngStream(1, {}), 0.5, 0.0, 10), std::domain_error);
}

TEST(SamplePositiveStable, OutputsPositive)
{
    for (double a : {0.3, 0.75, 0.95}) {
        const auto x = sample_positive_stable(RngStream(19, {}), a, 1.0, 10000);
        EXPECT_TRUE(std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; })) << a;
    }
}

TEST(SamplePositiveStable, ScaleConventionPinnedBySeriesOracle)
{
    const auto cms = sample_positive_stable(RngStream(20, {}), 0.75, 1.0, 10000);
    const auto series = oracle::one_sided_series(0.75, 10000, 10000, 20);
    EXPECT_LT(ks_two_sample(EmpiricalSample(cms), EmpiricalSample(series)), 0.02);
}

TEST(SamplePositiveStable, LaplaceTransform)
{
    const double a = 0.75;
    const double scale = 1.3;
    const auto x = sample_positive_stable(RngStream(22, {}), a, scale, 200000);
    for (double lambda : {0.2, 1.0, 3.0}) {
        double m = 0.0;
        for (double v : x) {
            m += std::exp(-lambda * v);
        }
        m /= static_cast<double>(x.size());
        const double exact = std::exp(-std::pow(scale * lambda, a) / std::cos(std::numbers::pi * a / 2.0));
        EXPECT_NEAR(m, exact, 0.005) << "lambda=" << lambda;
    }
}

TEST(SamplePositiveStable, ScaleFamily)
{
    const double sigma = 2.5;
    const auto scaled = sample_positive_stable(RngStream(23, {0}), 0.75, sigma, 10000);
    auto unit = sample_positive_stable(RngStream(23, {1}), 0.75, 1.0, 10000);
    for (double& v : unit) {
        v *= sigma;
    }
    EXPECT_LT(ks_two_sample(EmpiricalSample(scaled), EmpiricalSample(unit)), 0.02);
}
