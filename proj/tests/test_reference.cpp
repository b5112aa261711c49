#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shotnoise/constants.hpp"
#include "shotnoise/reference.hpp"
#include "shotnoise/series.hpp"
#include "test_support.hpp"

using namespace shotnoise;

namespace {

/// f(t,s) = 1{s/2 <= t < s/2 + 1/2}: every section jumps by +1 and then by -1.
Kernel pulse_kernel()
{
    auto in_support = [](double s) { return s > 0.0 && s < 1.0; };
    return Kernel(
        "pulse", [=](double t, double s) { return in_support(s) && t >= s / 2 && t < s / 2 + 0.5 ? 1.0 : 0.0; },
        [=](double s) { return in_support(s) ? std::vector<double>{s / 2, s / 2 + 0.5} : std::vector<double>{}; },
        [=](double t, double s) {
            if (!in_support(s)) {
                return 0.0;
            }
            return t == s / 2 ? 1.0 : (t == s / 2 + 0.5 ? -1.0 : 0.0);
        },
        [=](double s) { return in_support(s) ? 1.0 : 0.0; });
}

Kernel smooth_kernel()
{
    return time_constant_kernel([](double s) { return std::sin(3.0 * s); });
}

}  // namespace

TEST(Frechet, CdfBasics)
{
    const FrechetLaw law(1.5, 2.0);
    EXPECT_DOUBLE_EQ(law.cdf(2.0), std::exp(-1.0));
    EXPECT_EQ(law.cdf(0.0), 0.0);
    EXPECT_EQ(law.cdf(-3.0), 0.0);
    EXPECT_EQ(frechet_cdf(law, 2.0), law.cdf(2.0));
    EXPECT_NEAR(FrechetLaw(1.5, 1.0).median(), std::pow(std::log(2.0), -1.0 / 1.5), 1e-12);
    EXPECT_NEAR(FrechetLaw(1.5, 1.0).median(), 1.27678, 1e-5);
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) {
        EXPECT_NEAR(law.cdf(law.quantile(p)), p, 1e-12);
    }
    EXPECT_THROW(FrechetLaw(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(FrechetLaw(1.0, -1.0), std::invalid_argument);
}

TEST(Frechet, CdfMonotoneOnGrid)
{
    const FrechetLaw law(0.7, 0.5);
    double previous = 0.0;
    for (int k = 1; k <= 2000; ++k) {
        const double current = law.cdf(0.01 * k);
        EXPECT_GE(current, previous);
        EXPECT_LE(current, 1.0);
        previous = current;
    }
}

TEST(Frechet, MaxStability)
{
    // The max of n iid Frechet(alpha, sigma) is Frechet(alpha, sigma n^(1/alpha)).
    const double alpha = 1.5;
    const FrechetLaw law(alpha, 1.0);
    const std::size_t n = 4;
    const auto draws = law.sample(RngStream(91, {}), 5000 * n);
    std::vector<double> maxima;
    for (std::size_t i = 0; i < draws.size(); i += n) {
        maxima.push_back(*std::max_element(draws.begin() + static_cast<std::ptrdiff_t>(i),
                                           draws.begin() + static_cast<std::ptrdiff_t>(i + n)));
    }
    const FrechetLaw target(alpha, std::pow(static_cast<double>(n), 1.0 / alpha));
    EXPECT_LT(ks_one_sample(EmpiricalSample(maxima), [&](double x) { return target.cdf(x); }), 0.023);
}

TEST(ScaleAbsJump, IndicatorAndOuGiveCAlpha)
{
    for (const auto& kernel : {indicator_kernel(), ou_kernel(2.0)}) {
        const auto scale = scale_abs_jump(kernel, ControlMeasure::lebesgue(), 1.5);
        EXPECT_FALSE(scale.continuous_kernel);
        EXPECT_NEAR(scale.value, c_alpha(1.5), 1e-12);
    }
}

TEST(ScaleAbsJump, ContinuousKernelFlagged)
{
    const auto scale = scale_abs_jump(smooth_kernel(), ControlMeasure::lebesgue(), 1.5);
    EXPECT_TRUE(scale.continuous_kernel);
    EXPECT_EQ(scale.value, 0.0);
}

TEST(ScaleAbsJump, AtomAtUnitIndex)
{
    const auto scale = scale_abs_jump(indicator_kernel().scaled(2.0), ControlMeasure::atoms({0.3}, {3.0}), 1.0);
    EXPECT_NEAR(scale.value, 2.0 / std::numbers::pi * 6.0, 1e-12);
}

TEST(ScaleAbsJump, Homogeneity)
{
    const double alpha = 1.3;
    const auto base = scale_abs_jump(ou_kernel(1.0), ControlMeasure::lebesgue(), alpha).value;
    EXPECT_NEAR(scale_abs_jump(ou_kernel(1.0).scaled(-3.0), ControlMeasure::lebesgue(), alpha).value, 3.0 * base,
                1e-12);
    EXPECT_NEAR(scale_abs_jump(ou_kernel(1.0), ControlMeasure::uniform(0.0, 1.0, 5.0), alpha).value,
                std::pow(5.0, 1.0 / alpha) * base, 1e-12);
}

TEST(ScaleAbsJump, LawOfLargestJumpOfSimulatedPaths)
{
    const double alpha = 1.5;
    const auto m = ControlMeasure::lebesgue();
    SeriesConfig config;
    config.alpha = alpha;
    config.truncation = TermCount{1000};
    config.grid = 4;
    std::vector<double> maxima;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        maxima.push_back(max_abs_jump(lepage_sample_path(indicator_kernel(), m, config, RngStream(92, {i})).ledger()));
    }
    const FrechetLaw law(alpha, scale_abs_jump(indicator_kernel(), m, alpha).value);
    EXPECT_LT(ks_one_sample(EmpiricalSample(maxima), [&](double x) { return law.cdf(x); }), 0.0364);
}

TEST(ScalePosJump, IndicatorForms)
{
    const double c = c_alpha(1.5);
    const auto scales = scale_pos_jump(indicator_kernel(), ControlMeasure::lebesgue(), 1.5);
    EXPECT_NEAR(scales.proof_form, c * std::pow(0.5, 1.0 / 1.5), 1e-12);
    EXPECT_NEAR(scales.proof_form, 0.3413920316, 1e-9);
    EXPECT_NEAR(scales.displayed_form, 0.5 * c, 1e-12);
    EXPECT_FALSE(scales.continuous_kernel);
}

TEST(ScalePosJump, FormsCoincideAtUnitIndex)
{
    const auto scales = scale_pos_jump(ou_kernel(1.0), ControlMeasure::uniform(0.0, 1.0, 2.0), 1.0);
    EXPECT_NEAR(scales.proof_form, scales.displayed_form, 1e-12);
}

TEST(ScalePosJump, FormsCoincideForSymmetricProfile)
{
    const auto scales = scale_pos_jump(pulse_kernel(), ControlMeasure::lebesgue(), 1.5);
    EXPECT_NEAR(scales.proof_form, c_alpha(1.5), 1e-12);
    EXPECT_NEAR(scales.displayed_form, c_alpha(1.5), 1e-12);
}

TEST(ScalePosJump, ContinuousKernelFlagged)
{
    EXPECT_TRUE(scale_pos_jump(smooth_kernel(), ControlMeasure::lebesgue(), 1.5).continuous_kernel);
}

TEST(ScaleVp, Indicator)
{
    const auto scale = scale_vp(indicator_kernel(), ControlMeasure::lebesgue(), 1.5, 2.0);
    EXPECT_NEAR(scale.value, std::pow(c_alpha(1.5), 2.0) / c_alpha(0.75), 1e-12);
    EXPECT_NEAR(scale.value, 0.4544726318, 1e-9);
}

TEST(ScaleVp, PulseSectionsCountBothJumps)
{
    // V_2 of each section is 2, so the integral is 2^(alpha/p).
    const double alpha = 1.5;
    const double p = 2.0;
    const auto pulse = scale_vp(pulse_kernel(), ControlMeasure::lebesgue(), alpha, p);
    const auto step = scale_vp(indicator_kernel(), ControlMeasure::lebesgue(), alpha, p);
    EXPECT_NEAR(pulse.value, 2.0 * step.value, 1e-12);
}

TEST(ScaleVp, ContinuousKernelAndIndexChecks)
{
    const auto flat = scale_vp(smooth_kernel(), ControlMeasure::lebesgue(), 1.5, 1.0);
    EXPECT_TRUE(flat.continuous_kernel);
    EXPECT_EQ(flat.value, 0.0);
    EXPECT_THROW(scale_vp(indicator_kernel(), ControlMeasure::lebesgue(), 1.5, 1.0), std::domain_error);
    EXPECT_THROW(scale_vp(indicator_kernel(), ControlMeasure::lebesgue(), 1.5, 1.5), std::domain_error);
}

TEST(ScaleVp, LedgerSumsFollowPositiveStableLaw)
{
    // sum_j |jump_j|^2 from the ledger, with the deterministic mean of the
    // dropped terms j > J added back: c^2 Gamma_J^(1 - p/alpha) / (p/alpha - 1).
    const double alpha = 1.5;
    const double p = 2.0;
    const std::size_t terms = 10000;
    const auto m = ControlMeasure::lebesgue();
    SeriesConfig config;
    config.alpha = alpha;
    config.truncation = TermCount{terms};
    config.grid = 1;
    std::vector<double> sums;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const RngStream stream(93, {i});
        const auto path = lepage_sample_path(indicator_kernel(), m, config, stream);
        const double last = gamma_arrivals(stream.substream(kArrivalStream), terms).back();
        const double tail = std::pow(c_alpha(alpha), p) * std::pow(last, 1.0 - p / alpha) / (p / alpha - 1.0);
        sums.push_back(vp_of_jumps(path.ledger(), p) + tail);
    }
    const double scale = scale_vp(indicator_kernel(), m, alpha, p).value;
    const auto& reference = PositiveStableReference::unit_sample(alpha / p, 200000, 1);
    const double ks = ks_one_sample(EmpiricalSample(sums), [&](double x) { return reference.cdf(x / scale); });
    EXPECT_LT(ks, 0.0364 + 0.005);  // 1% critical value at n = 2000 plus reference-sample noise
}

TEST(PositiveStableReference, CachedByKey)
{
    const auto& a = PositiveStableReference::unit_sample(0.75, 1000, 5);
    const auto& b = PositiveStableReference::unit_sample(0.75, 1000, 5);
    const auto& c = PositiveStableReference::unit_sample(0.75, 1000, 6);
    EXPECT_EQ(&a, &b);
    EXPECT_NE(&a, &c);
    EXPECT_EQ(a.size(), 1000u);
    EXPECT_GT(a.sorted().front(), 0.0);
    EXPECT_EQ(PositiveStableReference::cdf(0.75, 2.0, 2.0 * a.sorted()[499], 1000, 5), 0.5);
}
