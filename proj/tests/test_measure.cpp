#include <gtest/gtest.h>

#include <cmath>

#include "shotnoise/measure.hpp"
#include "test_support.hpp"

using namespace shotnoise;

namespace {

ControlMeasure hat_density()
{
    // Triangle on [0,2] with peak 1 at s = 1, plus a flat shoulder.
    return ControlMeasure::tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 0.5, 0.5});
}

}  // namespace

TEST(ControlMeasure, TotalMass)
{
    EXPECT_DOUBLE_EQ(ControlMeasure::lebesgue().total_mass(), 1.0);
    EXPECT_DOUBLE_EQ(ControlMeasure::lebesgue(-1.0, 3.0).total_mass(), 4.0);
    EXPECT_DOUBLE_EQ(ControlMeasure::uniform(0.0, 2.0, 5.0).total_mass(), 5.0);
    EXPECT_DOUBLE_EQ(ControlMeasure::atoms({0.1, 0.7}, {1.0, 3.0}).total_mass(), 4.0);
    EXPECT_DOUBLE_EQ(hat_density().total_mass(), 0.5 + 0.75 + 0.5);
}

TEST(ControlMeasure, RejectsInvalidDomains)
{
    EXPECT_THROW(ControlMeasure::lebesgue(1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ControlMeasure::atoms({}, {}), std::invalid_argument);
    EXPECT_THROW(ControlMeasure::atoms({0.1}, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(ControlMeasure::atoms({0.1}, {-1.0}), std::invalid_argument);
    EXPECT_THROW(ControlMeasure::tabulated({0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(ControlMeasure::tabulated({0.0, 1.0}, {1.0, -1.0}), std::invalid_argument);
}

TEST(SampleMark, LebesgueMean)
{
    const auto marks = ControlMeasure::lebesgue().sample_marks(RngStream(1, {}), 100000);
    double mean = 0.0;
    for (double v : marks) {
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
        mean += v;
    }
    EXPECT_NEAR(mean / 1e5, 0.5, 0.005);
}

TEST(SampleMark, SingleAtomAlwaysReturned)
{
    const auto m = ControlMeasure::atoms({0.42}, {2.0});
    RngStream s(2, {});
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(m.sample_mark(s), 0.42);
    }
}

TEST(SampleMark, TwoAtomFrequencies)
{
    const auto m = ControlMeasure::atoms({0.2, 0.8}, {1.0, 3.0});
    const auto marks = m.sample_marks(RngStream(3, {}), 10000);
    const double second = static_cast<double>(std::count(marks.begin(), marks.end(), 0.8)) / 1e4;
    EXPECT_NEAR(second, 0.75, 0.013);
}

TEST(SampleMark, TabulatedDensityChiSquare)
{
    const auto m = hat_density();
    const std::size_t n = 100000;
    const int bins = 30;
    const auto marks = m.sample_marks(RngStream(4, {}), n);
    std::vector<double> counts(bins, 0.0);
    for (double v : marks) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 3.0);
        counts[std::min(bins - 1, static_cast<int>(v / 3.0 * bins))] += 1.0;
    }
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double lo = 3.0 * b / bins;
        const double hi = 3.0 * (b + 1) / bins;
        // Exact integral of the piecewise linear density over the bin.
        const double p =
            m.integrate([&](double s) { return s >= lo && s < hi ? 1.0 : 0.0; }, {lo, hi}).value / m.total_mass();
        const double expected = p * static_cast<double>(n);
        chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
    }
    EXPECT_LT(chi2, 49.59);  // 1% critical value, 29 degrees of freedom
}

TEST(SampleMark, ConsumesOneUniform)
{
    const auto m = hat_density();
    RngStream s(5, {});
    m.sample_mark(s);
    EXPECT_EQ(s.position(), 1u);
}

TEST(Integrate, ConstantGivesMass)
{
    for (const auto& m : {ControlMeasure::lebesgue(), ControlMeasure::uniform(-2.0, 5.0, 3.5),
                          ControlMeasure::atoms({0.1, 0.2, 0.9}, {0.5, 1.5, 2.0}), hat_density()}) {
        const auto r = m.integrate([](double) { return 2.5; });
        EXPECT_NEAR(r.value, 2.5 * m.total_mass(), 1e-10 * m.total_mass());
        const auto one = m.integrate([](double) { return 1.0; });
        EXPECT_NEAR(one.value / m.total_mass(), 1.0, 1e-10);
    }
    EXPECT_EQ(ControlMeasure::atoms({0.3}, {3.0}).integrate([](double) { return 1.0; }).value, 3.0);
}

TEST(Integrate, IdentityOnUnitInterval)
{
    EXPECT_NEAR(ControlMeasure::lebesgue().integrate([](double s) { return s; }).value, 0.5, 1e-8);
}

TEST(Integrate, IndicatorAlphaNorm)
{
    const auto m = ControlMeasure::lebesgue();
    for (double t : {0.1, 0.37, 0.5, 1.0}) {
        const auto r = m.integrate([&](double s) { return s > 0.0 && s <= t ? 1.0 : 0.0; }, {t});
        EXPECT_NEAR(r.value, t, 1e-12) << t;
    }
}

TEST(Integrate, SmoothIntegrandAndErrorEstimate)
{
    const auto m = ControlMeasure::lebesgue(0.0, 2.0);
    const auto r = m.integrate([](double s) { return std::exp(s); });
    EXPECT_NEAR(r.value, std::exp(2.0) - 1.0, 1e-6);
    EXPECT_LE(std::abs(r.value - (std::exp(2.0) - 1.0)), 2.0 * r.error + 1e-15);
}

TEST(Integrate, AgainstTabulatedDensity)
{
    // int s dm for the hat density, by hand: int_0^1 s^2 + int_1^2 s(1.5 - s/2) + int_2^3 s/2.
    const double exact = 1.0 / 3.0 + (1.5 * 1.5 - (8.0 - 1.0) / 6.0) + 1.25;
    EXPECT_NEAR(hat_density().integrate([](double s) { return s; }).value, exact, 1e-7);
}

TEST(Integrate, Linear)
{
    const auto m = hat_density();
    auto g = [](double s) { return std::sin(3.0 * s); };
    auto h = [](double s) { return s * s; };
    const double a = 2.5;
    const double b = -1.25;
    const double combined = m.integrate([&](double s) { return a * g(s) + b * h(s); }).value;
    const double separate = a * m.integrate(g).value + b * m.integrate(h).value;
    const double bound = 9.0 * m.total_mass();
    EXPECT_LT(std::abs(combined - separate), 1e-9 * (std::abs(a) + std::abs(b)) * bound);
}

TEST(Integrate, RefinementWithinErrorEstimate)
{
    const auto m = hat_density();
    auto g = [](double s) { return std::exp(-s) * std::cos(2.0 * s); };
    const auto coarse = m.integrate(g, {}, QuadratureSpec{512});
    const auto fine = m.integrate(g, {}, QuadratureSpec{1024});
    EXPECT_LT(std::abs(fine.value - coarse.value), coarse.error);
}

TEST(Integrate, RejectsNonFiniteValues)
{
    EXPECT_THROW(ControlMeasure::lebesgue().integrate([](double s) { return 1.0 / (s - s); }), std::domain_error);
    EXPECT_THROW(ControlMeasure::atoms({0.5}, {1.0}).integrate([](double) { return std::nan(""); }),
                 std::domain_error);
}

TEST(ControlMeasure, LoadsFromCsv)
{
    const auto dir = oracle::scratch_dir("measure_csv");
    oracle::write_text(dir / "atoms.csv", "point,mass\n0.25,1\n0.75,3\n");
    oracle::write_text(dir / "density.csv", "# hat\nnode,density\n0,0\n1,1\n2,0.5\n3,0.5\n");
    const auto atoms = ControlMeasure::atoms_from_csv((dir / "atoms.csv").string());
    EXPECT_TRUE(atoms.is_atomic());
    EXPECT_DOUBLE_EQ(atoms.total_mass(), 4.0);
    const auto density = ControlMeasure::density_from_csv((dir / "density.csv").string());
    EXPECT_DOUBLE_EQ(density.total_mass(), hat_density().total_mass());
    EXPECT_DOUBLE_EQ(density.density_at(1.5), 0.75);
    oracle::write_text(dir / "bad.csv", "0.1,1\nx,y\n");
    EXPECT_THROW(ControlMeasure::atoms_from_csv((dir / "bad.csv").string()), std::exception);
    EXPECT_THROW(ControlMeasure::atoms_from_csv((dir / "missing.csv").string()), std::exception);
}
