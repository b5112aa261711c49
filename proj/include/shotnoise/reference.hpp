#pragma once

// Target laws for the jump functionals of cadlag symmetric stable processes
// and the scale parameters that pin them to a kernel and control measure.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "shotnoise/constants.hpp"
#include "shotnoise/kernel.hpp"
#include "shotnoise/measure.hpp"
#include "shotnoise/random.hpp"
#include "shotnoise/stats.hpp"

namespace shotnoise {

/// Frechet(shape, scale): P(Z <= x) = exp(-(x/scale)^(-shape)) for x > 0.
struct FrechetLaw
{
    double shape;
    double scale;

    FrechetLaw(double shape_, double scale_) : shape(shape_), scale(scale_)
    {
        if (!(shape > 0.0) || !(scale > 0.0)) {
            throw std::invalid_argument("Frechet law needs positive shape and scale");
        }
    }

    double cdf(double x) const
    {
        if (!(x > 0.0)) {
            return 0.0;
        }
        return std::exp(-std::pow(x / scale, -shape));
    }

    double quantile(double p) const { return scale * std::pow(-std::log(p), -1.0 / shape); }

    double median() const { return quantile(0.5); }

    std::vector<double> sample(RngStream stream, std::size_t count) const
    {
        std::vector<double> out(count);
        for (auto& x : out) {
            x = quantile(stream.uniform());
        }
        return out;
    }
};

inline double frechet_cdf(const FrechetLaw& law, double x)
{
    return law.cdf(x);
}

/// A scale parameter, or a flag that the kernel has no jumps m-a.e. (then the
/// functional vanishes identically and `value` is 0).
struct JumpScale
{
    double value = 0.0;
    bool continuous_kernel = false;
};

namespace detail {

inline JumpScale finalize_scale(double integral, double alpha, double front)
{
    if (!(integral > 0.0)) {
        return {0.0, true};
    }
    return {front * std::pow(integral, 1.0 / alpha), false};
}

}  // namespace detail

/// Scale of the largest absolute jump:
/// c_alpha (int sup_t |Delta f(t,s)|^alpha m(ds))^(1/alpha).
inline JumpScale scale_abs_jump(const Kernel& kernel, const ControlMeasure& measure, double alpha)
{
    require_stable_index(alpha);
    const auto integral = measure.integrate(
        [&](double s) { return std::pow(kernel.max_abs_jump(s), alpha); });
    return detail::finalize_scale(integral.value, alpha, c_alpha(alpha));
}

struct PositiveJumpScales
{
    /// c_alpha (E W^alpha)^(1/alpha) with W = sup_t Delta f(t,V) or -inf_t Delta f(t,V)
    /// with probability 1/2 each (the law of the largest positive jump).
    double proof_form = 0.0;
    /// c_alpha/2 [ (int |sup_t Delta f|^alpha dm)^(1/alpha) + (int |inf_t Delta f|^alpha dm)^(1/alpha) ].
    double displayed_form = 0.0;
    bool continuous_kernel = false;
};

/// Both candidate scales for the largest positive jump. They differ for
/// alpha != 1 unless the positive and negative jump profiles coincide, so both
/// are reported.
inline PositiveJumpScales scale_pos_jump(const Kernel& kernel, const ControlMeasure& measure, double alpha)
{
    require_stable_index(alpha);
    auto extremes = [&](double s) {
        double up = 0.0;    // (sup_t Delta f)_+
        double down = 0.0;  // (-inf_t Delta f)_+
        for (double tau : kernel.section_jump_times(s)) {
            const double d = kernel.jump_size(tau, s);
            up = std::max(up, d);
            down = std::max(down, -d);
        }
        return std::pair{up, down};
    };
    const double up_int = measure.integrate([&](double s) { return std::pow(extremes(s).first, alpha); }).value;
    const double down_int = measure.integrate([&](double s) { return std::pow(extremes(s).second, alpha); }).value;
    PositiveJumpScales out;
    if (!(up_int > 0.0) && !(down_int > 0.0)) {
        out.continuous_kernel = true;
        return out;
    }
    const double c = c_alpha(alpha);
    out.proof_form = c * std::pow(0.5 * up_int + 0.5 * down_int, 1.0 / alpha);
    out.displayed_form = 0.5 * c * (std::pow(up_int, 1.0 / alpha) + std::pow(down_int, 1.0 / alpha));
    return out;
}

/// Scale of the positive (alpha/p)-stable law of V_p(X) = sum_t |Delta X(t)|^p:
/// c_alpha^p c_{alpha/p}^-1 (int V_p(f(.,s))^(alpha/p) m(ds))^(p/alpha).
///
/// V_p(X) is a.s. finite iff the kernel is continuous m-a.e. (then V_p(X) = 0,
/// reported by the flag) or p > alpha.
inline JumpScale scale_vp(const Kernel& kernel, const ControlMeasure& measure, double alpha, double p)
{
    require_stable_index(alpha);
    const double ratio = alpha / p;
    auto section_vp = [&](double s) {
        double sum = 0.0;
        for (double tau : kernel.section_jump_times(s)) {
            sum += std::pow(std::abs(kernel.jump_size(tau, s)), p);
        }
        return sum;
    };
    const auto integral = measure.integrate([&](double s) { return std::pow(section_vp(s), ratio); });
    if (!(integral.value > 0.0)) {
        return {0.0, true};
    }
    if (!(p > alpha)) {
        throw std::domain_error("V_p is not a.s. finite unless the kernel is continuous: need p > alpha");
    }
    const double front = std::pow(c_alpha(alpha), p) / c_alpha(ratio);
    return {front * std::pow(integral.value, 1.0 / ratio), false};
}

/// Cached large reference samples of the unit-scale positive stable law,
/// keyed by (index, size, seed). Entries are immutable once built.
class PositiveStableReference
{
  public:
    static const EmpiricalSample& unit_sample(double alpha_prime, std::size_t count, std::uint64_t seed)
    {
        static std::mutex mutex;
        static std::map<std::tuple<double, std::size_t, std::uint64_t>, EmpiricalSample> cache;
        std::lock_guard lock(mutex);
        const auto key = std::make_tuple(alpha_prime, count, seed);
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache
                     .emplace(key, EmpiricalSample(sample_positive_stable(RngStream(seed, {0x5ca1eull}),
                                                                          alpha_prime, 1.0, count)))
                     .first;
        }
        return it->second;
    }

    /// Empirical CDF of the law at the given scale, from a cached sample.
    static double cdf(double alpha_prime, double scale, double x, std::size_t count = 1000000,
                      std::uint64_t seed = 1)
    {
        return unit_sample(alpha_prime, count, seed).cdf(x / scale);
    }
};

}  // namespace shotnoise
