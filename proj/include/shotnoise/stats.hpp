#pragma once

// Empirical distributions and Kolmogorov-Smirnov statistics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace shotnoise {

class EmpiricalSample
{
  public:
    explicit EmpiricalSample(std::vector<double> values) : sorted_(std::move(values))
    {
        std::sort(sorted_.begin(), sorted_.end());
    }

    const std::vector<double>& sorted() const noexcept { return sorted_; }
    std::size_t size() const noexcept { return sorted_.size(); }
    bool empty() const noexcept { return sorted_.empty(); }

    /// Fraction of the sample <= x.
    double cdf(double x) const
    {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

  private:
    std::vector<double> sorted_;
};

/// sup_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|).
inline double ks_one_sample(const EmpiricalSample& sample, const std::function<double(double)>& cdf)
{
    if (sample.empty()) {
        throw std::invalid_argument("KS statistic needs a nonempty sample");
    }
    const auto& x = sample.sorted();
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d = std::max({d, std::abs(above), std::abs(below)});
    }
    return d;
}

/// sup over pooled points of |F_a - F_b|.
inline double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("KS statistic needs nonempty samples");
    }
    const auto& x = a.sorted();
    const auto& y = b.sorted();
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) {
            ++i;
        }
        while (j < y.size() && y[j] == t) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

/// Linear-interpolation quantiles (type 7); p = 0 and p = 1 give min and max.
inline std::vector<double> quantiles(const EmpiricalSample& sample, const std::vector<double>& probs)
{
    std::vector<double> out;
    out.reserve(probs.size());
    if (probs.empty()) {
        return out;
    }
    if (sample.empty()) {
        throw std::invalid_argument("quantiles of an empty sample");
    }
    const auto& x = sample.sorted();
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("quantile probability outside [0,1]");
        }
        const double pos = p * static_cast<double>(x.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, x.size() - 1);
        out.push_back(x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]));
    }
    return out;
}

inline double median(const EmpiricalSample& sample)
{
    return quantiles(sample, {0.5}).front();
}

}  // namespace shotnoise
