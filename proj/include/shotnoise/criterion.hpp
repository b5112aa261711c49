#pragma once

// Numerical check of the two integral conditions that give a symmetric stable
// integral process a cadlag modification, and the Gaussian lacunary series
// that converges uniformly but not in p-variation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "shotnoise/io.hpp"
#include "shotnoise/kernel.hpp"
#include "shotnoise/measure.hpp"
#include "shotnoise/random.hpp"

namespace shotnoise {

struct PowerFit
{
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double half_width = std::numeric_limits<double>::quiet_NaN();  // 95% normal-theory half-width
    std::size_t points = 0;
};

namespace detail {

/// Least-squares slope of y on x with a 1.96-sigma half-width.
inline PowerFit fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    PowerFit fit;
    fit.points = x.size();
    if (x.size() < 2) {
        return fit;
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        return fit;
    }
    fit.exponent = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - my - fit.exponent * (x[i] - mx);
        rss += e * e;
    }
    fit.half_width = x.size() > 2 ? 1.96 * std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    return fit;
}

inline void require_time_grid(const std::vector<double>& grid)
{
    if (grid.size() < 16) {
        throw std::invalid_argument("criterion scans need a time grid with at least 16 points");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("criterion time grid must be strictly increasing");
        }
    }
    if (grid.front() < 0.0 || grid.back() > 1.0) {
        throw std::invalid_argument("criterion time grid must lie in [0,1]");
    }
}

inline constexpr double kMaxFitSeparation = 0.25;

}  // namespace detail

inline std::vector<double> uniform_time_grid(std::size_t points)
{
    if (points < 2) {
        throw std::invalid_argument("time grid needs at least two points");
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

struct PairEntry
{
    double t1;
    double t2;
    double value;
};

struct B1Scan
{
    std::vector<PairEntry> table;  // I1(t1,t2) for every grid pair
    PowerFit fit;                  // slope of log I1 on log(t2 - t1), separations <= 1/4
    bool time_constant = false;    // I1 == 0 for every pair
};

/// I1(t1,t2) = int |f(t2,s) - f(t1,s)|^p1 m(ds) over all grid pairs and the
/// fitted exponent beta1 (F1 = identity).
inline B1Scan b1_scan(const Kernel& kernel, const ControlMeasure& measure, double p1,
                      const std::vector<double>& time_grid, QuadratureSpec quadrature = {})
{
    if (!(p1 > 0.0)) {
        throw std::invalid_argument("p1 must be positive");
    }
    detail::require_time_grid(time_grid);
    B1Scan scan;
    std::vector<double> x;
    std::vector<double> y;
    bool all_zero = true;
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        for (std::size_t j = i + 1; j < time_grid.size(); ++j) {
            const double t1 = time_grid[i];
            const double t2 = time_grid[j];
            const double value =
                measure
                    .integrate([&](double s) { return std::pow(std::abs(kernel(t2, s) - kernel(t1, s)), p1); },
                               {t1, t2}, quadrature)
                    .value;
            scan.table.push_back({t1, t2, value});
            all_zero = all_zero && value == 0.0;
            if (t2 - t1 <= detail::kMaxFitSeparation + 1e-12 && value > 0.0) {
                x.push_back(std::log(t2 - t1));
                y.push_back(std::log(value));
            }
        }
    }
    scan.time_constant = all_zero;
    if (!all_zero) {
        scan.fit = detail::fit_slope(x, y);
    }
    return scan;
}

struct B2Scan
{
    std::vector<PairEntry> pair_max;  // max over interior t of I2(t1,t,t2)
    std::size_t triples = 0;
    PowerFit fit;                     // beta2 = slope / 2
    bool identically_zero = false;    // I2 == 0 for every triple
};

/// I2(t1,t,t2) = int |(f(t,s) - f(t1,s)) (f(t2,s) - f(t,s))|^p2 m(ds) over grid
/// triples t1 < t < t2; beta2 is half the slope of log max_t I2 on log(t2 - t1).
inline B2Scan b2_scan(const Kernel& kernel, const ControlMeasure& measure, double p2,
                      const std::vector<double>& time_grid, QuadratureSpec quadrature = {})
{
    if (!(p2 > 0.0)) {
        throw std::invalid_argument("p2 must be positive");
    }
    detail::require_time_grid(time_grid);
    B2Scan scan;
    std::vector<double> x;
    std::vector<double> y;
    bool all_zero = true;
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        for (std::size_t j = i + 2; j < time_grid.size(); ++j) {
            const double t1 = time_grid[i];
            const double t2 = time_grid[j];
            double worst = 0.0;
            for (std::size_t k = i + 1; k < j; ++k) {
                const double t = time_grid[k];
                const double value = measure
                                         .integrate(
                                             [&](double s) {
                                                 const double left = kernel(t, s) - kernel(t1, s);
                                                 const double right = kernel(t2, s) - kernel(t, s);
                                                 return std::pow(std::abs(left * right), p2);
                                             },
                                             {t1, t, t2}, quadrature)
                                         .value;
                ++scan.triples;
                worst = std::max(worst, value);
            }
            scan.pair_max.push_back({t1, t2, worst});
            all_zero = all_zero && worst == 0.0;
            if (t2 - t1 <= detail::kMaxFitSeparation + 1e-12 && worst > 0.0) {
                x.push_back(std::log(t2 - t1));
                y.push_back(std::log(worst));
            }
        }
    }
    scan.identically_zero = all_zero;
    if (!all_zero) {
        scan.fit = detail::fit_slope(x, y);
        scan.fit.exponent /= 2.0;
        scan.fit.half_width /= 2.0;
    }
    return scan;
}

struct CriterionReport
{
    double alpha = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    B1Scan b1;
    B2Scan b2;
    bool p1_above_alpha = false;
    bool p2_above_half_alpha = false;
    bool beta1_above_half = false;  // at the lower confidence bound, or vacuous
    bool beta2_above_half = false;
    bool satisfied = false;

    std::string verdict() const { return satisfied ? "satisfied (numerically)" : "not established"; }
};

/// Combines both scans with the index conditions p1 > alpha and p2 > alpha/2.
/// A sufficient-condition check: "not established" does not mean the process
/// lacks a cadlag modification.
inline CriterionReport cadlag_verdict(const Kernel& kernel, const ControlMeasure& measure, double alpha, double p1,
                                      double p2, const std::vector<double>& time_grid, QuadratureSpec quadrature = {})
{
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw std::domain_error("the cadlag criterion assumes alpha in (1,2)");
    }
    CriterionReport report;
    report.alpha = alpha;
    report.p1 = p1;
    report.p2 = p2;
    report.b1 = b1_scan(kernel, measure, p1, time_grid, quadrature);
    report.b2 = b2_scan(kernel, measure, p2, time_grid, quadrature);
    report.p1_above_alpha = p1 > alpha;
    report.p2_above_half_alpha = p2 > alpha / 2.0;
    report.beta1_above_half =
        report.b1.time_constant || report.b1.fit.exponent - report.b1.fit.half_width > 0.5;
    report.beta2_above_half =
        report.b2.identically_zero || report.b2.fit.exponent - report.b2.fit.half_width > 0.5;
    report.satisfied =
        report.p1_above_alpha && report.p2_above_half_alpha && report.beta1_above_half && report.beta2_above_half;
    return report;
}

/// sup over [0, length] of |sum_i coef[i] sin(freq[i] t)| by best-first branch
/// and bound. The bound on an interval is the smaller of the summed exact ranges
/// of the sine terms and the Taylor bound g(m) + |g'(m)| r + M2 r^2 / 2 about the
/// midpoint, M2 = sum |coef| freq^2; the latter keeps the number of live cells
/// near a smooth maximum bounded. Equal maxima cannot be pruned, so periodic
/// sums should be searched over one period only.
inline double sine_series_sup_abs(const std::vector<double>& coef, const std::vector<double>& freq,
                                  double tolerance = 1e-12, double length = 1.0)
{
    auto value = [&](double t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i) {
            sum += coef[i] * std::sin(freq[i] * t);
        }
        return sum;
    };
    auto slope = [&](double t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i) {
            sum += coef[i] * freq[i] * std::cos(freq[i] * t);
        }
        return sum;
    };
    double curvature = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i) {
        curvature += std::abs(coef[i]) * freq[i] * freq[i];
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto contains = [&](double x0, double x1, double phase) {
        const double k = std::ceil((x0 - phase) / two_pi);
        return phase + two_pi * k <= x1;
    };
    // Upper bound of sign * g on [lo, hi].
    auto upper = [&](double lo, double hi, double sign) {
        double bound = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i) {
            const double c = sign * coef[i];
            const double x0 = freq[i] * lo;
            const double x1 = freq[i] * hi;
            double top = std::max(std::sin(x0), std::sin(x1));
            double bottom = std::min(std::sin(x0), std::sin(x1));
            if (x1 - x0 >= two_pi) {
                top = 1.0;
                bottom = -1.0;
            } else {
                if (contains(x0, x1, std::numbers::pi / 2.0)) {
                    top = 1.0;
                }
                if (contains(x0, x1, -std::numbers::pi / 2.0)) {
                    bottom = -1.0;
                }
            }
            bound += c >= 0.0 ? c * top : c * bottom;
        }
        const double mid = 0.5 * (lo + hi);
        const double r = 0.5 * (hi - lo);
        const double taylor = sign * value(mid) + std::abs(slope(mid)) * r + 0.5 * curvature * r * r;
        return std::min(bound, taylor);
    };
    double scale = 0.0;
    for (double c : coef) {
        scale += std::abs(c);
    }
    if (scale == 0.0) {
        return 0.0;
    }
    const double tol = tolerance * scale;
    double best = 0.0;
    for (double sign : {1.0, -1.0}) {
        struct Cell
        {
            double bound;
            double lo;
            double hi;
            bool operator<(const Cell& other) const { return bound < other.bound; }
        };
        std::priority_queue<Cell> queue;
        best = std::max({best, sign * value(0.0), sign * value(length)});
        queue.push({upper(0.0, length, sign), 0.0, length});
        std::size_t visited = 0;
        while (!queue.empty()) {
            const Cell cell = queue.top();
            queue.pop();
            if (cell.bound <= best + tol) {
                break;
            }
            if (++visited > 50'000'000) {
                throw std::runtime_error("sine series sup did not converge");
            }
            const double mid = 0.5 * (cell.lo + cell.hi);
            best = std::max(best, sign * value(mid));
            for (const auto& [lo, hi] : {std::pair{cell.lo, mid}, std::pair{mid, cell.hi}}) {
                const double b = upper(lo, hi, sign);
                if (b > best + tol) {
                    queue.push({b, lo, hi});
                }
            }
        }
    }
    return best;
}

struct CounterexampleReport
{
    double p = 0.0;
    std::size_t j_max = 0;
    double ratio = 0.0;                      // r = 4^[p/(p-1) + 1]
    std::vector<double> gaussians;           // Z_1..Z_jmax
    std::vector<double> amplitudes;          // ||f_j||_inf = r^(-j/p) log^(-1/2)(j+1)
    std::vector<double> tail_sup_norms;      // k = 0..jmax-1: ||sum_{k<j<=jmax} Z_j f_j||_inf
    std::vector<double> dyadic_increments;   // ||S_min(2^(k+1),jmax) - S_(2^k)||_inf for 2^k < jmax
    std::vector<double> term_bvp_bounds;     // p-variation of Z_j f_j over the extrema of f_j
    std::vector<double> cumulative_bvp_bounds;  // (sum_{i<=j} bound_i^p)^(1/p)
};

/// Partition points r^jmax + 1 per seed are visited; larger requests are refused.
inline constexpr double kMaxCounterexamplePoints = 67108864.0;  // 2^26

inline double counterexample_ratio(double p)
{
    if (!(p > 1.0)) {
        throw std::invalid_argument("counterexample needs p > 1");
    }
    return std::pow(4.0, std::floor(p / (p - 1.0) + 1.0));
}

/// X = sum_j Z_j f_j with f_j(t) = r^(-j/p) log^(-1/2)(j+1) sin(r^j pi t) and i.i.d.
/// standard Gaussian Z_j. Reports the uniform norms of the tails (shrinking
/// geometrically) next to p-variation lower bounds of the single terms, read
/// off the partition at the extrema of f_j, whose cumulative l^p sum keeps
/// growing.
inline CounterexampleReport counterexample_demo(double p, std::size_t j_max, RngStream stream)
{
    CounterexampleReport report;
    report.p = p;
    report.j_max = j_max;
    report.ratio = counterexample_ratio(p);
    if (j_max == 0) {
        throw std::invalid_argument("counterexample needs j_max >= 1");
    }
    if (std::pow(report.ratio, static_cast<double>(j_max)) > kMaxCounterexamplePoints) {
        throw std::invalid_argument("counterexample needs r^j_max <= 2^26 partition points; r = " +
                                    io::format_double(report.ratio) + ", j_max = " + std::to_string(j_max));
    }
    std::vector<double> freq;
    for (std::size_t j = 1; j <= j_max; ++j) {
        const double jd = static_cast<double>(j);
        report.gaussians.push_back(stream.normal());
        report.amplitudes.push_back(std::pow(report.ratio, -jd / p) / std::sqrt(std::log(jd + 1.0)));
        freq.push_back(std::pow(report.ratio, jd) * std::numbers::pi);
    }
    auto block_sup = [&](std::size_t first, std::size_t last) {  // terms first..last, 1-based inclusive
        std::vector<double> c;
        std::vector<double> w;
        for (std::size_t j = first; j <= last; ++j) {
            c.push_back(report.gaussians[j - 1] * report.amplitudes[j - 1]);
            w.push_back(freq[j - 1]);
        }
        // Every frequency is a multiple of r^first pi: period 2 r^-first.
        const double period = 2.0 / std::pow(report.ratio, static_cast<double>(first));
        return sine_series_sup_abs(c, w, 1e-12, std::min(1.0, period));
    };
    for (std::size_t k = 0; k < j_max; ++k) {
        report.tail_sup_norms.push_back(block_sup(k + 1, j_max));
    }
    for (std::size_t lo = 1; lo < j_max; lo *= 2) {
        report.dyadic_increments.push_back(block_sup(lo + 1, std::min(2 * lo, j_max)));
    }
    double cumulative = 0.0;
    for (std::size_t j = 1; j <= j_max; ++j) {
        const double c = report.gaussians[j - 1] * report.amplitudes[j - 1];
        const double w = freq[j - 1];
        const auto half_periods = static_cast<std::size_t>(std::llround(std::pow(report.ratio, static_cast<double>(j))));
        double sum = 0.0;
        double previous = 0.0;  // f_j(0) = 0
        for (std::size_t m = 0; m <= half_periods; ++m) {
            const double t = m < half_periods ? (static_cast<double>(m) + 0.5) / static_cast<double>(half_periods) : 1.0;
            const double current = c * std::sin(w * t);
            sum += std::pow(std::abs(current - previous), p);
            previous = current;
        }
        report.term_bvp_bounds.push_back(std::pow(sum, 1.0 / p));
        cumulative += sum;
        report.cumulative_bvp_bounds.push_back(std::pow(cumulative, 1.0 / p));
    }
    return report;
}

}  // namespace shotnoise
