#pragma once

// Finite control measures on a one-dimensional mark space.
//
// Three domain kinds are supported: an interval carrying a constant density,
// a finite set of atoms, and a piecewise-linear density tabulated on a grid.
// Each measure can draw marks from its normalization m / m(S) and integrate
// functions against m.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "shotnoise/io.hpp"
#include "shotnoise/random.hpp"

namespace shotnoise {

struct IntegralEstimate
{
    double value = 0.0;
    double error = 0.0;  // rule-dependent estimate, 0 for exact sums
};

struct QuadratureSpec
{
    std::size_t nodes = 2048;  // composite midpoint nodes across the domain
};

class ControlMeasure
{
  public:
    struct Interval
    {
        double lower;
        double upper;
        double density;  // constant, so m(S) = density * (upper - lower)
    };
    struct Atoms
    {
        std::vector<double> points;
        std::vector<double> masses;
    };
    struct TabulatedDensity
    {
        std::vector<double> nodes;
        std::vector<double> density;  // piecewise linear between nodes
    };

    static ControlMeasure lebesgue(double lower = 0.0, double upper = 1.0)
    {
        return uniform(lower, upper, upper - lower);
    }

    /// Constant density on [lower, upper] with the given total mass.
    static ControlMeasure uniform(double lower, double upper, double total_mass)
    {
        if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper)) {
            throw std::invalid_argument("interval measure needs lower < upper");
        }
        return ControlMeasure(Interval{lower, upper, total_mass / (upper - lower)}, total_mass);
    }

    static ControlMeasure atoms(std::vector<double> points, std::vector<double> masses)
    {
        if (points.empty() || points.size() != masses.size()) {
            throw std::invalid_argument("atom measure needs matching, nonempty points and masses");
        }
        double total = 0.0;
        for (double m : masses) {
            if (!(m >= 0.0) || !std::isfinite(m)) {
                throw std::invalid_argument("atom masses must be finite and nonnegative");
            }
            total += m;
        }
        return ControlMeasure(Atoms{std::move(points), std::move(masses)}, total);
    }

    static ControlMeasure tabulated(std::vector<double> nodes, std::vector<double> density)
    {
        if (nodes.size() < 2 || nodes.size() != density.size()) {
            throw std::invalid_argument("tabulated density needs at least two (node, density) rows");
        }
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            if (!(nodes[i + 1] > nodes[i])) {
                throw std::invalid_argument("density nodes must be strictly increasing");
            }
            total += 0.5 * (density[i] + density[i + 1]) * (nodes[i + 1] - nodes[i]);
        }
        for (double d : density) {
            if (!(d >= 0.0) || !std::isfinite(d)) {
                throw std::invalid_argument("density values must be finite and nonnegative");
            }
        }
        return ControlMeasure(TabulatedDensity{std::move(nodes), std::move(density)}, total);
    }

    static ControlMeasure atoms_from_csv(const std::string& path)
    {
        std::vector<double> points;
        std::vector<double> masses;
        for (const auto& row : io::read_numeric_csv(path, 2)) {
            points.push_back(row[0]);
            masses.push_back(row[1]);
        }
        return atoms(std::move(points), std::move(masses));
    }

    static ControlMeasure density_from_csv(const std::string& path)
    {
        std::vector<double> nodes;
        std::vector<double> density;
        for (const auto& row : io::read_numeric_csv(path, 2)) {
            nodes.push_back(row[0]);
            density.push_back(row[1]);
        }
        return tabulated(std::move(nodes), std::move(density));
    }

    double total_mass() const noexcept { return total_mass_; }

    bool is_atomic() const noexcept { return std::holds_alternative<Atoms>(domain_); }

    /// Smallest interval containing the support.
    std::pair<double, double> support_hull() const
    {
        return std::visit(
            [](const auto& d) -> std::pair<double, double> {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Interval>) {
                    return {d.lower, d.upper};
                } else if constexpr (std::is_same_v<D, Atoms>) {
                    const auto [lo, hi] = std::minmax_element(d.points.begin(), d.points.end());
                    return {*lo, *hi};
                } else {
                    return {d.nodes.front(), d.nodes.back()};
                }
            },
            domain_);
    }

    /// One draw from m / m(S). Consumes exactly one uniform.
    double sample_mark(RngStream& stream) const
    {
        const double u = stream.uniform();
        return std::visit(
            [&](const auto& d) -> double {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Interval>) {
                    return d.lower + u * (d.upper - d.lower);
                } else if constexpr (std::is_same_v<D, Atoms>) {
                    const double target = u * total_mass_;
                    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
                    const auto index = static_cast<std::size_t>(
                        std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                 static_cast<std::ptrdiff_t>(d.points.size()) - 1));
                    return d.points[index];
                } else {
                    return invert_tabulated(d, u * total_mass_);
                }
            },
            domain_);
    }

    std::vector<double> sample_marks(RngStream stream, std::size_t count) const
    {
        std::vector<double> marks(count);
        for (auto& v : marks) {
            v = sample_mark(stream);
        }
        return marks;
    }

    /// Integral of g against m. Interval-type domains use a composite midpoint
    /// rule split at `breakpoints` (and at the density nodes), so integrands that
    /// are smooth between breakpoints converge at second order and piecewise
    /// constant ones are integrated exactly. The error estimate is the
    /// Richardson difference against the half-resolution rule.
    IntegralEstimate integrate(const std::function<double(double)>& g,
                               const std::vector<double>& breakpoints = {},
                               QuadratureSpec spec = {}) const
    {
        return std::visit(
            [&](const auto& d) -> IntegralEstimate {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Atoms>) {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < d.points.size(); ++i) {
                        const double gi = g(d.points[i]);
                        require_finite(gi, d.points[i]);
                        sum += d.masses[i] * gi;
                    }
                    return {sum, 0.0};
                } else {
                    const auto cuts = pieces(breakpoints);
                    const double fine = midpoint(g, cuts, spec.nodes);
                    const double coarse = midpoint(g, cuts, std::max<std::size_t>(spec.nodes / 2, 1));
                    return {fine, std::abs(fine - coarse) / 3.0};
                }
            },
            domain_);
    }

    /// Density of m with respect to Lebesgue measure at s (interval-type domains).
    double density_at(double s) const
    {
        return std::visit(
            [&](const auto& d) -> double {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Interval>) {
                    return (s >= d.lower && s <= d.upper) ? d.density : 0.0;
                } else if constexpr (std::is_same_v<D, Atoms>) {
                    throw std::logic_error("atomic measure has no density");
                } else {
                    if (s < d.nodes.front() || s > d.nodes.back()) {
                        return 0.0;
                    }
                    auto it = std::upper_bound(d.nodes.begin(), d.nodes.end(), s);
                    std::size_t i = static_cast<std::size_t>(it - d.nodes.begin());
                    i = std::clamp<std::size_t>(i, 1, d.nodes.size() - 1) - 1;
                    const double w = (s - d.nodes[i]) / (d.nodes[i + 1] - d.nodes[i]);
                    return d.density[i] + w * (d.density[i + 1] - d.density[i]);
                }
            },
            domain_);
    }

  private:
    using Domain = std::variant<Interval, Atoms, TabulatedDensity>;

    ControlMeasure(Domain domain, double total_mass) : domain_(std::move(domain)), total_mass_(total_mass)
    {
        if (!(total_mass_ > 0.0) || !std::isfinite(total_mass_)) {
            throw std::invalid_argument("control measure must have positive finite mass");
        }
        if (const auto* atoms = std::get_if<Atoms>(&domain_)) {
            cumulative_.resize(atoms->masses.size());
            std::partial_sum(atoms->masses.begin(), atoms->masses.end(), cumulative_.begin());
        } else if (const auto* tab = std::get_if<TabulatedDensity>(&domain_)) {
            cumulative_.assign(tab->nodes.size(), 0.0);
            for (std::size_t i = 0; i + 1 < tab->nodes.size(); ++i) {
                cumulative_[i + 1] = cumulative_[i] + 0.5 * (tab->density[i] + tab->density[i + 1]) *
                                                          (tab->nodes[i + 1] - tab->nodes[i]);
            }
        }
    }

    static void require_finite(double value, double at)
    {
        if (!std::isfinite(value)) {
            throw std::domain_error("integrand is not finite at s = " + io::format_double(at));
        }
    }

    double invert_tabulated(const TabulatedDensity& d, double target) const
    {
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
        i = std::clamp<std::size_t>(i, 1, cumulative_.size() - 1) - 1;
        const double h = d.nodes[i + 1] - d.nodes[i];
        const double f0 = d.density[i];
        const double slope = (d.density[i + 1] - f0) / h;
        const double need = target - cumulative_[i];
        double x = 0.0;
        // Solve f0 x + slope x^2 / 2 = need on [0, h].
        if (std::abs(slope) * h < 1e-12 * std::max(f0, 1e-300)) {
            x = f0 > 0.0 ? need / f0 : 0.0;
        } else {
            const double disc = std::max(f0 * f0 + 2.0 * slope * need, 0.0);
            x = 2.0 * need / (f0 + std::sqrt(disc));
        }
        return d.nodes[i] + std::clamp(x, 0.0, h);
    }

    std::vector<double> pieces(const std::vector<double>& breakpoints) const
    {
        const auto [lo, hi] = support_hull();
        std::vector<double> cuts{lo, hi};
        for (double b : breakpoints) {
            if (b > lo && b < hi) {
                cuts.push_back(b);
            }
        }
        if (const auto* tab = std::get_if<TabulatedDensity>(&domain_)) {
            cuts.insert(cuts.end(), tab->nodes.begin(), tab->nodes.end());
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        return cuts;
    }

    double midpoint(const std::function<double(double)>& g, const std::vector<double>& cuts,
                    std::size_t nodes) const
    {
        const double span = cuts.back() - cuts.front();
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k];
            const double b = cuts[k + 1];
            const auto n = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(static_cast<double>(nodes) * (b - a) / span)));
            const double h = (b - a) / static_cast<double>(n);
            double piece = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = a + (static_cast<double>(i) + 0.5) * h;
                const double gi = g(s);
                require_finite(gi, s);
                piece += gi * density_at(s);
            }
            sum += piece * h;
        }
        return sum;
    }

    Domain domain_;
    double total_mass_;
    std::vector<double> cumulative_;
};

}  // namespace shotnoise
