#pragma once

// Truncated series constructions: the generic shot-noise series with
// centering, its symmetric LePage specialization, and the convergence
// diagnostics run on them.
//
// Random inputs of replicate i live on the stream (seed, {i}); inside it the
// arrivals, signs and marks use fixed substreams, so term j sees the same
// (Gamma_j, eps_j, V_j) whatever the truncation. Partial sums at different
// truncation levels are therefore coupled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "shotnoise/constants.hpp"
#include "shotnoise/kernel.hpp"
#include "shotnoise/measure.hpp"
#include "shotnoise/parallel.hpp"
#include "shotnoise/path.hpp"
#include "shotnoise/random.hpp"
#include "shotnoise/stats.hpp"

namespace shotnoise {

enum Substream : std::uint64_t
{
    kArrivalStream = 0,
    kSignStream = 1,
    kMarkStream = 2,
    kAuxStream = 3,
};

struct TermCount
{
    std::size_t terms;
};

/// Keep the terms with Gamma_j <= level.
struct PoissonLevel
{
    double level;
};

using Truncation = std::variant<TermCount, PoissonLevel>;

struct SeriesConfig
{
    double alpha = 1.5;
    Truncation truncation = TermCount{10000};
    std::size_t replicates = 1;
    std::size_t grid = 4096;  // uniform intervals; jump times are added
    std::uint64_t seed = 1;

    void validate() const
    {
        require_stable_index(alpha);
        if (const auto* level = std::get_if<PoissonLevel>(&truncation)) {
            if (!(level->level >= 0.0) || !std::isfinite(level->level)) {
                throw std::invalid_argument("Poisson level must be finite and >= 0");
            }
        }
        if (replicates == 0) {
            throw std::invalid_argument("need at least one replicate");
        }
        if (grid == 0) {
            throw std::invalid_argument("grid resolution must be positive");
        }
    }

    RngStream replicate_stream(std::size_t replicate) const { return RngStream(seed, {replicate}); }
};

/// The random inputs (Gamma_j, eps_j, V_j), j = 1..size().
struct SeriesTerms
{
    std::vector<double> arrivals;
    std::vector<int> signs;  // empty for non-symmetric series
    std::vector<double> marks;

    std::size_t size() const noexcept { return arrivals.size(); }
};

inline SeriesTerms draw_terms(const RngStream& stream, const ControlMeasure& measure, const Truncation& truncation,
                              bool with_signs)
{
    SeriesTerms terms;
    if (const auto* count = std::get_if<TermCount>(&truncation)) {
        terms.arrivals = gamma_arrivals(stream.substream(kArrivalStream), count->terms);
    } else {
        terms.arrivals = gamma_arrivals_until(stream.substream(kArrivalStream), std::get<PoissonLevel>(truncation).level);
    }
    if (with_signs) {
        terms.signs = rademacher(stream.substream(kSignStream), terms.size());
    }
    terms.marks = measure.sample_marks(stream.substream(kMarkStream), terms.size());
    return terms;
}

/// sum_j coefs[j] * f(t, marks[j]) on the grid.
inline std::vector<double> evaluate_kernel_sum(const Kernel& kernel, const std::vector<double>& coefs,
                                               const std::vector<double>& marks, const std::vector<double>& grid)
{
    std::vector<double> values(grid.size(), 0.0);
    if (const auto& causal = kernel.causal_form()) {
        std::vector<std::size_t> order(coefs.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return marks[a] < marks[b] || (marks[a] == marks[b] && a < b);
        });
        std::size_t next = 0;
        while (next < order.size() && !(marks[order[next]] > 0.0)) {
            ++next;  // sections with s <= 0 vanish
        }
        const double rate = causal->rate;
        double state = 0.0;
        double previous_t = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double t = grid[g];
            if (rate != 0.0) {
                state *= std::exp(-rate * (t - previous_t));
            }
            while (next < order.size() && marks[order[next]] <= t) {
                const std::size_t j = order[next++];
                state += rate == 0.0 ? coefs[j] : coefs[j] * std::exp(-rate * (t - marks[j]));
            }
            values[g] = causal->amplitude * state;
            previous_t = t;
        }
        return values;
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (std::size_t j = 0; j < coefs.size(); ++j) {
            sum += coefs[j] * kernel(grid[g], marks[j]);
        }
        values[g] = sum;
    }
    return values;
}

inline JumpLedger kernel_ledger(const Kernel& kernel, const std::vector<double>& coefs, const std::vector<double>& marks)
{
    std::vector<JumpRecord> records;
    records.reserve(coefs.size());
    if (const auto& causal = kernel.causal_form()) {
        // One jump of size amplitude at t = s for every section in (0,1].
        for (std::size_t j = 0; j < coefs.size(); ++j) {
            if (marks[j] > 0.0 && marks[j] <= 1.0) {
                records.push_back({marks[j], coefs[j] * causal->amplitude, j + 1});
            }
        }
        return JumpLedger(std::move(records));
    }
    for (std::size_t j = 0; j < coefs.size(); ++j) {
        for (double tau : kernel.section_jump_times(marks[j])) {
            if (tau >= 0.0 && tau <= 1.0) {
                records.push_back({tau, coefs[j] * kernel.jump_size(tau, marks[j]), j + 1});
            }
        }
    }
    return JumpLedger(std::move(records));
}

/// c_alpha m(S)^(1/alpha) eps_j Gamma_j^(-1/alpha).
inline std::vector<double> lepage_coefficients(const SeriesTerms& terms, double alpha, double total_mass)
{
    const double front = c_alpha(alpha) * std::pow(total_mass, 1.0 / alpha);
    std::vector<double> coefs(terms.size());
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const double magnitude = front * std::pow(terms.arrivals[j], -1.0 / alpha);
        coefs[j] = terms.signs.empty() ? magnitude : terms.signs[j] * magnitude;
    }
    return coefs;
}

inline CadlagPath lepage_path_from_terms(const Kernel& kernel, const ControlMeasure& measure, double alpha,
                                         const SeriesTerms& terms, std::size_t grid_resolution)
{
    const auto coefs = lepage_coefficients(terms, alpha, measure.total_mass());
    auto ledger = kernel_ledger(kernel, coefs, terms.marks);
    auto grid = merged_grid(grid_resolution, ledger.times());
    auto values = evaluate_kernel_sum(kernel, coefs, terms.marks, grid);
    return CadlagPath(std::move(grid), std::move(values), std::move(ledger));
}

/// X(t) = c_alpha m(S)^(1/alpha) sum_j eps_j Gamma_j^(-1/alpha) f(t, V_j), truncated
/// per config, with one ledger entry per kernel jump of each term.
inline CadlagPath lepage_sample_path(const Kernel& kernel, const ControlMeasure& measure, const SeriesConfig& config,
                                     const RngStream& stream)
{
    config.validate();
    const auto terms = draw_terms(stream, measure, config.truncation, /*with_signs=*/true);
    return lepage_path_from_terms(kernel, measure, config.alpha, terms, config.grid);
}

/// A^u(t) tabulated on a grid; linearly interpolated in between.
struct CenteringTable
{
    double level = 0.0;
    std::vector<double> grid;
    std::vector<double> values;

    double value_at(double t) const
    {
        if (grid.empty()) {
            return 0.0;
        }
        if (t <= grid.front()) {
            return values.front();
        }
        if (t >= grid.back()) {
            return values.back();
        }
        const auto it = std::upper_bound(grid.begin(), grid.end(), t);
        const auto i = static_cast<std::size_t>(it - grid.begin()) - 1;
        const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
        return values[i] + w * (values[i + 1] - values[i]);
    }
};

/// Node layout for integrals over r in [0, u]: geometric pieces
/// [u 2^-(k+1), u 2^-k], k < pieces, each with Gauss-Legendre nodes, plus a
/// single midpoint node on [0, u 2^-pieces].
struct RadialQuadrature
{
    std::size_t pieces = 48;
};

namespace detail {

struct Node
{
    double x;
    double w;
};

inline std::vector<Node> radial_nodes(double u, RadialQuadrature spec)
{
    static constexpr double kX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
    static constexpr double kW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
    std::vector<Node> nodes;
    double hi = u;
    for (std::size_t k = 0; k < spec.pieces; ++k) {
        const double lo = hi / 2.0;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (int i = 0; i < 8; ++i) {
            nodes.push_back({mid + half * kX[i], half * kW[i]});
        }
        hi = lo;
    }
    nodes.push_back({hi / 2.0, hi});
    return nodes;
}

/// Lebesgue measure of {r in (0, radius] : sup_t |H(.,r,v)| > 1}. The set is read
/// off a log grid with 8 nodes per octave over 60 octaves; every change of state
/// between neighbouring nodes is located by bisection. Below the smallest node
/// the state is taken as constant.
inline double exceedance_length(const SeriesIntegrand& h, double v, double radius)
{
    constexpr int kPerOctave = 8;
    constexpr int kOctaves = 60;
    auto inside = [&](double r) { return h.sup_norm(r, v) > 1.0; };
    auto node = [&](int k) { return radius * std::exp2(static_cast<double>(k) / kPerOctave - kOctaves); };
    double lo = node(0);
    bool lo_in = inside(lo);
    double length = lo_in ? lo : 0.0;
    for (int k = 1; k <= kPerOctave * kOctaves; ++k) {
        const double hi = k == kPerOctave * kOctaves ? radius : node(k);
        const bool hi_in = inside(hi);
        if (lo_in == hi_in) {
            length += lo_in ? hi - lo : 0.0;
        } else {
            double a = std::log(lo);
            double b = std::log(hi);
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (a + b);
                (inside(std::exp(mid)) == lo_in ? a : b) = mid;
            }
            const double cross = std::exp(0.5 * (a + b));
            length += lo_in ? cross - lo : hi - cross;
        }
        lo = hi;
        lo_in = hi_in;
    }
    return length;
}

inline double truncate_unit(double x)
{
    return x / std::max(1.0, std::abs(x));
}

}  // namespace detail

/// A^u(t) = int_0^u E[[H(t,r,V)]] dr with [[x]] = x / (1 v |x|). The expectation
/// over V (and over the signs of a symmetric integrand) is a Monte Carlo mean of
/// mc_draws draws from `stream`; the r-integral uses RadialQuadrature.
inline CenteringTable compute_centering(const SeriesIntegrand& h, const ControlMeasure& measure, double level,
                                        std::vector<double> grid, RadialQuadrature spec, std::size_t mc_draws,
                                        const RngStream& stream)
{
    if (!(level > 0.0)) {
        throw std::invalid_argument("centering level must be positive");
    }
    if (mc_draws == 0) {
        throw std::invalid_argument("centering needs at least one Monte Carlo draw");
    }
    const auto marks = measure.sample_marks(stream.substream(kMarkStream), mc_draws);
    const auto signs = h.symmetric ? rademacher(stream.substream(kSignStream), mc_draws) : std::vector<int>{};
    const auto nodes = detail::radial_nodes(level, spec);
    CenteringTable table{level, std::move(grid), {}};
    table.values.reserve(table.grid.size());
    for (double t : table.grid) {
        double integral = 0.0;
        for (const auto& node : nodes) {
            double mean = 0.0;
            for (std::size_t i = 0; i < mc_draws; ++i) {
                double value = h.value(t, node.x, marks[i]);
                if (!std::isfinite(value)) {
                    throw std::domain_error("integrand is not finite during centering");
                }
                if (!signs.empty()) {
                    value *= signs[i];
                }
                mean += detail::truncate_unit(value);
            }
            integral += node.w * mean / static_cast<double>(mc_draws);
        }
        table.values.push_back(integral);
    }
    return table;
}

/// Y^u(t) = b(t) + sum_{Gamma_j <= u} H(t, Gamma_j, V_j) - A^u(t), with a Rademacher
/// factor on every term when the integrand is symmetric (then A^u = 0 and no
/// table is needed). Non-symmetric integrands need Poisson-level truncation and
/// a centering table for the same level.
inline CadlagPath shot_noise_sample_path(const SeriesIntegrand& h, const ControlMeasure& measure,
                                         const SeriesConfig& config, const RngStream& stream,
                                         const std::optional<CenteringTable>& centering = std::nullopt)
{
    config.validate();
    if (!h.symmetric) {
        const auto* level = std::get_if<PoissonLevel>(&config.truncation);
        if (level == nullptr) {
            throw std::invalid_argument("non-symmetric series need Poisson-level truncation");
        }
        if (!centering) {
            throw std::invalid_argument("non-symmetric series need a centering table");
        }
        if (std::abs(centering->level - level->level) > 1e-12 * std::max(1.0, level->level)) {
            throw std::invalid_argument("centering table level " + io::format_double(centering->level) +
                                        " does not match truncation level " + io::format_double(level->level));
        }
    }
    const auto terms = draw_terms(stream, measure, config.truncation, h.symmetric);
    auto sign = [&](std::size_t j) { return terms.signs.empty() ? 1.0 : static_cast<double>(terms.signs[j]); };

    std::vector<JumpRecord> records;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const double r = terms.arrivals[j];
        const double v = terms.marks[j];
        for (double tau : h.jump_times(r, v)) {
            if (tau >= 0.0 && tau <= 1.0) {
                records.push_back({tau, sign(j) * h.jump_size(tau, r, v), j + 1});
            }
        }
    }
    JumpLedger ledger(std::move(records));
    auto grid = merged_grid(config.grid, ledger.times());

    std::vector<double> values;
    if (h.separable) {
        std::vector<double> coefs(terms.size());
        for (std::size_t j = 0; j < terms.size(); ++j) {
            coefs[j] = sign(j) * h.separable->radial(terms.arrivals[j]);
        }
        values = evaluate_kernel_sum(h.separable->kernel, coefs, terms.marks, grid);
    } else {
        values.assign(grid.size(), 0.0);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double sum = 0.0;
            for (std::size_t j = 0; j < terms.size(); ++j) {
                sum += sign(j) * h.value(grid[g], terms.arrivals[j], terms.marks[j]);
            }
            values[g] = sum;
        }
    }
    if (h.shift || (!h.symmetric && centering)) {
        for (std::size_t g = 0; g < grid.size(); ++g) {
            values[g] += h.b(grid[g]);
            if (!h.symmetric) {
                values[g] -= centering->value_at(grid[g]);
            }
        }
    }
    return CadlagPath(std::move(grid), std::move(values), std::move(ledger));
}

struct DiagnosticsReport
{
    std::vector<double> term_norms;  // sup_t |H(., Gamma_j, V_j)|, j = 1..J_max
    double last_decile_max = 0.0;
    double tail_integral = 0.0;       // estimate of int_0^R P(sup_t |H(.,r,V)| > 1) dr
    double tail_integral_error = 0.0;  // Monte Carlo standard error
    double radius = 0.0;               // R
    bool divergent = false;
};

/// Numerical checks of the two necessary conditions for cadlag limits:
/// int_0^inf P(||H(.,r,V)|| > 1) dr < inf and ||H(., Gamma_j, V_j)|| -> 0.
///
/// For monotone-norm integrands the set {r : ||H(.,r,v)|| > 1} is an interval
/// (0, r*(v)), so the r-integral equals E r*(V); r*(v) is found by bisection.
/// Otherwise R is doubled until (almost) no sampled mark exceeds 1 at R, and
/// the r-integral over (0, R] is detail::exceedance_length. Divergent when no R <= 1e6 works.
inline DiagnosticsReport tail_diagnostics(const SeriesIntegrand& h, const ControlMeasure& measure, std::size_t j_max,
                                          const RngStream& stream, std::size_t mc_draws = 10000)
{
    if (j_max < 100) {
        throw std::invalid_argument("tail diagnostics need J_max >= 100");
    }
    DiagnosticsReport report;
    const auto terms = draw_terms(stream, measure, TermCount{j_max}, /*with_signs=*/false);
    report.term_norms.reserve(j_max);
    for (std::size_t j = 0; j < j_max; ++j) {
        report.term_norms.push_back(h.sup_norm(terms.arrivals[j], terms.marks[j]));
    }
    const std::size_t decile_start = j_max - j_max / 10;
    report.last_decile_max =
        *std::max_element(report.term_norms.begin() + static_cast<std::ptrdiff_t>(decile_start), report.term_norms.end());

    constexpr double kMaxRadius = 1e6;
    constexpr double kMinRadius = 1e-12;
    const auto marks = measure.sample_marks(stream.substream(kAuxStream), mc_draws);
    std::vector<double> contributions(mc_draws, 0.0);
    if (h.monotone_norm) {
        for (std::size_t i = 0; i < mc_draws; ++i) {
            const double v = marks[i];
            if (h.sup_norm(kMaxRadius, v) > 1.0) {
                report.divergent = true;
                break;
            }
            if (!(h.sup_norm(kMinRadius, v) > 1.0)) {
                continue;
            }
            double lo = std::log(kMinRadius);
            double hi = std::log(kMaxRadius);
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (h.sup_norm(std::exp(mid), v) > 1.0 ? lo : hi) = mid;
            }
            contributions[i] = std::exp(0.5 * (lo + hi));
            report.radius = std::max(report.radius, contributions[i]);
        }
    } else {
        double radius = 1.0;
        auto exceed_fraction = [&](double r) {
            std::size_t count = 0;
            for (double v : marks) {
                count += h.sup_norm(r, v) > 1.0 ? 1 : 0;
            }
            return static_cast<double>(count) / static_cast<double>(marks.size());
        };
        while (exceed_fraction(radius) >= 1e-6 && radius <= kMaxRadius) {
            radius *= 2.0;
        }
        if (radius > kMaxRadius) {
            report.divergent = true;
        } else {
            report.radius = radius;
            for (std::size_t i = 0; i < mc_draws; ++i) {
                contributions[i] = detail::exceedance_length(h, marks[i], radius);
            }
        }
    }
    if (report.divergent) {
        report.tail_integral = std::numeric_limits<double>::infinity();
        return report;
    }
    const double n = static_cast<double>(mc_draws);
    const double mean = std::accumulate(contributions.begin(), contributions.end(), 0.0) / n;
    double var = 0.0;
    for (double c : contributions) {
        var += (c - mean) * (c - mean);
    }
    report.tail_integral = mean;
    report.tail_integral_error = mc_draws > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    return report;
}

struct LadderStep
{
    std::size_t from_terms;
    std::size_t to_terms;
    std::vector<double> sup_diffs;  // per replicate, replicate order
    double median = 0.0;
    double p90 = 0.0;
};

struct ConvergenceReport
{
    std::vector<LadderStep> steps;
};

/// Coupled partial sums S_J of the LePage series: for consecutive ladder
/// entries (J, J') the median and 90th percentile over replicates of
/// ||S_J' - S_J||, computed on the grid that holds every jump of S_{J_max}.
inline ConvergenceReport partial_sum_ladder(const Kernel& kernel, const ControlMeasure& measure, double alpha,
                                            const std::vector<std::size_t>& ladder, std::size_t replicates,
                                            std::uint64_t seed, std::size_t grid_resolution = 4096,
                                            std::size_t workers = 1)
{
    require_stable_index(alpha);
    if (ladder.empty()) {
        throw std::invalid_argument("convergence ladder is empty");
    }
    for (std::size_t k = 1; k < ladder.size(); ++k) {
        if (ladder[k] < ladder[k - 1]) {
            throw std::invalid_argument("convergence ladder must be nondecreasing");
        }
    }
    if (replicates == 0) {
        throw std::invalid_argument("need at least one replicate");
    }
    ConvergenceReport report;
    for (std::size_t k = 1; k < ladder.size(); ++k) {
        report.steps.push_back({ladder[k - 1], ladder[k], std::vector<double>(replicates, 0.0)});
    }
    parallel_for(replicates, workers, [&](std::size_t i) {
        const RngStream stream(seed, {i});
        const auto all_terms = draw_terms(stream, measure, TermCount{ladder.back()}, /*with_signs=*/true);
        const auto all_coefs = lepage_coefficients(all_terms, alpha, measure.total_mass());
        const auto grid = merged_grid(grid_resolution, kernel_ledger(kernel, all_coefs, all_terms.marks).times());
        auto partial = [&](std::size_t count) {
            const std::vector<double> coefs(all_coefs.begin(), all_coefs.begin() + static_cast<std::ptrdiff_t>(count));
            const std::vector<double> marks(all_terms.marks.begin(),
                                            all_terms.marks.begin() + static_cast<std::ptrdiff_t>(count));
            return CadlagPath(grid, evaluate_kernel_sum(kernel, coefs, marks, grid));
        };
        auto previous = partial(ladder.front());
        for (std::size_t k = 1; k < ladder.size(); ++k) {
            auto current = partial(ladder[k]);
            report.steps[k - 1].sup_diffs[i] = sup_norm_diff(current, previous);
            previous = std::move(current);
        }
    });
    for (auto& step : report.steps) {
        const auto q = quantiles(EmpiricalSample(step.sup_diffs), {0.5, 0.9});
        step.median = q[0];
        step.p90 = q[1];
    }
    return report;
}

}  // namespace shotnoise
