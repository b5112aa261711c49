#pragma once

// Cadlag paths sampled on a grid, together with an exact ledger of the jumps
// that generated them, and the path functionals used by the verifiers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "shotnoise/io.hpp"

namespace shotnoise {

struct JumpRecord
{
    double time;
    double size;
    std::size_t term;  // index j of the series term that produced the jump
};

/// Jump records sorted by (time, term).
class JumpLedger
{
  public:
    JumpLedger() = default;

    explicit JumpLedger(std::vector<JumpRecord> entries) : entries_(std::move(entries))
    {
        for (const auto& e : entries_) {
            if (!(e.time >= 0.0 && e.time <= 1.0)) {
                throw std::invalid_argument("ledger jump time outside [0,1]");
            }
        }
        std::sort(entries_.begin(), entries_.end(), [](const JumpRecord& a, const JumpRecord& b) {
            return a.time < b.time || (a.time == b.time && a.term < b.term);
        });
    }

    const std::vector<JumpRecord>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    std::vector<double> times() const
    {
        std::vector<double> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) {
            out.push_back(e.time);
        }
        return out;
    }

  private:
    std::vector<JumpRecord> entries_;
};

/// Uniform grid 0, 1/T, ..., 1 merged with extra times in [0,1].
inline std::vector<double> merged_grid(std::size_t resolution, const std::vector<double>& extra = {})
{
    if (resolution == 0) {
        throw std::invalid_argument("grid resolution must be positive");
    }
    std::vector<double> grid;
    grid.reserve(resolution + 1 + extra.size());
    for (std::size_t i = 0; i <= resolution; ++i) {
        grid.push_back(static_cast<double>(i) / static_cast<double>(resolution));
    }
    for (double t : extra) {
        if (t >= 0.0 && t <= 1.0) {
            grid.push_back(t);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

/// Path values on a grid of [0,1] (right-continuous convention) plus the
/// ledger of its jumps.
class CadlagPath
{
  public:
    CadlagPath(std::vector<double> grid, std::vector<double> values, JumpLedger ledger = {})
        : grid_(std::move(grid)), values_(std::move(values)), ledger_(std::move(ledger))
    {
        if (grid_.size() < 2 || grid_.front() != 0.0 || grid_.back() != 1.0) {
            throw std::invalid_argument("path grid must start at 0 and end at 1");
        }
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            if (!(grid_[i] > grid_[i - 1])) {
                throw std::invalid_argument("path grid must be strictly increasing");
            }
        }
        if (values_.size() != grid_.size()) {
            throw std::invalid_argument("path needs one value per grid point");
        }
    }

    static CadlagPath zero(std::vector<double> grid)
    {
        std::vector<double> values(grid.size(), 0.0);
        return CadlagPath(std::move(grid), std::move(values));
    }

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const JumpLedger& ledger() const noexcept { return ledger_; }

    /// Value at the greatest grid point <= t (the path is treated as a step
    /// function between grid points).
    double value_at(double t) const
    {
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
        if (it == grid_.begin()) {
            return values_.front();
        }
        return values_[static_cast<std::size_t>(it - grid_.begin()) - 1];
    }

    CadlagPath resampled(std::vector<double> grid) const
    {
        std::vector<double> values;
        values.reserve(grid.size());
        for (double t : grid) {
            values.push_back(value_at(t));
        }
        return CadlagPath(std::move(grid), std::move(values), ledger_);
    }

  private:
    std::vector<double> grid_;
    std::vector<double> values_;
    JumpLedger ledger_;
};

/// max over the grid of |p1 - p2|. A lower bound of the uniform distance,
/// exact when every jump time of both paths is a grid point. With `resample`
/// both paths are first evaluated on the union of their grids.
inline double sup_norm_diff(const CadlagPath& p1, const CadlagPath& p2, bool resample = false)
{
    if (p1.grid() != p2.grid()) {
        if (!resample) {
            throw std::invalid_argument("paths live on different grids");
        }
        std::vector<double> grid = p1.grid();
        grid.insert(grid.end(), p2.grid().begin(), p2.grid().end());
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        return sup_norm_diff(p1.resampled(grid), p2.resampled(grid));
    }
    double best = 0.0;
    for (std::size_t i = 0; i < p1.values().size(); ++i) {
        best = std::max(best, std::abs(p1.values()[i] - p2.values()[i]));
    }
    return best;
}

/// Sum over jumps of |size|^p, straight from the ledger.
inline double vp_of_jumps(const JumpLedger& ledger, double p)
{
    if (!(p > 0.0)) {
        throw std::invalid_argument("p must be positive");
    }
    double sum = 0.0;
    for (const auto& e : ledger.entries()) {
        sum += std::pow(std::abs(e.size), p);
    }
    return sum;
}

inline double max_abs_jump(const JumpLedger& ledger)
{
    double best = 0.0;
    for (const auto& e : ledger.entries()) {
        best = std::max(best, std::abs(e.size));
    }
    return best;
}

/// sup_t of the jump function; 0 when no jump is positive, since the jump
/// function vanishes off the (countable) jump set.
inline double max_jump(const JumpLedger& ledger)
{
    double best = 0.0;
    for (const auto& e : ledger.entries()) {
        best = std::max(best, e.size);
    }
    return best;
}

/// Number of ledger entries that share their time with an entry of a
/// different term.
inline std::size_t shared_jump_times(const JumpLedger& ledger)
{
    std::size_t count = 0;
    const auto& e = ledger.entries();
    for (std::size_t i = 0; i < e.size();) {
        std::size_t k = i + 1;
        bool distinct_terms = false;
        while (k < e.size() && e[k].time == e[i].time) {
            distinct_terms = distinct_terms || e[k].term != e[i].term;
            ++k;
        }
        if (distinct_terms) {
            count += k - i;
        }
        i = k;
    }
    return count;
}

/// Upper-bound approximation of the Skorohod J1 distance.
///
/// Both paths are sampled on the lattice k/knots and aligned by a monotone
/// bottleneck alignment whose pair cost is max(|x_i - y_j|, |t_i - t_j|).
/// A strictly increasing piecewise-linear warp whose graph stays within the
/// matched lattice cells realizes the alignment with time distortion at most
/// one cell more, so the returned value is min(identity warp, alignment + 1/knots).
inline double j1_distance(const CadlagPath& p1, const CadlagPath& p2, std::size_t knots)
{
    if (knots == 0) {
        throw std::invalid_argument("j1_distance needs at least one knot interval");
    }
    const double identity = sup_norm_diff(p1, p2, /*resample=*/true);
    if (identity == 0.0) {
        return 0.0;
    }
    const std::size_t n = knots + 1;
    const double h = 1.0 / static_cast<double>(knots);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        x[k] = p1.value_at(t);
        y[k] = p2.value_at(t);
    }
    // Pairs farther apart in time than the identity bound cannot improve it.
    const auto band = static_cast<std::size_t>(std::ceil(identity / h)) + 1;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> previous(n, inf);
    std::vector<double> current(n, inf);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(current.begin(), current.end(), inf);
        const std::size_t lo = i > band ? i - band : 0;
        const std::size_t hi = std::min(n - 1, i + band);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double cost = std::max(std::abs(x[i] - y[j]), std::abs(static_cast<double>(i) - static_cast<double>(j)) * h);
            double reach = inf;
            if (i == 0 && j == 0) {
                reach = 0.0;
            } else {
                if (i > 0) {
                    reach = std::min(reach, previous[j]);
                }
                if (j > 0) {
                    reach = std::min(reach, current[j - 1]);
                }
                if (i > 0 && j > 0) {
                    reach = std::min(reach, previous[j - 1]);
                }
            }
            current[j] = std::max(cost, reach);
        }
        std::swap(previous, current);
    }
    return std::min(identity, previous[n - 1] + h);
}

/// Largest (sum |increment|^p)^(1/p) over partitions whose breakpoints are grid
/// points; quadratic-time dynamic program. A lower bound of the p-variation norm.
inline double grid_pvariation(const CadlagPath& path, double p)
{
    if (!(p > 1.0)) {
        throw std::invalid_argument("grid p-variation needs p > 1");
    }
    const auto& v = path.values();
    std::vector<double> best(v.size(), 0.0);
    for (std::size_t k = 1; k < v.size(); ++k) {
        double b = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            b = std::max(b, best[i] + std::pow(std::abs(v[k] - v[i]), p));
        }
        best[k] = b;
    }
    return std::pow(best.back(), 1.0 / p);
}

/// Rows "replicate,t,value".
inline void write_path_csv(std::ostream& out, std::size_t replicate, const CadlagPath& path)
{
    for (std::size_t i = 0; i < path.grid().size(); ++i) {
        out << replicate << ',' << io::format_double(path.grid()[i]) << ','
            << io::format_double(path.values()[i]) << '\n';
    }
}

/// Rows "replicate,t,size,term_index".
inline void write_ledger_csv(std::ostream& out, std::size_t replicate, const JumpLedger& ledger)
{
    for (const auto& e : ledger.entries()) {
        out << replicate << ',' << io::format_double(e.time) << ',' << io::format_double(e.size) << ','
            << e.term << '\n';
    }
}

}  // namespace shotnoise
