#pragma once

// Kernels f(t,s) of the stable integral representation and the generic series
// integrand H(t,r,v).
//
// Every kernel carries analytic jump metadata for its sections t -> f(t,s):
// the finite list of jump times and the jump size at each. Path ledgers are
// built from this metadata, never from numerical jump detection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shotnoise/constants.hpp"
#include "shotnoise/io.hpp"
#include "shotnoise/measure.hpp"
#include "shotnoise/random.hpp"

namespace shotnoise {

class Kernel
{
  public:
    using Eval = std::function<double(double t, double s)>;
    using JumpTimes = std::function<std::vector<double>(double s)>;
    using JumpSize = std::function<double(double t, double s)>;
    using SectionSup = std::function<double(double s)>;

    /// Sections of the form amplitude * exp(-rate (t - s)) on s <= t, zero
    /// before; rate 0 gives a step. Paths of such kernels are evaluated by a
    /// single sorted sweep instead of a term-by-grid sum.
    struct CausalExponential
    {
        double rate;
        double amplitude;
    };

    Kernel(std::string name, Eval eval, JumpTimes jump_times, JumpSize jump_size,
           SectionSup section_sup = {})
        : name_(std::move(name)),
          eval_(std::move(eval)),
          jump_times_(std::move(jump_times)),
          jump_size_(std::move(jump_size)),
          section_sup_(std::move(section_sup))
    {
    }

    static Kernel causal_exponential(std::string name, double rate, double amplitude)
    {
        auto in_support = [](double s) { return s > 0.0 && s <= 1.0; };
        Kernel k(
            std::move(name),
            [=](double t, double s) {
                if (!(s > 0.0) || s > t) {
                    return 0.0;
                }
                return rate == 0.0 ? amplitude : amplitude * std::exp(-rate * (t - s));
            },
            [=](double s) { return in_support(s) ? std::vector<double>{s} : std::vector<double>{}; },
            [=](double t, double s) { return (in_support(s) && t == s) ? amplitude : 0.0; },
            [=](double s) { return in_support(s) ? std::abs(amplitude) : 0.0; });
        k.causal_ = CausalExponential{rate, amplitude};
        return k;
    }

    double operator()(double t, double s) const { return eval_(t, s); }

    /// Times in [0,1] at which the section t -> f(t,s) jumps, ascending.
    std::vector<double> section_jump_times(double s) const { return jump_times_(s); }

    /// f(t,s) - f(t-,s); zero off the section's jump times.
    double jump_size(double t, double s) const { return jump_size_(t, s); }

    /// sup over t of |f(t,s)|.
    double section_sup(double s) const
    {
        if (section_sup_) {
            return section_sup_(s);
        }
        double best = 0.0;
        constexpr int kSamples = 1024;
        for (int i = 0; i <= kSamples; ++i) {
            best = std::max(best, std::abs(eval_(static_cast<double>(i) / kSamples, s)));
        }
        for (double tau : jump_times_(s)) {
            best = std::max({best, std::abs(eval_(tau, s)), std::abs(eval_(tau, s) - jump_size_(tau, s))});
        }
        return best;
    }

    /// max over jump times of |jump size|, 0 for a continuous section.
    double max_abs_jump(double s) const
    {
        double best = 0.0;
        for (double tau : jump_times_(s)) {
            best = std::max(best, std::abs(jump_size_(tau, s)));
        }
        return best;
    }

    const std::string& name() const noexcept { return name_; }
    const std::optional<CausalExponential>& causal_form() const noexcept { return causal_; }

    /// The kernel a * f.
    Kernel scaled(double factor) const
    {
        Kernel k(
            name_ + "*" + io::format_double(factor),
            [e = eval_, factor](double t, double s) { return factor * e(t, s); }, jump_times_,
            [j = jump_size_, factor](double t, double s) { return factor * j(t, s); },
            section_sup_ ? SectionSup([sup = section_sup_, factor](double s) {
                return std::abs(factor) * sup(s);
            })
                         : SectionSup{});
        if (causal_) {
            k.causal_ = CausalExponential{causal_->rate, causal_->amplitude * factor};
        }
        return k;
    }

  private:
    std::string name_;
    Eval eval_;
    JumpTimes jump_times_;
    JumpSize jump_size_;
    SectionSup section_sup_;
    std::optional<CausalExponential> causal_;
};

/// f(t,s) = 1 on 0 < s <= t: the kernel of a stable Levy process with
/// Lebesgue control measure on [0,1].
inline Kernel indicator_kernel()
{
    return Kernel::causal_exponential("indicator", 0.0, 1.0);
}

/// f(t,s) = exp(-lambda (t - s)) on 0 < s <= t: stable Ornstein-Uhlenbeck type.
inline Kernel ou_kernel(double lambda)
{
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("OU kernel needs lambda > 0");
    }
    return Kernel::causal_exponential("ou", lambda, 1.0);
}

/// f(t,s) = g(s) for all t: sections are constant, hence continuous.
inline Kernel time_constant_kernel(std::function<double(double)> g)
{
    return Kernel(
        "time-constant", [g](double, double s) { return g(s); },
        [](double) { return std::vector<double>{}; }, [](double, double) { return 0.0; },
        [g](double s) { return std::abs(g(s)); });
}

/// Kernel tabulated on a rectangular (t, s) grid.
///
/// In s the value of the greatest node <= s is used. In t values are linearly
/// interpolated, except inside a cell that holds a declared jump, where the
/// section is held at the left node value before the jump time and at the
/// right node value from it on. Jumps must be declared in the manifest;
/// an undeclared discontinuity is silently smoothed.
class TabulatedKernelData
{
  public:
    struct Jump
    {
        double time;
        double size;
    };

    TabulatedKernelData(std::vector<double> t_nodes, std::vector<double> s_nodes,
                        std::vector<std::vector<double>> values, std::map<std::size_t, std::vector<Jump>> jumps)
        : t_(std::move(t_nodes)), s_(std::move(s_nodes)), values_(std::move(values)), jumps_(std::move(jumps))
    {
        for (auto& [row, list] : jumps_) {
            std::sort(list.begin(), list.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
            for (const auto& jump : list) {
                const std::size_t cell = cell_of(jump.time);
                const double step = values_[row][cell + 1] - values_[row][cell];
                if (std::abs(step - jump.size) > 1e-9 * std::max(1.0, std::abs(step))) {
                    throw std::invalid_argument("declared jump size does not match the tabulated step at t = " +
                                                io::format_double(jump.time));
                }
            }
            for (std::size_t k = 1; k < list.size(); ++k) {
                if (cell_of(list[k].time) == cell_of(list[k - 1].time)) {
                    throw std::invalid_argument("at most one declared jump per grid cell");
                }
            }
        }
    }

    std::size_t row_of(double s) const
    {
        const auto it = std::upper_bound(s_.begin(), s_.end(), s);
        return it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    }

    // Cell a with t in (t_a, t_{a+1}].
    std::size_t cell_of(double t) const
    {
        const auto it = std::lower_bound(t_.begin(), t_.end(), t);
        const auto idx = static_cast<std::size_t>(it - t_.begin());
        return std::clamp<std::size_t>(idx, 1, t_.size() - 1) - 1;
    }

    double eval(double t, double s) const
    {
        const std::size_t row = row_of(s);
        const auto& v = values_[row];
        if (t <= t_.front()) {
            return v.front();
        }
        if (t >= t_.back()) {
            return v.back();
        }
        const std::size_t a = cell_of(t);
        if (const auto it = jumps_.find(row); it != jumps_.end()) {
            for (const auto& jump : it->second) {
                if (cell_of(jump.time) == a) {
                    return t < jump.time ? v[a] : v[a + 1];
                }
            }
        }
        const double w = (t - t_[a]) / (t_[a + 1] - t_[a]);
        return v[a] + w * (v[a + 1] - v[a]);
    }

    std::vector<double> jump_times(double s) const
    {
        std::vector<double> out;
        if (const auto it = jumps_.find(row_of(s)); it != jumps_.end()) {
            for (const auto& jump : it->second) {
                out.push_back(jump.time);
            }
        }
        return out;
    }

    double jump_size(double t, double s) const
    {
        if (const auto it = jumps_.find(row_of(s)); it != jumps_.end()) {
            for (const auto& jump : it->second) {
                if (jump.time == t) {
                    return jump.size;
                }
            }
        }
        return 0.0;
    }

  private:
    std::vector<double> t_;
    std::vector<double> s_;
    std::vector<std::vector<double>> values_;  // values_[s row][t column]
    std::map<std::size_t, std::vector<Jump>> jumps_;
};

/// Loads a tabulated kernel from a grid CSV of (t, s, value) rows covering a
/// rectangular grid and a jump manifest CSV of (s, jump_time, jump_size) rows.
inline Kernel tabulated_kernel_from_csv(const std::string& grid_path, const std::string& manifest_path)
{
    const auto rows = io::read_numeric_csv(grid_path, 3);
    std::vector<double> ts;
    std::vector<double> ss;
    for (const auto& r : rows) {
        ts.push_back(r[0]);
        ss.push_back(r[1]);
    }
    auto unique_sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    ts = unique_sorted(ts);
    ss = unique_sorted(ss);
    if (ts.size() < 2 || ss.empty() || rows.size() != ts.size() * ss.size()) {
        throw std::invalid_argument("kernel grid must be rectangular with at least two t nodes");
    }
    std::vector<std::vector<double>> values(ss.size(), std::vector<double>(ts.size(), 0.0));
    std::vector<std::vector<bool>> seen(ss.size(), std::vector<bool>(ts.size(), false));
    auto index_of = [](const std::vector<double>& nodes, double x) {
        return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), x) - nodes.begin());
    };
    for (const auto& r : rows) {
        const std::size_t i = index_of(ss, r[1]);
        const std::size_t j = index_of(ts, r[0]);
        if (seen[i][j]) {
            throw std::invalid_argument("duplicate kernel grid entry");
        }
        seen[i][j] = true;
        values[i][j] = r[2];
    }
    std::map<std::size_t, std::vector<TabulatedKernelData::Jump>> jumps;
    if (!manifest_path.empty()) {
        for (const auto& r : io::read_numeric_csv(manifest_path, 3)) {
            const std::size_t i = index_of(ss, r[0]);
            if (i >= ss.size() || ss[i] != r[0]) {
                throw std::invalid_argument("jump manifest row refers to s = " + io::format_double(r[0]) +
                                            ", which is not a grid node");
            }
            if (!(r[1] > ts.front() && r[1] <= ts.back())) {
                throw std::invalid_argument("jump time outside the tabulated t range");
            }
            jumps[i].push_back({r[1], r[2]});
        }
    }
    auto data = std::make_shared<const TabulatedKernelData>(std::move(ts), std::move(ss), std::move(values),
                                                            std::move(jumps));
    return Kernel(
        "tabulated", [data](double t, double s) { return data->eval(t, s); },
        [data](double s) { return data->jump_times(s); },
        [data](double t, double s) { return data->jump_size(t, s); });
}

/// Series integrand H(t, r, v) with shift b(t), as used by the generic
/// shot-noise construction.
struct SeriesIntegrand
{
    /// H(t,r,v) = radial(r) * kernel(t,v). Enables the kernel's fast path.
    struct Separable
    {
        std::function<double(double r)> radial;
        Kernel kernel;
    };

    std::function<double(double t, double r, double v)> value;
    std::function<double(double t)> shift;  // empty: b = 0
    std::function<std::vector<double>(double r, double v)> jump_times;
    std::function<double(double t, double r, double v)> jump_size;
    std::function<double(double r, double v)> sup_norm;  // sup_t |H(t,r,v)|
    bool monotone_norm = false;  // r -> sup_t |H(t,r,v)| nonincreasing
    bool symmetric = false;      // terms are multiplied by Rademacher signs
    std::optional<Separable> separable;

    double b(double t) const { return shift ? shift(t) : 0.0; }
};

inline SeriesIntegrand separable_integrand(std::function<double(double)> radial, Kernel kernel,
                                           bool symmetric, bool monotone_norm)
{
    SeriesIntegrand h;
    h.value = [radial, kernel](double t, double r, double v) { return radial(r) * kernel(t, v); };
    h.jump_times = [kernel](double, double v) { return kernel.section_jump_times(v); };
    h.jump_size = [radial, kernel](double t, double r, double v) { return radial(r) * kernel.jump_size(t, v); };
    h.sup_norm = [radial, kernel](double r, double v) { return std::abs(radial(r)) * kernel.section_sup(v); };
    h.monotone_norm = monotone_norm;
    h.symmetric = symmetric;
    h.separable = SeriesIntegrand::Separable{std::move(radial), std::move(kernel)};
    return h;
}

/// LePage integrand H(t,r,v) = c_alpha m(S)^(1/alpha) r^(-1/alpha) f(t,v),
/// symmetrized with Rademacher signs; b = 0.
inline SeriesIntegrand lepage_integrand(const Kernel& kernel, const ControlMeasure& measure, double alpha)
{
    require_stable_index(alpha);
    const double front = c_alpha(alpha) * std::pow(measure.total_mass(), 1.0 / alpha);
    const double exponent = -1.0 / alpha;
    return separable_integrand([front, exponent](double r) { return front * std::pow(r, exponent); }, kernel,
                               /*symmetric=*/true, /*monotone_norm=*/true);
}

/// Numerical check of the monotone-norm assertion: for marks drawn from the
/// measure and r1 < r2 on a log grid, sup_t|H(.,r2,v)| <= sup_t|H(.,r1,v)| + 1e-12.
inline bool check_monotone_norm(const SeriesIntegrand& h, const ControlMeasure& measure, RngStream stream,
                                std::size_t marks = 100)
{
    for (std::size_t i = 0; i < marks; ++i) {
        const double v = measure.sample_mark(stream);
        double previous = h.sup_norm(1e-6, v);
        for (int k = -59; k <= 60; ++k) {
            const double r = std::pow(10.0, static_cast<double>(k) / 10.0);
            const double current = h.sup_norm(r, v);
            if (current > previous + 1e-12) {
                return false;
            }
            previous = current;
        }
    }
    return true;
}

}  // namespace shotnoise
