#pragma once

// Counter-based random streams and the primitive samplers used by the series
// constructions.
//
// Every stream is identified by (master_seed, stream_path). The path is hashed
// into a Philox4x32-10 key and the high half of the counter; the low half is
// the position in the stream. Output therefore depends only on the identity
// and the position, never on which thread or in which order replicates run.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shotnoise {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept
{
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

}  // namespace detail

/// Deterministic random stream addressed by a master seed and a path of
/// indices, e.g. {replicate, substream}. Value type: copying a stream copies
/// its position, so a copy replays the same numbers.
class RngStream
{
  public:
    RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> stream_path = {})
        : seed_(master_seed), path_(std::move(stream_path))
    {
        std::uint64_t h = detail::splitmix64(seed_);
        for (std::uint64_t index : path_) {
            h = detail::splitmix64(h ^ detail::splitmix64(index + 0x632be59bd9b4e019ull));
        }
        key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
        stream_id_ = detail::splitmix64(h ^ 0xa0761d6478bd642full);
    }

    /// Child stream with `index` appended to the path. Independent of the
    /// parent's current position.
    [[nodiscard]] RngStream substream(std::uint64_t index) const
    {
        auto child = path_;
        child.push_back(index);
        return RngStream(seed_, std::move(child));
    }

    [[nodiscard]] RngStream substream(std::initializer_list<std::uint64_t> indices) const
    {
        auto child = path_;
        child.insert(child.end(), indices);
        return RngStream(seed_, std::move(child));
    }

    std::uint64_t master_seed() const noexcept { return seed_; }
    const std::vector<std::uint64_t>& stream_path() const noexcept { return path_; }

    /// Number of 64-bit words consumed so far.
    std::uint64_t position() const noexcept { return position_; }

    void seek(std::uint64_t word_position) noexcept
    {
        position_ = word_position;
        buffered_ = false;
        has_spare_normal_ = false;
    }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t block = position_ >> 1;
        if (!buffered_ || cached_block_ != block) {
            const std::array<std::uint32_t, 4> ctr = {
                static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                static_cast<std::uint32_t>(stream_id_),
                static_cast<std::uint32_t>(stream_id_ >> 32)};
            block_ = detail::philox4x32(ctr, key_);
            cached_block_ = block;
            buffered_ = true;
        }
        const std::size_t lane = (position_ & 1u) * 2;
        ++position_;
        return (std::uint64_t{block_[lane + 1]} << 32) | block_[lane];
    }

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() noexcept { return -std::log(uniform()); }

    int rademacher() noexcept { return (next_u64() >> 63) != 0 ? 1 : -1; }

    /// Standard normal by Box-Muller; pairs are consumed in order.
    double normal() noexcept
    {
        if (has_spare_normal_) {
            has_spare_normal_ = false;
            return spare_normal_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_normal_ = radius * std::sin(angle);
        has_spare_normal_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_id_ = 0;
    std::uint64_t position_ = 0;
    std::array<std::uint32_t, 4> block_{};
    std::uint64_t cached_block_ = 0;
    bool buffered_ = false;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// Gamma_1 < Gamma_2 < ... < Gamma_count: partial sums of i.i.d. Exp(1).
/// Draws from the start of `stream`'s current position; a longer request on an
/// equal stream extends the shorter one.
inline std::vector<double> gamma_arrivals(RngStream stream, std::size_t count)
{
    std::vector<double> arrivals;
    arrivals.reserve(count);
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        sum += stream.exponential();
        arrivals.push_back(sum);
    }
    return arrivals;
}

/// Arrivals up to and including `level`: all Gamma_j <= level.
inline std::vector<double> gamma_arrivals_until(RngStream stream, double level)
{
    std::vector<double> arrivals;
    double sum = stream.exponential();
    while (sum <= level) {
        arrivals.push_back(sum);
        sum += stream.exponential();
    }
    return arrivals;
}

inline std::vector<int> rademacher(RngStream stream, std::size_t count)
{
    std::vector<int> signs(count);
    for (auto& s : signs) {
        s = stream.rademacher();
    }
    return signs;
}

inline void require_stable_index(double alpha)
{
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw std::domain_error("stability index must lie in (0,2)");
    }
}

/// One symmetric alpha-stable draw with characteristic function
/// exp(-scale^alpha |theta|^alpha), Chambers-Mallows-Stuck.
inline double draw_sas(RngStream& stream, double alpha, double scale)
{
    const double v = std::numbers::pi * (stream.uniform() - 0.5);
    const double w = stream.exponential();
    if (alpha == 1.0) {
        return scale * std::tan(v);
    }
    const double x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
    return scale * x;
}

inline std::vector<double> sample_sas(RngStream stream, double alpha, double scale, std::size_t count)
{
    require_stable_index(alpha);
    if (!(scale > 0.0)) {
        throw std::domain_error("scale must be positive");
    }
    std::vector<double> out(count);
    for (auto& x : out) {
        x = draw_sas(stream, alpha, scale);
    }
    return out;
}

/// One totally skewed (beta = 1) stable draw with index in (0,1).
///
/// Scale convention: Laplace transform exp(-(scale*lambda)^a / cos(pi a / 2)),
/// i.e. scale 1 has the law of c_a * sum_j Gamma_j^(-1/a) with c_a the
/// LePage constant.
inline double draw_positive_stable(RngStream& stream, double alpha_prime, double scale)
{
    const double a = alpha_prime;
    const double v = std::numbers::pi * (stream.uniform() - 0.5);
    const double w = stream.exponential();
    const double tan_term = std::tan(std::numbers::pi * a / 2.0);
    const double shift = std::atan(tan_term) / a;
    const double stretch = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * a));
    const double x = stretch * std::sin(a * (v + shift)) / std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
    return scale * x;
}

inline std::vector<double> sample_positive_stable(RngStream stream, double alpha_prime, double scale,
                                                  std::size_t count)
{
    if (!(alpha_prime > 0.0 && alpha_prime < 1.0)) {
        throw std::domain_error("positive stable index must lie in (0,1)");
    }
    if (!(scale > 0.0)) {
        throw std::domain_error("scale must be positive");
    }
    std::vector<double> out(count);
    for (auto& x : out) {
        x = draw_positive_stable(stream, alpha_prime, scale);
    }
    return out;
}

}  // namespace shotnoise
