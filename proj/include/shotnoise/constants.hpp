#pragma once

#include <cmath>
#include <numbers>

#include "shotnoise/random.hpp"

namespace shotnoise {

/// LePage constant c_alpha = [-alpha cos(pi alpha / 2) Gamma(-alpha)]^(-1/alpha),
/// c_1 = 2/pi. With it, c_alpha * sum_j eps_j Gamma_j^(-1/alpha) has
/// characteristic function exp(-|theta|^alpha).
inline double c_alpha(double alpha)
{
    require_stable_index(alpha);
    if (alpha == 1.0) {
        return 2.0 / std::numbers::pi;
    }
    const double base = -alpha * std::cos(std::numbers::pi * alpha / 2.0) * std::tgamma(-alpha);
    return std::pow(base, -1.0 / alpha);
}

}  // namespace shotnoise
