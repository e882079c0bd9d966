#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace isohull {

/// log Gamma(x) for x > 0 by the Lanczos approximation (g = 7, 9 terms),
/// reflected for x < 1/2. Relative accuracy is around 1e-15 for Gamma itself.
inline double log_gamma(double x)
{
    constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
    };
    constexpr double g = 7.0;
    if (x < 0.5) {
        // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) - log_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = coef[0];
    const double t = x + g + 0.5;
    for (int i = 1; i < 9; ++i) {
        a += coef[i] / (x + i);
    }
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

/// log of the volume of the Euclidean unit ball in R^n.
inline double log_unit_ball_volume(int n)
{
    return 0.5 * n * std::log(std::numbers::pi) - log_gamma(0.5 * n + 1.0);
}

inline double unit_ball_volume(int n) { return std::exp(log_unit_ball_volume(n)); }

} // namespace isohull
