#pragma once

#include <cmath>
#include <numbers>

// Standard normal density and distribution function. The CDF goes through
// erfc so lower-tail values keep full relative accuracy down to underflow.
namespace lecam::normal {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267793994605993438;

inline double pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

inline double pdf(double x, double mean, double sd) {
    return pdf((x - mean) / sd) / sd;
}

inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double cdf(double x, double mean, double sd) { return cdf((x - mean) / sd); }

/// P(a <= X <= b) for X ~ N(mean, sd^2), computed on the side that avoids cancellation.
inline double interval_mass(double a, double b, double mean, double sd) {
    const double za = (a - mean) / sd;
    const double zb = (b - mean) / sd;
    if (za > 0.0) return cdf(-za) - cdf(-zb);
    return cdf(zb) - cdf(za);
}

}  // namespace lecam::normal
