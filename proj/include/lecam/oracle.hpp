#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "lecam/laws.hpp"
#include "lecam/quadrature.hpp"

// Distances between two laws computed directly from their densities by
// adaptive quadrature; no closed-form distance formula is used here.
namespace lecam {

namespace detail {

struct PairLayout {
    double lo;
    double hi;
    std::vector<double> breakpoints;
    std::map<double, std::pair<double, double>> atoms;  // location -> (mass in p, mass in q)
};

inline PairLayout pair_layout(const Density& p, const Density& q) {
    PairLayout out{std::min(p.lo, q.lo), std::max(p.hi, q.hi), {}, {}};
    out.breakpoints.reserve(p.breakpoints.size() + q.breakpoints.size() + 4);
    out.breakpoints.insert(out.breakpoints.end(), p.breakpoints.begin(), p.breakpoints.end());
    out.breakpoints.insert(out.breakpoints.end(), q.breakpoints.begin(), q.breakpoints.end());
    for (double b : {p.lo, p.hi, q.lo, q.hi}) out.breakpoints.push_back(b);
    std::sort(out.breakpoints.begin(), out.breakpoints.end());
    out.breakpoints.erase(std::unique(out.breakpoints.begin(), out.breakpoints.end()),
                          out.breakpoints.end());
    for (const auto& [x, m] : p.atoms) out.atoms[x].first += m;
    for (const auto& [x, m] : q.atoms) out.atoms[x].second += m;
    return out;
}

inline QuadratureOptions oracle_options() {
    QuadratureOptions opts;
    opts.abs_tol = 1e-10;
    opts.max_segments = 50000;
    return opts;
}

}  // namespace detail

/// \int |p - q| plus the L1 distance between the atom parts.
inline double l1_quadrature(const Density& p, const Density& q) {
    const auto layout = detail::pair_layout(p, q);
    double value = integrate([&](double x) { return std::abs(p(x) - q(x)); }, layout.lo, layout.hi,
                             layout.breakpoints, detail::oracle_options(), "|p - q|")
                       .value;
    for (const auto& [x, m] : layout.atoms) value += std::abs(m.first - m.second);
    return value;
}

/// Half the L1 distance.
inline double tv_quadrature(const Density& p, const Density& q) { return 0.5 * l1_quadrature(p, q); }

/// sqrt(\int (sqrt p - sqrt q)^2 + sum over atoms (sqrt a - sqrt b)^2).
inline double hellinger_quadrature(const Density& p, const Density& q) {
    const auto layout = detail::pair_layout(p, q);
    double value = integrate(
                       [&](double x) {
                           const double d = std::sqrt(std::max(p(x), 0.0)) -
                                            std::sqrt(std::max(q(x), 0.0));
                           return d * d;
                       },
                       layout.lo, layout.hi, layout.breakpoints, detail::oracle_options(),
                       "(sqrt p - sqrt q)^2")
                       .value;
    for (const auto& [x, m] : layout.atoms) {
        const double d = std::sqrt(m.first) - std::sqrt(m.second);
        value += d * d;
    }
    return std::sqrt(std::max(value, 0.0));
}

}  // namespace lecam
