#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lecam/function.hpp"
#include "lecam/laws.hpp"
#include "lecam/model.hpp"
#include "lecam/normal.hpp"
#include "lecam/quadrature.hpp"
#include "lecam/rng.hpp"
#include "lecam/simulate.hpp"

namespace lecam {

/// x - [x], with [x] the nearest integer and ties sent to the even one.
/// Result lies in [-0.5, 0.5].
inline double round_to_lattice(double x) { return x - std::nearbyint(x); }

inline std::vector<double> apply_round_kernel(std::span<const double> samples) {
    std::vector<double> out(samples.size());
    std::transform(samples.begin(), samples.end(), out.begin(), round_to_lattice);
    return out;
}

/// Law of X - [X] when X has law `d`, as a density on [-0.5, 0.5].
inline Density fold_density_to_lattice_cell(const Density& d) {
    Density out;
    out.lo = -0.5;
    out.hi = 0.5;
    auto add_folded = [&out](double x) {
        const double r = round_to_lattice(x);
        for (double c : {r - 1.0, r, r + 1.0}) {
            if (c >= -0.5 && c <= 0.5) out.breakpoints.push_back(c);
        }
    };

    if (d.mixture && d.mixture->integer_shifts()) {
        // Integer shifts vanish under folding: the result is W times the folded base Gaussian.
        const double mean = d.mixture->mean;
        const double sd = d.mixture->sd;
        const double weight = d.mixture->total_weight();
        const double reach = 12.0 * sd;
        for (double k : {0.0, 1.0, 3.0, 6.0}) {
            add_folded(mean - k * sd);
            add_folded(mean + k * sd);
        }
        out.eval = [mean, sd, weight, reach](double x) {
            const double l0 = std::ceil(mean - reach - x);
            const double l1 = std::floor(mean + reach - x);
            double acc = 0.0;
            for (double l = l0; l <= l1; l += 1.0) acc += normal::pdf(x + l, mean, sd);
            return weight * acc;
        };
    } else {
        auto base = std::make_shared<const Density>(d);
        for (double b : d.breakpoints) add_folded(b);
        add_folded(d.lo);
        add_folded(d.hi);
        out.eval = [base](double x) {
            const double l0 = std::ceil(base->lo - x);
            const double l1 = std::floor(base->hi - x);
            double acc = 0.0;
            for (double l = l0; l <= l1; l += 1.0) acc += (*base)(x + l);
            return acc;
        };
        std::map<double, double> folded_atoms;
        for (const auto& [loc, mass] : d.atoms) folded_atoms[round_to_lattice(loc)] += mass;
        out.atoms.assign(folded_atoms.begin(), folded_atoms.end());
    }
    out.breakpoints.push_back(-0.5);
    out.breakpoints.push_back(0.5);
    std::sort(out.breakpoints.begin(), out.breakpoints.end());
    out.breakpoints.erase(std::unique(out.breakpoints.begin(), out.breakpoints.end()),
                          out.breakpoints.end());
    return out;
}

/// Parameters of the truncate-and-resample kernel for one increment.
struct TruncateResampleParams {
    double L = 0.0;
    double epsilon = 0.5;
    double sigma_i = 1.0;

    /// Radius of the closed ball kept unchanged: L + sigma_i^{1 - epsilon}.
    double beta() const { return L + std::pow(sigma_i, 1.0 - epsilon); }

    void validate() const {
        if (!(L >= 0.0)) throw std::invalid_argument("truncate kernel: L must be nonnegative");
        if (!(epsilon > 0.0 && epsilon < 1.0)) {
            throw std::invalid_argument("truncate kernel: epsilon must lie in (0, 1)");
        }
        if (!(sigma_i > 0.0)) throw std::invalid_argument("truncate kernel: sigma_i must be positive");
    }
};

/// x itself when |x| <= beta, otherwise a fresh N(0, sigma_i^2) draw.
/// The identity branch consumes no randomness.
inline double truncate_resample(double x, const TruncateResampleParams& params, RngStream& rng) {
    if (std::abs(x) <= params.beta()) return x;
    return params.sigma_i * std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Law of the truncate-and-resample kernel output when the input has law `d`.
inline Density truncate_resample_pushforward(const Density& d, const TruncateResampleParams& params) {
    params.validate();
    const double beta = params.beta();
    const double sd = params.sigma_i;
    double outside = 0.0;
    if (d.mixture) {
        for (const auto& [shift, w] : d.mixture->components) {
            outside += w * (1.0 - normal::interval_mass(-beta, beta, d.mixture->mean + shift,
                                                        d.mixture->sd));
        }
    } else {
        QuadratureOptions opts;
        opts.abs_tol = 1e-12;
        outside += integrate(d.eval, d.lo, std::min(-beta, d.hi), d.breakpoints, opts,
                             "mass below the truncation ball")
                       .value;
        outside += integrate(d.eval, std::max(beta, d.lo), d.hi, d.breakpoints, opts,
                             "mass above the truncation ball")
                       .value;
    }
    for (const auto& [loc, mass] : d.atoms) {
        if (std::abs(loc) > beta) outside += mass;
    }
    Density out;
    auto base = std::make_shared<const Density>(d);
    out.eval = [base, beta, sd, outside](double x) {
        const double kept = (std::abs(x) <= beta) ? (*base)(x) : 0.0;
        return kept + outside * normal::pdf(x, 0.0, sd);
    };
    out.lo = std::min(std::max(d.lo, -beta), -12.0 * sd);
    out.hi = std::max(std::min(d.hi, beta), 12.0 * sd);
    out.breakpoints = d.breakpoints;
    for (double b : {-beta, beta, 0.0, -sd, sd, -3.0 * sd, 3.0 * sd}) out.breakpoints.push_back(b);
    std::sort(out.breakpoints.begin(), out.breakpoints.end());
    for (const auto& a : d.atoms) {
        if (std::abs(a.first) <= beta) out.atoms.push_back(a);
    }
    return out;
}

/// The transferred procedure: rounds each increment of the discrete sample
/// (X_{t_0}, ..., X_{t_n}) to the lattice cell and hands the result to `delta`.
template <class Delta>
auto transfer_estimator(const Delta& delta, std::span<const double> observations,
                        std::size_t expected_n) {
    if (observations.size() != expected_n + 1) {
        std::ostringstream msg;
        msg << "transfer_estimator: expected " << expected_n + 1 << " observations, got "
            << observations.size();
        throw std::invalid_argument(msg.str());
    }
    std::vector<double> z(expected_n);
    for (std::size_t i = 0; i < expected_n; ++i) {
        z[i] = round_to_lattice(observations[i + 1] - observations[i]);
    }
    return delta(std::span<const double>(z));
}

template <class Delta>
auto transfer_estimator(const Delta& delta, std::span<const double> observations) {
    if (observations.size() < 2) {
        throw std::invalid_argument("transfer_estimator: need at least two observations");
    }
    return transfer_estimator(delta, observations, observations.size() - 1);
}

/// Increments with the recorded jumps removed.
inline std::vector<double> continuous_part(const PathSample& path) {
    std::vector<double> out = path.increments;
    for (std::size_t k = 0; k < path.jump_sizes.size(); ++k) {
        out[path.jump_intervals[k]] -= path.jump_sizes[k];
    }
    return out;
}

namespace detail {

inline double inverse_variance_integral(const RealFunction& sigma_n2, double a, double b,
                                        std::size_t i) {
    auto inv = [&](double t) {
        const double v = sigma_n2(t);
        if (!(v > 0.0)) {
            std::ostringstream msg;
            msg << "sigma_n^2 must be positive, got " << v << " at t = " << t;
            throw std::invalid_argument(msg.str());
        }
        return 1.0 / v;
    };
    if (sigma_n2.shape() == FunctionShape::constant) return (b - a) * inv(a);
    std::ostringstream label;
    label << "1/sigma_n^2 on interval " << i << " [" << a << ", " << b << "]";
    return integrate(inv, a, b, {}, {}, label.str()).value;
}

}  // namespace detail

/// xi in [a, b] with \int_a^b dt / sigma_n^2 = (b - a) / sigma_n^2(xi), by bisection.
inline double mean_value_point(const RealFunction& sigma_n2, double a, double b) {
    const double target = (b - a) / detail::inverse_variance_integral(sigma_n2, a, b, 0);
    auto g = [&](double t) { return sigma_n2(t) - target; };
    // Locate a sign change on a coarse scan, then bisect.
    constexpr int scan = 64;
    double lo = a;
    double glo = g(a);
    if (glo == 0.0) return a;
    for (int j = 1; j <= scan; ++j) {
        const double hi = a + (b - a) * j / scan;
        const double ghi = g(hi);
        if (ghi == 0.0) return hi;
        if ((glo < 0.0) != (ghi < 0.0)) {
            double l = lo;
            double h = hi;
            for (int it = 0; it < 200 && h - l > 1e-15 * std::max(1.0, std::abs(h)); ++it) {
                const double mid = 0.5 * (l + h);
                if ((g(mid) < 0.0) == (glo < 0.0)) {
                    l = mid;
                } else {
                    h = mid;
                }
            }
            return 0.5 * (l + h);
        }
        lo = hi;
        glo = ghi;
    }
    // No sign change on the scan: sigma_n^2 is (numerically) constant.
    return 0.5 * (a + b);
}

/// Increment i divided by sigma_n^2(xi_i), where xi_i is the mean-value point
/// of \int dt / sigma_n^2 over interval i.
inline std::vector<double> weighted_integral_statistic(std::span<const double> increments,
                                                       const RealFunction& sigma_n2,
                                                       const Grid& grid) {
    if (increments.size() != grid.size()) {
        throw std::invalid_argument("weighted_integral_statistic: length does not match grid");
    }
    std::vector<double> out(increments.size());
    for (std::size_t i = 0; i < increments.size(); ++i) {
        const double w = grid.width(i);
        const double inv = detail::inverse_variance_integral(sigma_n2, grid[i], grid[i + 1], i);
        out[i] = increments[i] * inv / w;  // 1 / sigma_n^2(xi_i) = inv / w
    }
    return out;
}

}  // namespace lecam
