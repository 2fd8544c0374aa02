#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lecam/function.hpp"
#include "lecam/kernels.hpp"
#include "lecam/model.hpp"
#include "lecam/normal.hpp"
#include "lecam/quadrature.hpp"

namespace lecam {

/// Per-increment bound terms and their aggregate.
struct BoundReport {
    std::vector<double> per_increment;
    double aggregate = 0.0;
    std::string formula_name;
    std::vector<std::string> warnings;

    /// aggregate >= 1: the bound says nothing about a total-variation distance.
    bool vacuous() const { return aggregate >= 1.0; }
    double clamped() const { return std::min(aggregate, 1.0); }
};

namespace detail {

inline void require_positive_sd(double s, const char* name) {
    if (!(s > 0.0)) {
        std::ostringstream msg;
        msg << name << " must be positive, got " << s;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace detail

/// sqrt((1 - s/S)^2 + (mu1 - mu2)^2 / (2 S^2)) with s, S the smaller and larger SD.
inline double tv_gaussians_bound(double mu1, double sigma1, double mu2, double sigma2) {
    detail::require_positive_sd(sigma1, "sigma1");
    detail::require_positive_sd(sigma2, "sigma2");
    const double s = std::min(sigma1, sigma2);
    const double S = std::max(sigma1, sigma2);
    const double r = 1.0 - s / S;
    const double d = mu1 - mu2;
    return std::sqrt(r * r + d * d / (2.0 * S * S));
}

inline double clamp_tv(double value) { return std::clamp(value, 0.0, 1.0); }

/// ln(sigma2/sigma1) + (sigma1^2/sigma2^2 - 1)/2 + (mu1 - mu2)^2 / (2 sigma1^2).
/// The mean term is scaled by the first argument's variance; this is the
/// form used in the Gaussian TV estimate, oriented with sigma1 >= sigma2.
inline double kl_gaussians(double mu1, double sigma1, double mu2, double sigma2) {
    detail::require_positive_sd(sigma1, "sigma1");
    detail::require_positive_sd(sigma2, "sigma2");
    const double ratio = sigma1 / sigma2;
    const double d = mu1 - mu2;
    return std::log(sigma2 / sigma1) + 0.5 * (ratio * ratio - 1.0) + d * d / (2.0 * sigma1 * sigma1);
}

/// L1 distance between N(mu1, sigma^2) and N(mu2, sigma^2): 2(1 - 2 Phi(-|mu2 - mu1| / (2 sigma))).
inline double l1_gaussians_same_var(double mu1, double mu2, double sigma) {
    detail::require_positive_sd(sigma, "sigma");
    return 2.0 * (1.0 - 2.0 * normal::cdf(-std::abs(mu2 - mu1) / (2.0 * sigma)));
}

/// L1 distance between the laws on [0, t] of two Gaussian processes with
/// drifts m1, m2 and common diffusion sigma: 2(1 - 2 Phi(-D/2)) with
/// D^2 = \int_0^t (m1 - m2)^2 / sigma^2.
inline double l1_gaussian_processes(const RealFunction& m1, const RealFunction& m2,
                                    const RealFunction& sigma, double t,
                                    std::span<const double> breakpoints = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("l1_gaussian_processes: t must be positive");
    QuadratureOptions opts;
    opts.abs_tol = 1e-12;
    opts.max_segments = 20000;
    const double d2 = integrate(
                          [&](double s) {
                              const double diff = m1(s) - m2(s);
                              const double sd = sigma(s);
                              return diff * diff / (sd * sd);
                          },
                          0.0, t, breakpoints, opts, "(m1 - m2)^2 / sigma^2")
                          .value;
    const double D = std::sqrt(std::max(d2, 0.0));
    return 2.0 * (1.0 - 2.0 * normal::cdf(-D / 2.0));
}

/// sqrt(sum 2 TV_i): total-variation bound for product measures from per-factor TVs.
inline double hellinger_product_tv_bound(std::span<const double> per_increment_tv) {
    double acc = 0.0;
    for (double tv : per_increment_tv) {
        if (!(tv >= 0.0 && tv <= 1.0)) {
            std::ostringstream msg;
            msg << "per-increment TV must lie in [0, 1], got " << tv;
            throw std::invalid_argument(msg.str());
        }
        acc += 2.0 * tv;
    }
    return std::sqrt(acc);
}

/// Per increment 2 lambda_i^2; aggregate 2 sqrt(sum lambda_i^2).
inline BoundReport bernoulli_aggregate_bound(const IncrementSummaries& summaries) {
    BoundReport r;
    r.formula_name = "bernoulli";
    double acc = 0.0;
    for (const auto& s : summaries) {
        r.per_increment.push_back(2.0 * s.lambda * s.lambda);
        acc += s.lambda * s.lambda;
    }
    r.aggregate = 2.0 * std::sqrt(acc);
    return r;
}

/// (6/sigma) phi(1/(6 sigma)) + 4 Phi(-1/(6 sigma)).
inline double rounding_kernel_term(double sigma) {
    detail::require_positive_sd(sigma, "sigma_i");
    const double z = 1.0 / (6.0 * sigma);
    return 6.0 / sigma * normal::pdf(z) + 4.0 * normal::cdf(-z);
}

/// Rounding-kernel bound; aggregate sqrt(2 sum per_increment).
/// Increments with |m_i| > 1/3 are outside the bound's hypotheses and get a warning.
inline BoundReport discrete_kernel_aggregate_bound(const IncrementSummaries& summaries) {
    BoundReport r;
    r.formula_name = "rounding_kernel";
    double acc = 0.0;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        if (std::abs(s.m) > 1.0 / 3.0) {
            std::ostringstream msg;
            msg << "interval " << i << ": |m_i| = " << std::abs(s.m)
                << " exceeds 1/3, bound not guaranteed";
            r.warnings.push_back(msg.str());
        }
        const double term = rounding_kernel_term(s.sigma());
        r.per_increment.push_back(term);
        acc += term;
    }
    r.aggregate = std::sqrt(2.0 * acc);
    if (r.vacuous()) r.warnings.push_back("aggregate bound is at least 1 (vacuous)");
    return r;
}

/// 8 Phi(-sigma^{-eps}) + alpha |m| / (sqrt(2) sigma) + 2 alpha \int_{-2 beta}^{2 beta} h,
/// beta = L + sigma^{1 - eps}.
inline double truncate_kernel_term(const IncrementSummary& s, double L, double epsilon,
                                   const JumpLaw& law) {
    const double sigma = s.sigma();
    const double beta = L + std::pow(sigma, 1.0 - epsilon);
    return 8.0 * normal::cdf(-std::pow(sigma, -epsilon)) +
           s.alpha * std::abs(s.m) / (std::numbers::sqrt2 * sigma) +
           2.0 * s.alpha * law.mass(-2.0 * beta, 2.0 * beta);
}

/// Truncate-and-resample kernel bound; aggregate sqrt(2 sum per_increment).
inline BoundReport continuous_kernel_aggregate_bound(const IncrementSummaries& summaries, double L,
                                                     double epsilon, const JumpLaw& law) {
    if (!law.is_continuous()) {
        throw std::invalid_argument("truncate kernel bound needs a continuous jump law");
    }
    TruncateResampleParams{L, epsilon, 1.0}.validate();
    BoundReport r;
    r.formula_name = "truncate_kernel";
    double acc = 0.0;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        if (std::abs(s.m) > L) {
            std::ostringstream msg;
            msg << "interval " << i << ": |m_i| = " << std::abs(s.m) << " exceeds L = " << L;
            throw std::invalid_argument(msg.str());
        }
        const double term = truncate_kernel_term(s, L, epsilon, law);
        r.per_increment.push_back(term);
        acc += term;
    }
    r.aggregate = std::sqrt(2.0 * acc);
    if (r.vacuous()) r.warnings.push_back("aggregate bound is at least 1 (vacuous)");
    return r;
}

/// \int_0^T (f - f_n)^2 / sigma_n^2 with f_n the grid step function of f.
inline double drift_discretization_error(const RealFunction& f, const ModelSpec& spec,
                                         const Grid& grid) {
    const RealFunction fn = piecewise_drift(f, grid);
    QuadratureOptions opts;
    opts.abs_tol = 1e-12;
    opts.max_segments = std::max<std::size_t>(20000, 8 * grid.size());
    return integrate(
               [&](double t) {
                   const double d = f(t) - fn(t);
                   const double s = spec.sigma_n(t);
                   return d * d / (s * s);
               },
               0.0, grid.horizon(), grid.times(), opts, "(f - f_n)^2 / sigma_n^2")
        .value;
}

enum class JumpCase { lattice, continuous };

/// Rate shape with constants suppressed:
/// lattice    sqrt(Delta) + T Delta^{2 alpha} eps^{-2} + T Delta,
/// continuous Delta^{1/4} + T Delta^{2 alpha} eps^{-2} + T Delta.
inline double theorem_rate(double delta_n, double T_n, double epsilon_n,
                           const HolderClassParams& holder, JumpCase jump_case) {
    if (!(delta_n > 0.0 && T_n > 0.0 && epsilon_n > 0.0)) {
        throw std::invalid_argument("theorem_rate: inputs must be positive");
    }
    const double lead = jump_case == JumpCase::lattice ? std::sqrt(delta_n) : std::pow(delta_n, 0.25);
    return lead + T_n * std::pow(delta_n, 2.0 * holder.alpha) / (epsilon_n * epsilon_n) +
           T_n * delta_n;
}

/// Bound on the TV distance between continuously observed white noise and
/// its discretely observed increments: half the process L1 distance between
/// drifts f and f_n, plus the product-Hellinger bound between the step-drift
/// increment laws N(f(t_i) w_i, sigma_n^2(xi_i) w_i) and N(m_i, sigma_i^2).
/// Each factor uses H^2 <= (1 - S/s)^2 + (mu1 - mu2)^2 / (2 s^2), s <= S the SDs.
inline double gaussian_reduction_bound(const ModelSpec& spec, const Grid& grid,
                                       const IncrementSummaries& summaries) {
    const RealFunction fn = piecewise_drift(spec.drift, grid);
    const RealFunction sigma_n([&spec](double t) { return spec.sigma_n(t); });
    const double process = 0.5 * l1_gaussian_processes(spec.drift, fn, sigma_n, grid.horizon(),
                                                       grid.times());
    const RealFunction s2 = spec.sigma_n2();
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.width(i);
        const double inv = detail::inverse_variance_integral(s2, grid[i], grid[i + 1], i);
        const double sd_step = w / std::sqrt(inv);  // sqrt(sigma_n^2(xi_i) w)
        const double mu_step = spec.drift(grid[i + 1]) * w;
        const double s = std::min(sd_step, summaries[i].sigma());
        const double S = std::max(sd_step, summaries[i].sigma());
        const double r = 1.0 - S / s;
        const double d = mu_step - summaries[i].m;
        acc += r * r + d * d / (2.0 * s * s);
    }
    return process + std::sqrt(acc);
}

}  // namespace lecam
