#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lecam/errors.hpp"
#include "lecam/model.hpp"
#include "lecam/normal.hpp"
#include "lecam/quadrature.hpp"

namespace lecam {

/// sum_j w_j N(mean + shift_j, sd^2). Kept alongside the evaluation callback
/// so lattice folding can be done component-wise without cancellation.
struct GaussianMixture {
    double mean = 0.0;
    double sd = 1.0;
    std::vector<std::pair<double, double>> components;  // (shift, weight)

    double operator()(double x) const {
        double acc = 0.0;
        for (const auto& [shift, w] : components) acc += w * normal::pdf(x, mean + shift, sd);
        return acc;
    }

    double total_weight() const {
        double w = 0.0;
        for (const auto& c : components) w += c.second;
        return w;
    }

    bool integer_shifts() const {
        return std::all_of(components.begin(), components.end(),
                           [](const auto& c) { return c.first == std::nearbyint(c.first); });
    }
};

/// A 1-D law: an absolutely continuous part with density `eval` supported
/// (up to mass 1e-12) on [lo, hi], plus optional point masses.
struct Density {
    std::function<double(double)> eval;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::pair<double, double>> atoms;  // (location, mass)
    /// Peaks and kinks; quadrature cuts here first.
    std::vector<double> breakpoints;
    std::optional<GaussianMixture> mixture;

    double operator()(double x) const { return (x < lo || x > hi) ? 0.0 : eval(x); }

    double atom_mass() const {
        double m = 0.0;
        for (const auto& a : atoms) m += a.second;
        return m;
    }

    /// Continuous mass by quadrature plus atom masses.
    double total_mass(double abs_tol = 1e-11) const {
        QuadratureOptions opts;
        opts.abs_tol = abs_tol;
        return integrate(eval, lo, hi, breakpoints, opts, "density mass").value + atom_mass();
    }
};

namespace detail {

inline void add_peak_breakpoints(std::vector<double>& out, double center, double sd) {
    for (double k : {0.0, 1.0, 3.0, 6.0, 9.0}) {
        out.push_back(center - k * sd);
        out.push_back(center + k * sd);
    }
}

inline Density mixture_density(GaussianMixture mix) {
    Density d;
    double lo_shift = 0.0;
    double hi_shift = 0.0;
    bool first = true;
    for (const auto& [shift, w] : mix.components) {
        lo_shift = first ? shift : std::min(lo_shift, shift);
        hi_shift = first ? shift : std::max(hi_shift, shift);
        first = false;
        add_peak_breakpoints(d.breakpoints, mix.mean + shift, mix.sd);
    }
    d.lo = mix.mean + lo_shift - 12.0 * mix.sd;
    d.hi = mix.mean + hi_shift + 12.0 * mix.sd;
    std::sort(d.breakpoints.begin(), d.breakpoints.end());
    d.breakpoints.erase(std::unique(d.breakpoints.begin(), d.breakpoints.end()),
                        d.breakpoints.end());
    auto shared = std::make_shared<const GaussianMixture>(mix);
    d.eval = [shared](double x) { return (*shared)(x); };
    d.mixture = std::move(mix);
    return d;
}

/// Poisson(lambda) probabilities p_0..p_K with K the smallest index whose
/// upper tail P(N > K) is below tail_tol.
inline std::vector<double> poisson_truncated(double lambda, double tail_tol) {
    constexpr std::size_t k_max = 200;
    if (lambda == 0.0) return {1.0};
    std::vector<double> p{std::exp(-lambda)};
    double cdf = p[0];
    for (std::size_t K = 0; K <= k_max; ++K) {
        if (1.0 - cdf < tail_tol) return p;
        p.push_back(p.back() * lambda / static_cast<double>(K + 1));
        cdf += p.back();
    }
    std::ostringstream msg;
    msg << "Poisson series for lambda = " << lambda << " needs more than " << k_max
        << " terms; intensity too large for the series method";
    throw NumericalError(msg.str());
}

/// Density of the k-fold convolution of a continuous jump law, tabulated on
/// an equispaced grid and linearly interpolated.
struct ConvolutionTable {
    double y0 = 0.0;
    double dy = 0.0;
    std::vector<double> values;

    double span_lo() const { return y0; }
    double span_hi() const { return y0 + dy * static_cast<double>(values.size() - 1); }

    /// (table * N(0, sd^2))(x), exact for the piecewise-linear interpolant.
    double smoothed(double x, double sd) const {
        const double reach = 12.0 * sd;
        const auto last = static_cast<long>(values.size()) - 1;
        long j0 = static_cast<long>(std::floor((x - reach - y0) / dy));
        long j1 = static_cast<long>(std::ceil((x + reach - y0) / dy));
        j0 = std::clamp(j0, 0L, last);
        j1 = std::clamp(j1, 0L, last);
        double acc = 0.0;
        for (long j = j0; j < j1; ++j) {
            const double a0 = y0 + dy * static_cast<double>(j);
            const double v0 = values[static_cast<std::size_t>(j)];
            const double v1 = values[static_cast<std::size_t>(j + 1)];
            const double b = (v1 - v0) / dy;
            const double a = v0 - b * a0;  // g(y) = a + b y on the segment
            const double z0 = (a0 - x) / sd;
            const double z1 = (a0 + dy - x) / sd;
            acc += (a + b * x) * (normal::cdf(z1) - normal::cdf(z0)) +
                   b * sd * (normal::pdf(z0) - normal::pdf(z1));
        }
        return std::max(acc, 0.0);
    }
};

/// Tables for G^{*1}, ..., G^{*K} on a common node spacing.
inline std::vector<ConvolutionTable> convolution_powers(const JumpLaw& law, std::size_t K,
                                                        std::size_t nodes_per_unit_support = 4096) {
    std::vector<ConvolutionTable> out;
    if (K == 0) return out;
    const double lo = law.lo();
    const double hi = law.hi();
    const double dy = (hi - lo) / static_cast<double>(nodes_per_unit_support);
    ConvolutionTable base;
    base.y0 = lo;
    base.dy = dy;
    base.values.resize(nodes_per_unit_support + 1);
    for (std::size_t j = 0; j <= nodes_per_unit_support; ++j) {
        // Cell averages keep jump discontinuities at the support ends from biasing the mass.
        const double y = lo + dy * static_cast<double>(j);
        const double a = std::max(lo, y - 0.5 * dy);
        const double b = std::min(hi, y + 0.5 * dy);
        base.values[j] = law.mass(a, b) / dy;
    }
    auto normalise = [](ConvolutionTable& t) {
        double mass = 0.0;
        for (std::size_t j = 0; j + 1 < t.values.size(); ++j) {
            mass += 0.5 * (t.values[j] + t.values[j + 1]) * t.dy;
        }
        if (mass > 0.0) {
            for (double& v : t.values) v /= mass;
        }
    };
    normalise(base);
    out.push_back(base);
    for (std::size_t k = 2; k <= K; ++k) {
        const ConvolutionTable& prev = out.back();
        ConvolutionTable next;
        next.y0 = prev.y0 + base.y0;
        next.dy = dy;
        next.values.assign(prev.values.size() + base.values.size() - 1, 0.0);
        for (std::size_t i = 0; i < prev.values.size(); ++i) {
            const double wi = prev.values[i] * dy;
            if (wi == 0.0) continue;
            for (std::size_t j = 0; j < base.values.size(); ++j) {
                next.values[i + j] += wi * base.values[j];
            }
        }
        normalise(next);
        out.push_back(std::move(next));
    }
    return out;
}

/// Table resolution for smoothing with N(0, sd^2): 32 nodes per sd, within [512, 4096].
inline std::size_t table_nodes(const JumpLaw& law, double sd) {
    const double nodes = std::ceil(32.0 * (law.hi() - law.lo()) / sd);
    return static_cast<std::size_t>(std::clamp(nodes, 512.0, 4096.0));
}

/// pmf^{*k} on Z for a lattice pmf.
inline std::map<long, double> lattice_convolve(const std::map<long, double>& a,
                                               const std::map<long, double>& b) {
    std::map<long, double> out;
    for (const auto& [i, p] : a) {
        for (const auto& [j, q] : b) out[i + j] += p * q;
    }
    return out;
}

}  // namespace detail

/// N(m, s2) with support m +- 12 sd.
inline Density gaussian_density(double m, double s2) {
    if (!(s2 > 0.0)) throw std::invalid_argument("gaussian_density: variance must be positive");
    GaussianMixture mix;
    mix.mean = m;
    mix.sd = std::sqrt(s2);
    mix.components = {{0.0, 1.0}};
    return detail::mixture_density(std::move(mix));
}

/// Law of one increment: N(m_i, sigma_i^2) convolved with the compound
/// Poisson sum of Poisson(lambda_i) jumps from `law`. The Poisson series is
/// truncated once its tail drops below `tail_tol`.
inline Density increment_density_exact(const IncrementSummary& s, const JumpLaw& law,
                                       double tail_tol = 1e-12) {
    const std::vector<double> p = detail::poisson_truncated(s.lambda, tail_tol);
    const std::size_t K = p.size() - 1;
    const double sd = s.sigma();

    if (!law.is_continuous()) {
        GaussianMixture mix;
        mix.mean = s.m;
        mix.sd = sd;
        if (law.on_integer_lattice()) {
            const auto pmf = law.lattice_pmf();
            std::map<long, double> total{{0, p[0]}};
            std::map<long, double> power{{0, 1.0}};
            for (std::size_t k = 1; k <= K; ++k) {
                power = detail::lattice_convolve(power, pmf);
                for (const auto& [j, q] : power) total[j] += p[k] * q;
            }
            for (const auto& [j, w] : total) mix.components.emplace_back(static_cast<double>(j), w);
        } else {
            for (std::size_t k = 0; k <= K; ++k) {
                mix.components.emplace_back(static_cast<double>(k) * law.point(), p[k]);
            }
        }
        return detail::mixture_density(std::move(mix));
    }

    if (law.family() == JumpLaw::Family::gaussian) {
        // k jumps: N(m + k mu, sigma^2 + k s^2); a mixture with varying widths.
        const double mu = law.gaussian_mean();
        const double js = law.gaussian_sd();
        auto terms = std::make_shared<std::vector<std::array<double, 3>>>();  // (weight, mean, sd)
        Density d;
        d.lo = s.m - 12.0 * sd;
        d.hi = s.m + 12.0 * sd;
        for (std::size_t k = 0; k <= K; ++k) {
            const double kk = static_cast<double>(k);
            const double mean = s.m + kk * mu;
            const double sdk = std::sqrt(s.sigma2 + kk * js * js);
            terms->push_back({p[k], mean, sdk});
            d.lo = std::min(d.lo, mean - 12.0 * sdk);
            d.hi = std::max(d.hi, mean + 12.0 * sdk);
            detail::add_peak_breakpoints(d.breakpoints, mean, sdk);
        }
        d.eval = [terms](double x) {
            double acc = 0.0;
            for (const auto& t : *terms) acc += t[0] * normal::pdf(x, t[1], t[2]);
            return acc;
        };
        return d;
    }

    // Uniform and custom jumps: closed form for one uniform jump, tables otherwise.
    const bool uniform = law.family() == JumpLaw::Family::uniform;
    const std::size_t first_tabulated = uniform ? 2 : 1;
    auto tables = std::make_shared<std::vector<detail::ConvolutionTable>>();
    if (K >= first_tabulated) *tables = detail::convolution_powers(law, K, detail::table_nodes(law, sd));
    auto weights = std::make_shared<std::vector<double>>(p);
    Density d;
    d.lo = s.m + std::min(0.0, static_cast<double>(K) * law.lo()) - 12.0 * sd;
    d.hi = s.m + std::max(0.0, static_cast<double>(K) * law.hi()) + 12.0 * sd;
    detail::add_peak_breakpoints(d.breakpoints, s.m, sd);
    for (std::size_t k = 1; k <= K; ++k) {
        for (double kink : law.kinks()) {
            detail::add_peak_breakpoints(d.breakpoints, s.m + static_cast<double>(k) * kink, sd);
        }
    }
    const double m = s.m;
    d.eval = [tables, weights, law, m, sd, first_tabulated](double x) {
        double acc = (*weights)[0] * normal::pdf(x, m, sd);
        for (std::size_t k = 1; k < weights->size(); ++k) {
            const double w = (*weights)[k];
            if (k < first_tabulated) {
                acc += w * law.smoothed_density(x - m, sd);
            } else {
                acc += w * (*tables)[k - 1].smoothed(x - m, sd);
            }
        }
        return acc;
    };
    return d;
}

/// (1 - alpha_i) N(m_i, sigma_i^2) + alpha_i (N(m_i, sigma_i^2) * G).
inline Density bernoulli_density(const IncrementSummary& s, const JumpLaw& law) {
    const double a = s.alpha;
    const double sd = s.sigma();
    if (!law.is_continuous()) {
        GaussianMixture mix;
        mix.mean = s.m;
        mix.sd = sd;
        mix.components.emplace_back(0.0, 1.0 - a);
        if (a > 0.0 && law.on_integer_lattice()) {
            for (const auto& [shift, w] : law.lattice_pmf()) {
                mix.components.emplace_back(static_cast<double>(shift), a * w);
            }
        } else if (a > 0.0) {
            mix.components.emplace_back(law.point(), a);
        }
        return detail::mixture_density(std::move(mix));
    }
    Density d;
    d.lo = s.m - 12.0 * sd;
    d.hi = s.m + 12.0 * sd;
    detail::add_peak_breakpoints(d.breakpoints, s.m, sd);
    std::shared_ptr<detail::ConvolutionTable> table;
    if (a > 0.0) {
        d.lo = std::min(d.lo, s.m + law.lo() - 12.0 * sd);
        d.hi = std::max(d.hi, s.m + law.hi() + 12.0 * sd);
        for (double kink : law.kinks()) detail::add_peak_breakpoints(d.breakpoints, s.m + kink, sd);
        if (law.family() == JumpLaw::Family::custom) {
            table = std::make_shared<detail::ConvolutionTable>(detail::convolution_powers(law, 1, detail::table_nodes(law, sd))[0]);
        }
    }
    const double m = s.m;
    d.eval = [law, a, m, sd, table](double x) {
        double v = (1.0 - a) * normal::pdf(x, m, sd);
        if (a > 0.0) v += a * (table ? table->smoothed(x - m, sd) : law.smoothed_density(x - m, sd));
        return v;
    };
    return d;
}

/// exp(i u m_i - u^2 sigma_i^2 / 2 + lambda_i (cf_G(u) - 1)).
inline std::complex<double> increment_cf(const IncrementSummary& s, const JumpLaw& law, double u) {
    using namespace std::complex_literals;
    return std::exp(1i * (u * s.m) - 0.5 * u * u * s.sigma2 + s.lambda * (law.cf(u) - 1.0));
}

}  // namespace lecam
