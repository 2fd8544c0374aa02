#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lecam/errors.hpp"
#include "lecam/function.hpp"
#include "lecam/model.hpp"
#include "lecam/rng.hpp"

namespace lecam {

/// Increments of one simulated path together with its jump record.
/// increments[i] = gaussian_parts[i] + sum of jump_sizes[k] over k with
/// jump_intervals[k] == i. jump_times is sorted ascending.
struct PathSample {
    std::vector<double> increments;
    std::vector<double> gaussian_parts;
    std::vector<double> jump_times;
    std::vector<double> jump_sizes;
    std::vector<std::size_t> jump_intervals;

    std::vector<std::size_t> jumps_per_interval() const {
        std::vector<std::size_t> out(increments.size(), 0);
        for (std::size_t k : jump_intervals) ++out[k];
        return out;
    }
};

/// 1.05 times the largest value of `intensity` on 4097 equispaced points of [0, horizon].
inline double dominating_rate(const RealFunction& intensity, double horizon) {
    constexpr int probes = 4097;
    double peak = 0.0;
    for (int j = 0; j < probes; ++j) {
        peak = std::max(peak, intensity(horizon * j / (probes - 1)));
    }
    return 1.05 * peak;
}

/// Jump times of a Poisson process with the given intensity on [0, horizon],
/// by thinning a homogeneous process of rate lambda_max.
inline std::vector<double> sample_inhomogeneous_poisson(const RealFunction& intensity,
                                                        double lambda_max, double horizon,
                                                        RngStream& rng) {
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
        throw std::invalid_argument("lambda_max must be finite and nonnegative");
    }
    std::vector<double> times;
    if (lambda_max == 0.0) return times;
    std::exponential_distribution<double> gap(lambda_max);
    double t = 0.0;
    while (true) {
        t += gap(rng);
        if (t > horizon) break;
        const double rate = intensity(t);
        if (rate > lambda_max) {
            std::ostringstream msg;
            msg << "intensity " << rate << " at t = " << t << " exceeds the dominating rate "
                << lambda_max;
            throw NumericalError(msg.str());
        }
        if (rng.uniform01() * lambda_max < rate) times.push_back(t);
    }
    return times;
}

/// One path of the jump-diffusion observed on `grid`. The continuous part of
/// each increment is drawn exactly from N(m_i, sigma_i^2).
inline PathSample sample_path(const ModelSpec& spec, const Grid& grid,
                              const IncrementSummaries& summaries, RngStream& rng) {
    const std::size_t n = grid.size();
    if (summaries.size() != n) throw std::invalid_argument("sample_path: summaries do not match grid");
    PathSample path;
    path.gaussian_parts.resize(n);
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        path.gaussian_parts[i] = summaries[i].m + summaries[i].sigma() * z(rng);
    }
    path.increments = path.gaussian_parts;
    const double lambda_max = dominating_rate(spec.intensity, grid.horizon());
    path.jump_times = sample_inhomogeneous_poisson(spec.intensity, lambda_max, grid.horizon(), rng);
    for (double t : path.jump_times) {
        const double y = spec.jump_law.sample(rng);
        const std::size_t i = grid.interval_containing(t);
        path.jump_sizes.push_back(y);
        path.jump_intervals.push_back(i);
        path.increments[i] += y;
    }
    return path;
}

/// Independent N(m_i, sigma_i^2) draws: increments of the white-noise model.
inline std::vector<double> sample_white_noise_increments(const IncrementSummaries& summaries,
                                                         RngStream& rng) {
    std::vector<double> out(summaries.size());
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = summaries[i].m + summaries[i].sigma() * z(rng);
    }
    return out;
}

inline std::vector<double> sample_white_noise_increments(const ModelSpec&, const Grid& grid,
                                                         const IncrementSummaries& summaries,
                                                         RngStream& rng) {
    if (summaries.size() != grid.size()) {
        throw std::invalid_argument("white noise: summaries do not match grid");
    }
    return sample_white_noise_increments(summaries, rng);
}

/// N(m_i, sigma_i^2) + B_i Y_i with B_i ~ Bernoulli(alpha_i) and Y_i ~ G.
inline std::vector<double> sample_bernoulli_approx(const JumpLaw& law,
                                                   const IncrementSummaries& summaries,
                                                   RngStream& rng) {
    std::vector<double> out(summaries.size());
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = summaries[i].m + summaries[i].sigma() * z(rng);
        if (rng.uniform01() < summaries[i].alpha) x += law.sample(rng);
        out[i] = x;
    }
    return out;
}

inline std::vector<double> sample_bernoulli_approx(const ModelSpec& spec, const Grid& grid,
                                                   const IncrementSummaries& summaries,
                                                   RngStream& rng) {
    if (summaries.size() != grid.size()) {
        throw std::invalid_argument("bernoulli approximation: summaries do not match grid");
    }
    return sample_bernoulli_approx(spec.jump_law, summaries, rng);
}

}  // namespace lecam
