#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "lecam/distances.hpp"
#include "lecam/kernels.hpp"
#include "lecam/laws.hpp"
#include "lecam/model.hpp"
#include "lecam/oracle.hpp"
#include "lecam/rng.hpp"
#include "lecam/simulate.hpp"

namespace lecam {

/// Worker count from LECAM_THREADS when set to a positive integer, else the hardware count.
inline std::size_t default_workers() {
    if (const char* env = std::getenv("LECAM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Each index is
/// handled exactly once; the first exception thrown is rethrown here.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Convergence sweep
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    std::size_t n = 0;
    double delta_n = 0.0;
    double aggregate_bound = 0.0;
    double oracle_product_bound = 0.0;
    double rate_prediction = 0.0;
};

struct ConvergenceOptions {
    JumpCase jump_case = JumpCase::lattice;
    HolderClassParams holder{};
    /// Bound on |m_i| for the truncate kernel; NaN means max_i |m_i| at each n.
    double L = std::numeric_limits<double>::quiet_NaN();
    double epsilon = 0.5;
    std::size_t workers = 0;  // 0: default_workers()
};

/// Per-increment oracle TV between the kernel-filtered jump increment and
/// the Gaussian increment N(m_i, sigma_i^2), split along the Bernoulli step:
/// TV(exact, bernoulli) + TV(K bernoulli, gaussian), capped at 1.
inline double increment_oracle_tv(const IncrementSummary& s, const JumpLaw& law, JumpCase jump_case,
                                  double L, double epsilon) {
    const Density exact = increment_density_exact(s, law);
    const Density bern = bernoulli_density(s, law);
    const Density gauss = gaussian_density(s.m, s.sigma2);
    double tv = tv_quadrature(exact, bern);
    if (jump_case == JumpCase::lattice) {
        tv += tv_quadrature(fold_density_to_lattice_cell(bern), gauss);
    } else {
        tv += tv_quadrature(truncate_resample_pushforward(bern, {L, epsilon, s.sigma()}), gauss);
    }
    return std::min(tv, 1.0);
}

inline std::vector<ConvergenceRow> run_convergence(const ModelSpec& spec,
                                                   const std::vector<std::size_t>& n_values,
                                                   const ConvergenceOptions& options = {}) {
    for (std::size_t k = 1; k < n_values.size(); ++k) {
        if (n_values[k] <= n_values[k - 1]) {
            throw std::invalid_argument("run_convergence: n values must be increasing");
        }
    }
    if (options.jump_case == JumpCase::lattice && !spec.jump_law.on_integer_lattice()) {
        throw std::invalid_argument("run_convergence: lattice case needs integer-valued jumps");
    }
    if (options.jump_case == JumpCase::continuous && !spec.jump_law.is_continuous()) {
        throw std::invalid_argument("run_convergence: continuous case needs a jump density");
    }
    const std::size_t workers = options.workers ? options.workers : default_workers();
    std::vector<ConvergenceRow> rows;
    for (std::size_t n : n_values) {
        const Grid grid = Grid::uniform(spec.horizon, n);
        const IncrementSummaries summaries = build_increment_summaries(spec, grid);
        const double L = std::isnan(options.L) ? summaries.max_abs_m() : options.L;

        std::vector<double> tv(n);
        parallel_for(n, workers, [&](std::size_t i) {
            tv[i] = increment_oracle_tv(summaries[i], spec.jump_law, options.jump_case, L,
                                        options.epsilon);
        });

        const BoundReport bern = bernoulli_aggregate_bound(summaries);
        const BoundReport kernel =
            options.jump_case == JumpCase::lattice
                ? discrete_kernel_aggregate_bound(summaries)
                : continuous_kernel_aggregate_bound(summaries, L, options.epsilon, spec.jump_law);
        ConvergenceRow row;
        row.n = n;
        row.delta_n = grid.mesh();
        row.aggregate_bound =
            bern.aggregate + kernel.aggregate + gaussian_reduction_bound(spec, grid, summaries);
        row.oracle_product_bound = hellinger_product_tv_bound(tv);
        row.rate_prediction =
            theorem_rate(row.delta_n, spec.horizon, spec.epsilon_n, options.holder, options.jump_case);
        rows.push_back(row);
    }
    return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 4) {
        throw std::invalid_argument("fit_rate_slope: need at least 4 rows");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) {
            throw std::invalid_argument("fit_rate_slope: values must be positive");
        }
        lx.push_back(std::log(x[k]));
        ly.push_back(std::log(y[k]));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    return sxy / sxx;
}

/// Slope of log(row.*column) against log(delta_n).
inline double fit_rate_slope(const std::vector<ConvergenceRow>& rows,
                             double ConvergenceRow::*column) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : rows) {
        x.push_back(r.delta_n);
        y.push_back(r.*column);
    }
    return fit_log_slope(x, y);
}

// ---------------------------------------------------------------------------
// Risk transfer
// ---------------------------------------------------------------------------

/// Drift estimator: maps the n increments on `grid` to one estimate per interval.
using DriftEstimator = std::function<std::vector<double>(std::span<const double>, const Grid&)>;

/// increment_i / width_i, then a centred moving average over ceil(n^{1/3}) intervals.
inline std::vector<double> moving_average_drift(std::span<const double> increments, const Grid& grid) {
    const std::size_t n = increments.size();
    if (n != grid.size()) throw std::invalid_argument("drift estimator: length does not match grid");
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = increments[i] / grid.width(i);
    const auto window = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
    const std::size_t before = (window - 1) / 2;
    const std::size_t after = window / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + raw[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i >= before ? i - before : 0;
        const std::size_t b = std::min(n, i + after + 1);
        out[i] = (prefix[b] - prefix[a]) / static_cast<double>(b - a);
    }
    return out;
}

/// Trapezoid rule on the grid nodes for \int (fhat - f)^2, where fhat is the
/// step function holding estimate i on [t_i, t_{i+1}) and the last value at T.
inline double integrated_squared_error(std::span<const double> estimate, const RealFunction& f,
                                       const Grid& grid) {
    const std::size_t n = grid.size();
    auto node_error = [&](std::size_t j) {
        const double d = estimate[std::min(j, n - 1)] - f(grid[j]);
        return d * d;
    };
    double acc = 0.0;
    double prev = node_error(0);
    for (std::size_t j = 1; j <= n; ++j) {
        const double cur = node_error(j);
        acc += 0.5 * (prev + cur) * grid.width(j - 1);
        prev = cur;
    }
    return acc;
}

struct RiskRow {
    std::size_t n = 0;
    double mise_direct_gaussian = 0.0;
    double mise_transferred = 0.0;
    double mise_naive_on_jumps = 0.0;
    std::size_t replications = 0;
    // Standard errors of the three Monte Carlo means.
    double se_direct_gaussian = 0.0;
    double se_transferred = 0.0;
    double se_naive_on_jumps = 0.0;
};

struct RiskOptions {
    std::size_t replications = 500;
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0: default_workers()
};

/// For each n: per replication, the estimator on white-noise increments, the
/// transferred estimator on a jump path, and the estimator on the raw jump
/// increments of that same path. Rows are reduced in replication order.
inline std::vector<RiskRow> run_risk_transfer(const ModelSpec& spec, const DriftEstimator& delta,
                                              const std::vector<std::size_t>& n_values,
                                              const RiskOptions& options) {
    if (options.replications == 0) throw std::invalid_argument("risk transfer: replications must be positive");
    if (!spec.jump_law.on_integer_lattice()) {
        throw std::invalid_argument("risk transfer: jump law must live on the integers");
    }
    const std::size_t workers = options.workers ? options.workers : default_workers();
    const RngStream root(options.seed, 0);
    std::vector<RiskRow> rows;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        const std::size_t n = n_values[k];
        const Grid grid = Grid::uniform(spec.horizon, n);
        const IncrementSummaries summaries = build_increment_summaries(spec, grid);
        const RngStream n_stream = root.substream(k);
        struct Rep {
            double direct, transferred, naive;
        };
        std::vector<Rep> reps(options.replications);
        parallel_for(options.replications, workers, [&](std::size_t r) {
            const RngStream rep_stream = n_stream.substream(r);
            RngStream wn_rng = rep_stream.substream(0);
            RngStream path_rng = rep_stream.substream(1);
            const auto wn = sample_white_noise_increments(summaries, wn_rng);
            const PathSample path = sample_path(spec, grid, summaries, path_rng);
            std::vector<double> obs(n + 1, spec.initial);
            for (std::size_t i = 0; i < n; ++i) obs[i + 1] = obs[i] + path.increments[i];
            auto estimator = [&](std::span<const double> z) { return delta(z, grid); };
            reps[r].direct = integrated_squared_error(delta(wn, grid), spec.drift, grid);
            reps[r].transferred =
                integrated_squared_error(transfer_estimator(estimator, obs, n), spec.drift, grid);
            reps[r].naive = integrated_squared_error(delta(path.increments, grid), spec.drift, grid);
        });
        auto mean_se = [&](double Rep::*field) {
            double sum = 0.0;
            for (const auto& r : reps) sum += r.*field;
            const double mean = sum / static_cast<double>(reps.size());
            double ss = 0.0;
            for (const auto& r : reps) ss += (r.*field - mean) * (r.*field - mean);
            const double var = reps.size() > 1 ? ss / static_cast<double>(reps.size() - 1) : 0.0;
            return std::pair{mean, std::sqrt(var / static_cast<double>(reps.size()))};
        };
        RiskRow row;
        row.n = n;
        row.replications = options.replications;
        std::tie(row.mise_direct_gaussian, row.se_direct_gaussian) = mean_se(&Rep::direct);
        std::tie(row.mise_transferred, row.se_transferred) = mean_se(&Rep::transferred);
        std::tie(row.mise_naive_on_jumps, row.se_naive_on_jumps) = mean_se(&Rep::naive);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace lecam
