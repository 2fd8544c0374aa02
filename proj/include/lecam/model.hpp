#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lecam/errors.hpp"
#include "lecam/function.hpp"
#include "lecam/normal.hpp"
#include "lecam/quadrature.hpp"
#include "lecam/rng.hpp"

namespace lecam {

// ---------------------------------------------------------------------------
// Jump law G
// ---------------------------------------------------------------------------

/// Law G of the jump sizes. Three kinds:
///  - lattice: a probability mass function on the integers;
///  - dirac: a point mass at c (on the integer lattice when c is an integer);
///  - continuous: a Lebesgue density h on [lo, hi], together with constants
///    N1, N2 such that h <= N2 on [-1/N1, 1/N1].
class JumpLaw {
public:
    enum class Kind { lattice, dirac, continuous };
    enum class Family { uniform, gaussian, custom };

    /// Probability mass function on Z. Masses must be nonnegative and sum to 1 within 1e-12.
    static JumpLaw lattice(std::map<long, double> pmf) {
        double total = 0.0;
        for (const auto& [k, p] : pmf) {
            if (!(p >= 0.0)) throw std::invalid_argument("jump_law: negative lattice mass");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "jump_law: lattice masses sum to " << total << ", expected 1";
            throw std::invalid_argument(msg.str());
        }
        std::erase_if(pmf, [](const auto& kv) { return kv.second == 0.0; });
        JumpLaw law;
        law.kind_ = Kind::lattice;
        law.pmf_ = std::move(pmf);
        return law;
    }

    static JumpLaw dirac(double point) {
        if (!std::isfinite(point)) throw std::invalid_argument("jump_law: dirac point must be finite");
        JumpLaw law;
        law.kind_ = Kind::dirac;
        law.point_ = point;
        return law;
    }

    static JumpLaw uniform(double a, double b, double n1 = 1.0) {
        if (!(a < b)) throw std::invalid_argument("jump_law: uniform needs a < b");
        JumpLaw law;
        law.kind_ = Kind::continuous;
        law.family_ = Family::uniform;
        law.lo_ = a;
        law.hi_ = b;
        law.n1_ = n1;
        law.n2_ = 1.0 / (b - a);
        law.density_ = [a, b](double y) { return (y >= a && y <= b) ? 1.0 / (b - a) : 0.0; };
        law.check_continuous();
        return law;
    }

    /// Gaussian N(mean, sd^2) jumps (the time-inhomogeneous Merton model).
    static JumpLaw gaussian(double mean, double sd, double n1 = 1.0) {
        if (!(sd > 0.0)) throw std::invalid_argument("jump_law: gaussian sd must be positive");
        JumpLaw law;
        law.kind_ = Kind::continuous;
        law.family_ = Family::gaussian;
        law.mean_ = mean;
        law.sd_ = sd;
        law.lo_ = mean - 12.0 * sd;
        law.hi_ = mean + 12.0 * sd;
        law.n1_ = n1;
        law.n2_ = normal::inv_sqrt_2pi / sd;
        law.density_ = [mean, sd](double y) { return normal::pdf(y, mean, sd); };
        law.check_continuous();
        return law;
    }

    /// Arbitrary density on [lo, hi]. Sampling inverts a tabulated CDF.
    static JumpLaw custom(std::function<double(double)> density, double lo, double hi, double n1,
                          double n2, std::vector<double> kinks = {}) {
        if (!(lo < hi)) throw std::invalid_argument("jump_law: custom support needs lo < hi");
        JumpLaw law;
        law.kind_ = Kind::continuous;
        law.family_ = Family::custom;
        law.lo_ = lo;
        law.hi_ = hi;
        law.n1_ = n1;
        law.n2_ = n2;
        law.density_ = std::move(density);
        law.kinks_ = std::move(kinks);
        law.check_continuous();
        law.build_inverse_cdf();
        return law;
    }

    Kind kind() const { return kind_; }
    Family family() const { return family_; }
    bool is_continuous() const { return kind_ == Kind::continuous; }

    /// True for lattice laws and for a point mass at an integer.
    bool on_integer_lattice() const {
        return kind_ == Kind::lattice || (kind_ == Kind::dirac && point_ == std::nearbyint(point_));
    }

    /// The pmf on Z; defined when on_integer_lattice().
    std::map<long, double> lattice_pmf() const {
        if (kind_ == Kind::lattice) return pmf_;
        if (on_integer_lattice()) return {{static_cast<long>(point_), 1.0}};
        throw std::logic_error("jump_law: not supported on the integer lattice");
    }

    double point() const { return point_; }
    double gaussian_mean() const { return mean_; }
    double gaussian_sd() const { return sd_; }
    double uniform_lo() const { return lo_; }
    double uniform_hi() const { return hi_; }

    double lo() const { return kind_ == Kind::continuous ? lo_ : support_bounds().first; }
    double hi() const { return kind_ == Kind::continuous ? hi_ : support_bounds().second; }
    double n1() const { return n1_; }
    double n2() const { return n2_; }

    /// Lebesgue density h (continuous laws only).
    double density(double y) const {
        require_continuous("density");
        return density_(y);
    }

    /// Points where h is not smooth (support ends plus any user kinks).
    std::vector<double> kinks() const {
        std::vector<double> out{lo_, hi_};
        out.insert(out.end(), kinks_.begin(), kinks_.end());
        if (family_ == Family::gaussian) out.push_back(mean_);
        return out;
    }

    /// G([a, b]).
    double mass(double a, double b) const {
        if (a > b) return 0.0;
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (const auto& [k, p] : pmf_) {
                    if (k >= a && k <= b) m += p;
                }
                return m;
            }
            case Kind::dirac:
                return (point_ >= a && point_ <= b) ? 1.0 : 0.0;
            case Kind::continuous:
                break;
        }
        const double lo = std::max(a, lo_);
        const double hi = std::min(b, hi_);
        if (!(lo < hi)) return 0.0;
        switch (family_) {
            case Family::uniform:
                return (hi - lo) / (hi_ - lo_);
            case Family::gaussian:
                return normal::interval_mass(lo, hi, mean_, sd_);
            case Family::custom:
                break;
        }
        const auto k = kinks();
        return integrate(density_, lo, hi, k, {}, "jump density").value;
    }

    double mean() const {
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (const auto& [k, p] : pmf_) m += static_cast<double>(k) * p;
                return m;
            }
            case Kind::dirac:
                return point_;
            case Kind::continuous:
                break;
        }
        if (family_ == Family::uniform) return 0.5 * (lo_ + hi_);
        if (family_ == Family::gaussian) return mean_;
        const auto k = kinks();
        return integrate([this](double y) { return y * density_(y); }, lo_, hi_, k, {},
                         "jump mean")
            .value;
    }

    /// Characteristic function E[exp(i u Y)].
    std::complex<double> cf(double u) const {
        using namespace std::complex_literals;
        switch (kind_) {
            case Kind::lattice: {
                std::complex<double> acc = 0.0;
                for (const auto& [k, p] : pmf_) acc += p * std::exp(1i * (u * static_cast<double>(k)));
                return acc;
            }
            case Kind::dirac:
                return std::exp(1i * (u * point_));
            case Kind::continuous:
                break;
        }
        switch (family_) {
            case Family::uniform: {
                const double half = 0.5 * (hi_ - lo_);
                const double mid = 0.5 * (hi_ + lo_);
                const double x = u * half;
                const double sinc = (std::abs(x) < 1e-8) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
                return std::exp(1i * (u * mid)) * sinc;
            }
            case Family::gaussian:
                return std::exp(1i * (u * mean_) - 0.5 * u * u * sd_ * sd_);
            case Family::custom:
                break;
        }
        const auto k = kinks();
        const double re =
            integrate([&](double y) { return std::cos(u * y) * density_(y); }, lo_, hi_, k, {},
                      "jump cf (real part)")
                .value;
        const double im =
            integrate([&](double y) { return std::sin(u * y) * density_(y); }, lo_, hi_, k, {},
                      "jump cf (imaginary part)")
                .value;
        return {re, im};
    }

    /// (h * N(0, sd^2))(u): the jump density smoothed by a centred Gaussian.
    double smoothed_density(double u, double sd) const {
        require_continuous("smoothed_density");
        switch (family_) {
            case Family::uniform:
                return normal::interval_mass(lo_, hi_, u, sd) / (hi_ - lo_);
            case Family::gaussian:
                return normal::pdf(u, mean_, std::hypot(sd_, sd));
            case Family::custom:
                break;
        }
        const double lo = std::max(lo_, u - 12.0 * sd);
        const double hi = std::min(hi_, u + 12.0 * sd);
        if (!(lo < hi)) return 0.0;
        auto k = kinks();
        k.push_back(u);
        QuadratureOptions opts;
        opts.abs_tol = 1e-12;
        return integrate([&](double y) { return density_(y) * normal::pdf(u - y, 0.0, sd); }, lo,
                         hi, k, opts, "smoothed jump density")
            .value;
    }

    double sample(RngStream& rng) const {
        switch (kind_) {
            case Kind::lattice: {
                double u = rng.uniform01();
                for (const auto& [k, p] : pmf_) {
                    if (u < p) return static_cast<double>(k);
                    u -= p;
                }
                return static_cast<double>(pmf_.rbegin()->first);
            }
            case Kind::dirac:
                return point_;
            case Kind::continuous:
                break;
        }
        switch (family_) {
            case Family::uniform:
                return lo_ + (hi_ - lo_) * rng.uniform01();
            case Family::gaussian:
                return std::normal_distribution<double>(mean_, sd_)(rng);
            case Family::custom:
                break;
        }
        const auto& table = *inverse_cdf_;
        const double u = rng.uniform01();
        auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), u);
        const std::size_t j = std::clamp<std::size_t>(it - table.cdf.begin(), 1, table.cdf.size() - 1);
        const double c0 = table.cdf[j - 1];
        const double c1 = table.cdf[j];
        const double w = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
        return table.y[j - 1] + w * (table.y[j] - table.y[j - 1]);
    }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::lattice:
                return "lattice";
            case Kind::dirac:
                return "dirac";
            case Kind::continuous:
                break;
        }
        switch (family_) {
            case Family::uniform:
                return "uniform";
            case Family::gaussian:
                return "gaussian";
            case Family::custom:
                break;
        }
        return "custom";
    }

private:
    struct InverseCdf {
        std::vector<double> y;
        std::vector<double> cdf;
    };

    JumpLaw() = default;

    std::pair<double, double> support_bounds() const {
        if (kind_ == Kind::dirac) return {point_, point_};
        return {static_cast<double>(pmf_.begin()->first), static_cast<double>(pmf_.rbegin()->first)};
    }

    void require_continuous(const char* what) const {
        if (kind_ != Kind::continuous) {
            throw std::logic_error(std::string("jump_law: ") + what + " needs a continuous law");
        }
    }

    void check_continuous() const {
        if (!(n1_ > 0.0) || !(n2_ > 0.0)) {
            throw std::invalid_argument("jump_law: constants N1 and N2 must be positive");
        }
        if (family_ == Family::custom) {
            const auto k = kinks();
            QuadratureOptions opts;
            opts.abs_tol = 1e-10;
            const double total = integrate(density_, lo_, hi_, k, opts, "jump density").value;
            if (std::abs(total - 1.0) > 1e-8) {
                std::ostringstream msg;
                msg << "jump_law: density integrates to " << total << ", expected 1";
                throw std::invalid_argument(msg.str());
            }
        }
        // h <= N2 on [-1/N1, 1/N1], probed on a dense grid.
        const double r = 1.0 / n1_;
        constexpr int probes = 2001;
        for (int j = 0; j < probes; ++j) {
            const double y = -r + 2.0 * r * j / (probes - 1);
            if (density_(y) > n2_ * (1.0 + 1e-12)) {
                std::ostringstream msg;
                msg << "jump_law: density " << density_(y) << " exceeds N2 = " << n2_
                    << " at y = " << y;
                throw std::invalid_argument(msg.str());
            }
        }
    }

    void build_inverse_cdf() {
        constexpr std::size_t cells = 8192;
        auto table = std::make_shared<InverseCdf>();
        table->y.resize(cells + 1);
        table->cdf.resize(cells + 1);
        const double dy = (hi_ - lo_) / cells;
        double acc = 0.0;
        double prev = density_(lo_);
        table->y[0] = lo_;
        table->cdf[0] = 0.0;
        for (std::size_t j = 1; j <= cells; ++j) {
            const double y = lo_ + dy * static_cast<double>(j);
            const double cur = density_(y);
            acc += 0.5 * (prev + cur) * dy;
            prev = cur;
            table->y[j] = y;
            table->cdf[j] = acc;
        }
        for (double& c : table->cdf) c /= acc;
        inverse_cdf_ = std::move(table);
    }

    Kind kind_ = Kind::dirac;
    Family family_ = Family::custom;
    std::map<long, double> pmf_;
    double point_ = 0.0;
    double mean_ = 0.0;
    double sd_ = 1.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double n1_ = 1.0;
    double n2_ = 1.0;
    std::function<double(double)> density_;
    std::vector<double> kinks_;
    std::shared_ptr<const InverseCdf> inverse_cdf_;
};

// ---------------------------------------------------------------------------
// Parameters and grid
// ---------------------------------------------------------------------------

/// alpha-Hölder class with constant M and uniform bound B.
struct HolderClassParams {
    double alpha = 1.0;
    double M = 1.0;
    double B = 1.0;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder: alpha must lie in (0, 1]");
        if (!(M >= 0.0)) throw std::invalid_argument("holder: M must be nonnegative");
        if (!(B >= 0.0)) throw std::invalid_argument("holder: B must be nonnegative");
    }
};

/// Observation times 0 = t_0 < t_1 < ... < t_n = horizon.
class Grid {
public:
    explicit Grid(std::vector<double> times) : times_(std::move(times)) {
        if (times_.size() < 2) throw std::invalid_argument("grid: needs at least two times");
        if (times_.front() != 0.0) throw std::invalid_argument("grid: first time must be 0");
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (!(times_[i] > times_[i - 1])) {
                throw std::invalid_argument("grid: times must be strictly increasing");
            }
            mesh_ = std::max(mesh_, times_[i] - times_[i - 1]);
        }
    }

    static Grid uniform(double horizon, std::size_t n) {
        if (!(horizon > 0.0)) throw std::invalid_argument("grid: horizon must be positive");
        if (n == 0) throw std::invalid_argument("grid: n must be at least 1");
        std::vector<double> t(n + 1);
        for (std::size_t i = 0; i <= n; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(n);
        t[n] = horizon;
        return Grid(std::move(t));
    }

    /// Number of intervals n.
    std::size_t size() const { return times_.size() - 1; }
    double operator[](std::size_t i) const { return times_[i]; }
    const std::vector<double>& times() const { return times_; }
    double horizon() const { return times_.back(); }
    double mesh() const { return mesh_; }
    /// Width of interval i, i.e. t_{i+1} - t_i (0-based).
    double width(std::size_t i) const { return times_[i + 1] - times_[i]; }

    /// Interval index i with t_i < t <= t_{i+1}; used to attribute jump times.
    std::size_t interval_containing(double t) const {
        auto it = std::lower_bound(times_.begin() + 1, times_.end(), t);
        if (it == times_.end()) return size() - 1;
        return static_cast<std::size_t>(it - times_.begin()) - 1;
    }

private:
    std::vector<double> times_;
    double mesh_ = 0.0;
};

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

/// dX_t = f(t) dt + eps_n sigma(t) dW_t + dJ_t, where J is compound Poisson
/// with intensity lambda(t) and jump law G, X_0 = initial, observed on [0, horizon].
struct ModelSpec {
    RealFunction drift = RealFunction::constant(0.0);
    RealFunction sigma = RealFunction::constant(1.0);
    double epsilon_n = 1.0;
    RealFunction intensity = RealFunction::constant(0.0);
    JumpLaw jump_law = JumpLaw::dirac(1.0);
    double horizon = 1.0;
    double initial = 0.0;

    double sigma_n(double t) const { return epsilon_n * sigma(t); }

    /// t -> sigma_n(t)^2.
    RealFunction sigma_n2() const { return sigma.squared().scaled(epsilon_n * epsilon_n); }

    /// Checks the invariants on `probes` equispaced points of [0, horizon]
    /// plus every time of `grid` when given. Throws std::invalid_argument
    /// naming the offending field.
    void validate(const Grid* grid = nullptr, std::size_t probes = 1001) const {
        if (!(epsilon_n > 0.0) || !std::isfinite(epsilon_n)) {
            throw std::invalid_argument("epsilon_n: must be positive");
        }
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::invalid_argument("horizon: must be positive");
        }
        if (!std::isfinite(initial)) throw std::invalid_argument("initial: must be finite");
        std::vector<double> pts;
        for (std::size_t j = 0; j < probes; ++j) {
            pts.push_back(horizon * static_cast<double>(j) / static_cast<double>(probes - 1));
        }
        if (grid) {
            if (std::abs(grid->horizon() - horizon) > 1e-12 * horizon) {
                throw std::invalid_argument("grid: last time must equal horizon");
            }
            pts.insert(pts.end(), grid->times().begin(), grid->times().end());
        }
        for (double t : pts) {
            const double s = sigma(t);
            if (!(s > 0.0) || !std::isfinite(s)) {
                std::ostringstream msg;
                msg << "sigma: must be strictly positive, got " << s << " at t = " << t;
                throw std::invalid_argument(msg.str());
            }
            const double l = intensity(t);
            if (!(l >= 0.0) || !std::isfinite(l)) {
                std::ostringstream msg;
                msg << "intensity: must be nonnegative, got " << l << " at t = " << t;
                throw std::invalid_argument(msg.str());
            }
            if (!std::isfinite(drift(t))) {
                std::ostringstream msg;
                msg << "drift: not finite at t = " << t;
                throw std::invalid_argument(msg.str());
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Per-interval summaries
// ---------------------------------------------------------------------------

/// Integrated characteristics of one observation interval:
/// m = \int f, sigma2 = \int sigma_n^2, lambda = \int lambda, alpha = lambda e^{-lambda}.
struct IncrementSummary {
    double m = 0.0;
    double sigma2 = 1.0;
    double lambda = 0.0;
    double alpha = 0.0;

    double sigma() const { return std::sqrt(sigma2); }

    static IncrementSummary make(double m, double sigma2, double lambda) {
        if (!(sigma2 > 0.0)) throw std::invalid_argument("increment summary: sigma2 must be positive");
        if (!(lambda >= 0.0)) throw std::invalid_argument("increment summary: lambda must be nonnegative");
        return {m, sigma2, lambda, lambda * std::exp(-lambda)};
    }
};

struct IncrementSummaries {
    std::vector<IncrementSummary> intervals;

    std::size_t size() const { return intervals.size(); }
    const IncrementSummary& operator[](std::size_t i) const { return intervals[i]; }
    auto begin() const { return intervals.begin(); }
    auto end() const { return intervals.end(); }

    double max_abs_m() const {
        double out = 0.0;
        for (const auto& s : intervals) out = std::max(out, std::abs(s.m));
        return out;
    }
};

inline IncrementSummaries build_increment_summaries(const ModelSpec& spec, const Grid& grid) {
    constexpr double tol = 1e-10;
    const RealFunction sigma2 = spec.sigma.squared();
    const double eps2 = spec.epsilon_n * spec.epsilon_n;
    IncrementSummaries out;
    out.intervals.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = grid[i];
        const double b = grid[i + 1];
        auto label = [&](const char* what) {
            std::ostringstream s;
            s << what << " on interval " << i << " [" << a << ", " << b << "]";
            return s.str();
        };
        const double m = spec.drift.integral(a, b, tol, label("drift"));
        const double s2 = eps2 * sigma2.integral(a, b, tol / eps2, label("sigma^2"));
        const double lam = spec.intensity.integral(a, b, tol, label("intensity"));
        if (!(s2 > 0.0)) throw NumericalError(label("non-positive integrated variance"));
        out.intervals.push_back(IncrementSummary::make(m, s2, std::max(lam, 0.0)));
    }
    return out;
}

/// The step function f_n(t) = f(t_i) on [t_{i-1}, t_i), f_n(T) = f(T).
inline RealFunction piecewise_drift(const RealFunction& f, const Grid& grid) {
    auto times = std::make_shared<const std::vector<double>>(grid.times());
    auto values = std::make_shared<std::vector<double>>();
    values->reserve(times->size());
    for (double t : *times) values->push_back(f(t));
    return RealFunction([times, values](double t) {
        auto it = std::upper_bound(times->begin(), times->end(), t);
        if (it == times->end()) return values->back();
        if (it == times->begin()) return (*values)[1];
        return (*values)[static_cast<std::size_t>(it - times->begin())];
    });
}

/// |d/dt ln sigma(t)| <= C1 (+1e-8) at every interval midpoint, using a
/// central difference with step mesh/100.
inline bool check_sigma_log_derivative(const RealFunction& sigma, double C1, const Grid& grid) {
    const double h = grid.mesh() / 100.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = 0.5 * (grid[i] + grid[i + 1]);
        const double lo = sigma(t - h);
        const double hi = sigma(t + h);
        if (!(lo > 0.0) || !(hi > 0.0)) {
            std::ostringstream msg;
            msg << "sigma: non-positive value near t = " << t;
            throw std::invalid_argument(msg.str());
        }
        const double d = (std::log(hi) - std::log(lo)) / (2.0 * h);
        if (std::abs(d) > C1 + 1e-8) return false;
    }
    return true;
}

}  // namespace lecam
