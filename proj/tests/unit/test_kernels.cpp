#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <catch_amalgamated.hpp>

#include "lecam/kernels.hpp"
#include "lecam/oracle.hpp"

using namespace lecam;
using Catch::Matchers::WithinAbs;

TEST_CASE("rounding to the lattice cell") {
    CHECK(round_to_lattice(0.4) == 0.4);
    CHECK_THAT(round_to_lattice(1.7), WithinAbs(-0.3, 1e-15));
    CHECK(round_to_lattice(0.5) == 0.5);    // ties to even: [0.5] = 0
    CHECK(round_to_lattice(1.5) == -0.5);   // [1.5] = 2
    CHECK(round_to_lattice(-0.5) == -0.5);  // [-0.5] = 0
    for (double x : {0.0, 0.25, 0.49}) {
        for (int k = -3; k <= 3; ++k) CHECK_THAT(round_to_lattice(x + k), WithinAbs(x, 1e-14));
    }
}

TEST_CASE("rounding kernel acts coordinatewise") {
    CHECK(apply_round_kernel(std::vector<double>(3, 0.0)) == std::vector<double>(3, 0.0));
    const auto y = apply_round_kernel(std::vector<double>{1.3, -0.9, 0.2});
    CHECK_THAT(y[0], WithinAbs(0.3, 1e-15));
    CHECK_THAT(y[1], WithinAbs(0.1, 1e-15));
    CHECK_THAT(y[2], WithinAbs(0.2, 1e-15));
    CHECK(apply_round_kernel(y) == y);
}

TEST_CASE("folding a concentrated gaussian leaves it alone") {
    const Density g = gaussian_density(0.0, 1e-4);
    const Density f = fold_density_to_lattice_cell(g);
    CHECK(tv_quadrature(f, g) < 1e-12);
}

TEST_CASE("folding erases integer jumps") {
    GaussianMixture mix{0.0, 0.01, {{0.0, 0.9}, {1.0, 0.1}}};
    const Density d = detail::mixture_density(mix);
    CHECK(l1_quadrature(fold_density_to_lattice_cell(d), gaussian_density(0.0, 1e-4)) < 1e-9);
}

TEST_CASE("generic folding of a uniform law") {
    Density u;
    u.lo = -1.5;
    u.hi = 1.5;
    u.eval = [](double x) { return (x >= -1.5 && x <= 1.5) ? 1.0 / 3.0 : 0.0; };
    const Density f = fold_density_to_lattice_cell(u);
    for (double x : {-0.45, -0.1, 0.0, 0.3, 0.49}) CHECK_THAT(f(x), WithinAbs(1.0, 1e-15));
    CHECK_THAT(f.total_mass(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("folding preserves mass and commutes with integer shifts") {
    const IncrementSummary s = IncrementSummary::make(0.2, 0.3, 0.4);
    const JumpLaw law = JumpLaw::uniform(-0.7, 2.1);
    const Density d = bernoulli_density(s, law);
    const Density f = fold_density_to_lattice_cell(d);
    CHECK_THAT(f.total_mass(), WithinAbs(1.0, 1e-9));
    Density shifted = d;
    shifted.lo += 3.0;
    shifted.hi += 3.0;
    for (double& b : shifted.breakpoints) b += 3.0;
    shifted.eval = [d](double x) { return d(x - 3.0); };
    CHECK(l1_quadrature(f, fold_density_to_lattice_cell(shifted)) < 1e-9);
}

TEST_CASE("truncate-resample kernel") {
    const TruncateResampleParams p{0.1, 0.5, 0.04};
    CHECK_THAT(p.beta(), WithinAbs(0.3, 1e-15));
    RngStream rng(1, 0);
    CHECK(truncate_resample(0.0, p, rng) == 0.0);
    CHECK(truncate_resample(p.beta(), p, rng) == p.beta());
    CHECK(truncate_resample(-p.beta(), p, rng) == -p.beta());

    // The identity branch takes no randomness.
    RngStream a(2, 0);
    RngStream b(2, 0);
    truncate_resample(0.1, p, a);
    CHECK(a() == b());

    // Resample branch against N(0, sigma^2), Kolmogorov-Smirnov at the 1% level.
    std::vector<double> x;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) x.push_back(truncate_resample(10.0 * p.beta(), p, rng));
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (int k = 0; k < reps; ++k) {
        const double F = normal::cdf(x[k] / p.sigma_i);
        d = std::max({d, std::abs(F - static_cast<double>(k) / reps),
                      std::abs(F - static_cast<double>(k + 1) / reps)});
    }
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("truncate-resample pushforward has unit mass and matches sampling") {
    const IncrementSummary s = IncrementSummary::make(0.0, 0.0025, 0.2);
    const JumpLaw law = JumpLaw::uniform(-10.0, 10.0);
    const TruncateResampleParams p{1.0 / 3.0, 0.5, s.sigma()};
    const Density k = truncate_resample_pushforward(bernoulli_density(s, law), p);
    CHECK_THAT(k.total_mass(), WithinAbs(1.0, 1e-9));
    const Density g = truncate_resample_pushforward(gaussian_density(0.0, 0.0025), p);
    CHECK_THAT(g.total_mass(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("transfer estimator") {
    auto sum = [](std::span<const double> z) { return std::accumulate(z.begin(), z.end(), 0.0); };
    auto ident = [](std::span<const double> z) { return std::vector<double>(z.begin(), z.end()); };
    const std::vector<double> obs{0.0, 1.3, 1.1};
    const auto z = transfer_estimator(ident, obs, 2);
    CHECK_THAT(z[0], WithinAbs(0.3, 1e-15));
    CHECK_THAT(z[1], WithinAbs(-0.2, 1e-15));
    const std::vector<double> small{0.0, 0.1, -0.2, 0.15};
    CHECK_THAT(transfer_estimator(sum, small), WithinAbs(0.15, 1e-15));
    CHECK_THROWS_AS(transfer_estimator(sum, small, 4), std::invalid_argument);
}

TEST_CASE("continuous part removes recorded jumps") {
    PathSample p;
    p.increments = {0.1, 0.2, 2.3, 0.4};
    p.gaussian_parts = {0.1, 0.2, 0.3, 0.4};
    p.jump_times = {0.6};
    p.jump_sizes = {2.0};
    p.jump_intervals = {2};
    const auto c = continuous_part(p);
    CHECK_THAT(c[2], WithinAbs(0.3, 1e-15));
    CHECK(c[0] == 0.1);
    CHECK(c[3] == 0.4);
    PathSample q;
    q.increments = {1.0, 2.0};
    CHECK(continuous_part(q) == q.increments);
}

TEST_CASE("weighted integral statistic") {
    const Grid grid = Grid::uniform(1.0, 3);
    const std::vector<double> x{0.3, -0.6, 1.2};
    CHECK(weighted_integral_statistic(x, RealFunction::constant(1.0), grid) == x);
    const auto y = weighted_integral_statistic(x, RealFunction::constant(4.0), grid);
    for (int i = 0; i < 3; ++i) CHECK_THAT(y[i], WithinAbs(x[i] / 4.0, 1e-15));
    const RealFunction s2 = RealFunction::affine(1.0, 1.0).squared();
    CHECK_THAT(mean_value_point(s2, 0.0, 1.0), WithinAbs(std::sqrt(2.0) - 1.0, 1e-10));
    const auto z = weighted_integral_statistic(std::vector<double>{1.0}, s2, Grid::uniform(1.0, 1));
    CHECK_THAT(z[0], WithinAbs(0.5, 1e-10));
    CHECK_THROWS_AS(weighted_integral_statistic(std::vector<double>{1.0},
                                                RealFunction::affine(-1.0, 1.0),
                                                Grid::uniform(1.0, 1)),
                    std::invalid_argument);
}
