#include <cmath>
#include <complex>
#include <numbers>

#include <catch_amalgamated.hpp>

#include "lecam/errors.hpp"
#include "lecam/laws.hpp"
#include "lecam/oracle.hpp"

using namespace lecam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gaussian density") {
    const Density g = gaussian_density(0.0, 1.0);
    CHECK_THAT(g(0.0), WithinAbs(0.3989423, 1e-7));
    const Density h = gaussian_density(1.5, 0.3);
    for (double x : {0.1, 0.7, 2.0}) CHECK_THAT(h(1.5 + x), WithinRel(h(1.5 - x), 1e-14));
    CHECK_THAT(h.total_mass(), WithinAbs(1.0, 1e-10));
    CHECK_THROWS_AS(gaussian_density(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero intensity reduces to the gaussian") {
    const IncrementSummary s = IncrementSummary::make(0.2, 0.09, 0.0);
    const Density exact = increment_density_exact(s, JumpLaw::dirac(1.0));
    const Density bern = bernoulli_density(s, JumpLaw::uniform(-1.0, 1.0));
    const Density g = gaussian_density(0.2, 0.09);
    for (double x : {-0.5, 0.0, 0.2, 0.9}) {
        CHECK_THAT(exact(x), WithinRel(g(x), 1e-14));
        CHECK_THAT(bern(x), WithinRel(g(x), 1e-14));
    }
}

TEST_CASE("two-term series at a dirac jump") {
    const IncrementSummary s = IncrementSummary::make(0.0, 0.01, 0.1);
    const Density d = increment_density_exact(s, JumpLaw::dirac(1.0));
    CHECK_THAT(d(1.0), WithinAbs(std::exp(-0.1) * 0.1 * 3.989423, 1e-6));
    CHECK_THAT(d(1.0), WithinAbs(0.36097790294381016, 1e-12));
}

TEST_CASE("densities carry unit mass") {
    const IncrementSummary s = IncrementSummary::make(-0.1, 0.04, 0.7);
    for (const JumpLaw& law : {JumpLaw::dirac(1.0), JumpLaw::dirac(0.4),
                               JumpLaw::lattice({{-2, 0.3}, {1, 0.7}}), JumpLaw::uniform(-3.0, 2.0),
                               JumpLaw::gaussian(0.5, 0.7)}) {
        CHECK_THAT(increment_density_exact(s, law).total_mass(), WithinAbs(1.0, 1e-9));
        CHECK_THAT(bernoulli_density(s, law).total_mass(), WithinAbs(1.0, 1e-9));
    }
    const JumpLaw tri = JumpLaw::custom([](double y) { return 1.0 - std::abs(y); }, -1.0, 1.0, 1.0,
                                        1.0, {0.0});
    CHECK_THAT(increment_density_exact(s, tri).total_mass(), WithinAbs(1.0, 1e-9));
    CHECK_THAT(bernoulli_density(s, tri).total_mass(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("bernoulli mixture structure") {
    // alpha = 0.5 is not reachable as lambda e^{-lambda}; build the mixture directly.
    IncrementSummary s = IncrementSummary::make(0.0, 0.04, 0.0);
    s.alpha = 0.5;
    const Density d = bernoulli_density(s, JumpLaw::dirac(1.0));
    CHECK_THAT(d(0.0), WithinRel(d(1.0), 1e-12));
    CHECK_THAT(d(0.0), WithinRel(0.5 * normal::pdf(0.0, 0.0, 0.2) + 0.5 * normal::pdf(0.0, 1.0, 0.2), 1e-12));
}

TEST_CASE("uniform jumps: convolution powers against Irwin-Hall") {
    // Two Uniform(0,1) jumps sum to a triangle on [0,2].
    const JumpLaw u = JumpLaw::uniform(0.0, 1.0);
    const auto tables = detail::convolution_powers(u, 2);
    for (double y : {0.25, 0.5, 1.0, 1.5}) {
        CHECK_THAT(tables[1].smoothed(y, 1e-4), WithinAbs(1.0 - std::abs(y - 1.0), 2e-3));
    }
}

TEST_CASE("gaussian jumps: exact mixture") {
    const IncrementSummary s = IncrementSummary::make(0.0, 0.25, 0.3);
    const Density d = increment_density_exact(s, JumpLaw::gaussian(1.0, 0.5));
    double expected = 0.0;
    double p = std::exp(-0.3);
    for (int k = 0; k < 20; ++k) {
        expected += p * normal::pdf(0.7, k * 1.0, std::sqrt(0.25 + 0.25 * k));
        p *= 0.3 / (k + 1);
    }
    CHECK_THAT(d(0.7), WithinRel(expected, 1e-12));
}

TEST_CASE("characteristic function") {
    const JumpLaw dirac = JumpLaw::dirac(1.0);
    const IncrementSummary s = IncrementSummary::make(0.0, 1.0, 0.5);
    CHECK(std::abs(increment_cf(s, dirac, 0.0) - 1.0) < 1e-15);
    using namespace std::complex_literals;
    const auto expected = std::exp(-0.5 + 0.5 * (std::exp(1i) - 1.0));
    CHECK(std::abs(increment_cf(s, dirac, 1.0) - expected) < 1e-15);
    const IncrementSummary g = IncrementSummary::make(0.3, 0.5, 0.0);
    CHECK(std::abs(increment_cf(g, dirac, 2.0) - std::exp(0.6i - 1.0)) < 1e-15);
}

TEST_CASE("fourier inversion of the cf recovers the density") {
    const IncrementSummary s = IncrementSummary::make(0.1, 0.09, 0.2);
    for (const JumpLaw& law : {JumpLaw::dirac(1.0), JumpLaw::uniform(-1.0, 2.0)}) {
        const Density d = increment_density_exact(s, law);
        for (double x : {-0.4, 0.0, 0.1, 0.6, 1.3}) {
            // p(x) = (1/pi) \int_0^inf Re(e^{-iux} cf(u)) du; the Gaussian factor makes 80 ample.
            QuadratureOptions opts;
            opts.abs_tol = 1e-11;
            const double inv = integrate(
                                   [&](double u) {
                                       return (std::exp(std::complex<double>(0.0, -u * x)) *
                                               increment_cf(s, law, u))
                                           .real();
                                   },
                                   0.0, 80.0, {}, opts)
                                   .value /
                               std::numbers::pi;
            CHECK_THAT(inv, WithinAbs(d(x), 1e-6));
        }
    }
}

TEST_CASE("bernoulli step shrinks with the intensity") {
    double prev = 1.0;
    for (double lambda : {0.1, 0.01, 0.001}) {
        const IncrementSummary s = IncrementSummary::make(0.0, 0.01, lambda);
        const JumpLaw law = JumpLaw::dirac(1.0);
        const double l1 = l1_quadrature(increment_density_exact(s, law), bernoulli_density(s, law));
        CHECK(l1 <= 4.0 * lambda * lambda);
        CHECK(l1 < prev);
        prev = l1;
    }
}

TEST_CASE("series refuses huge intensities") {
    const IncrementSummary s = IncrementSummary::make(0.0, 1.0, 500.0);
    CHECK_THROWS_AS(increment_density_exact(s, JumpLaw::dirac(1.0)), NumericalError);
}
