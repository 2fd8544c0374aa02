#include <cmath>
#include <numbers>
#include <vector>

#include <catch_amalgamated.hpp>

#include "lecam/errors.hpp"
#include "lecam/normal.hpp"
#include "lecam/quadrature.hpp"

using namespace lecam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("polynomials and smooth functions") {
    CHECK_THAT(integrate([](double x) { return x * x; }, 0.0, 3.0).value, WithinAbs(9.0, 1e-12));
    CHECK_THAT(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value,
               WithinAbs(2.0, 1e-12));
    CHECK_THAT(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0).value,
               WithinAbs(1.0 - std::exp(-50.0), 1e-11));
}

TEST_CASE("empty and reversed intervals integrate to zero") {
    CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);
    CHECK(integrate([](double) { return 1.0; }, 2.0, 1.0).value == 0.0);
}

TEST_CASE("breakpoints resolve a narrow peak") {
    auto peak = [](double x) { return normal::pdf(x, 3.7, 1e-4); };
    const std::vector<double> cuts{3.7 - 9e-4, 3.7 - 3e-4, 3.7, 3.7 + 3e-4, 3.7 + 9e-4};
    CHECK_THAT(integrate(peak, -10.0, 10.0, cuts).value, WithinAbs(1.0, 1e-10));
}

TEST_CASE("kinks and discontinuities") {
    CHECK_THAT(integrate([](double x) { return std::abs(x - 0.3); }, -1.0, 1.0).value,
               WithinAbs(0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7, 1e-10));
    CHECK_THAT(integrate([](double x) { return x < 0.25 ? 1.0 : 0.0; }, 0.0, 1.0).value,
               WithinAbs(0.25, 1e-9));
}

TEST_CASE("integrable endpoint singularity") {
    CHECK_THAT(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0).value,
               WithinRel(2.0, 1e-8));
}

TEST_CASE("exhausted budget names the integrand") {
    QuadratureOptions opts;
    opts.max_segments = 4;
    opts.abs_tol = 1e-14;
    try {
        integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, {}, opts, "wiggle");
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("wiggle") != std::string::npos);
    }
}

TEST_CASE("normal tails keep relative accuracy") {
    CHECK(normal::cdf(-20.0) > 0.0);
    CHECK_THAT(normal::cdf(-20.0), WithinRel(2.7536241186062337e-89, 1e-12));
    CHECK_THAT(normal::interval_mass(30.0, 31.0, 0.0, 1.0), WithinRel(normal::cdf(-30.0), 1e-6));
    CHECK_THAT(normal::pdf(0.0), WithinAbs(0.3989422804014327, 1e-16));
}
