#include <cmath>
#include <numbers>
#include <stdexcept>

#include <catch_amalgamated.hpp>

#include "lecam/model.hpp"

using namespace lecam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelSpec constant_spec(double f, double sigma, double lambda) {
    ModelSpec spec;
    spec.drift = RealFunction::constant(f);
    spec.sigma = RealFunction::constant(sigma);
    spec.intensity = RealFunction::constant(lambda);
    return spec;
}

}  // namespace

TEST_CASE("constant integrands") {
    const auto s = build_increment_summaries(constant_spec(2.0, 1.0, 0.5), Grid::uniform(1.0, 4));
    REQUIRE(s.size() == 4);
    for (const auto& x : s) {
        CHECK_THAT(x.m, WithinAbs(0.5, 1e-15));
        CHECK_THAT(x.sigma2, WithinAbs(0.25, 1e-15));
        CHECK_THAT(x.lambda, WithinAbs(0.125, 1e-15));
        CHECK_THAT(x.alpha, WithinAbs(0.110312, 1e-6));
        CHECK(x.alpha == x.lambda * std::exp(-x.lambda));
    }
}

TEST_CASE("affine drift on one interval") {
    ModelSpec spec = constant_spec(0.0, 1.0, 0.0);
    spec.drift = RealFunction::affine(0.0, 1.0);
    const auto s = build_increment_summaries(spec, Grid::uniform(1.0, 1));
    CHECK_THAT(s[0].m, WithinAbs(0.5, 1e-15));
}

TEST_CASE("sine drift matches the antiderivative") {
    ModelSpec spec = constant_spec(0.0, 1.0, 0.0);
    spec.drift = RealFunction::sine_cycles(0.0, 1.0, 1.0);
    const Grid grid = Grid::uniform(1.0, 10);
    const auto s = build_increment_summaries(spec, grid);
    const double w = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < 10; ++i) {
        const double expected = (std::cos(w * grid[i]) - std::cos(w * grid[i + 1])) / w;
        CHECK_THAT(s[i].m, WithinAbs(expected, 1e-10));
    }
}

TEST_CASE("quadrature fallback matches closed forms") {
    ModelSpec spec = constant_spec(0.0, 1.0, 0.0);
    spec.drift = RealFunction([](double t) { return std::exp(t); });
    spec.sigma = RealFunction([](double t) { return 1.0 + t; });
    spec.epsilon_n = 0.3;
    const Grid grid = Grid::uniform(2.0, 5);
    const auto s = build_increment_summaries(spec, grid);
    for (std::size_t i = 0; i < 5; ++i) {
        const double a = grid[i];
        const double b = grid[i + 1];
        CHECK_THAT(s[i].m, WithinAbs(std::exp(b) - std::exp(a), 1e-10));
        const double s2 = 0.09 * (std::pow(1.0 + b, 3) - std::pow(1.0 + a, 3)) / 3.0;
        CHECK_THAT(s[i].sigma2, WithinAbs(s2, 1e-10));
    }
}

TEST_CASE("piecewise drift uses the right endpoint, half-open") {
    const Grid grid({0.0, 0.5, 1.0});
    const RealFunction fn = piecewise_drift(RealFunction::affine(0.0, 1.0), grid);
    CHECK(fn(0.0) == 0.5);
    CHECK(fn(0.25) == 0.5);
    CHECK(fn(0.49) == 0.5);
    CHECK(fn(0.5) == 1.0);
    CHECK(fn(0.9) == 1.0);
    CHECK(fn(1.0) == 1.0);
    const RealFunction c = piecewise_drift(RealFunction::constant(3.0), Grid::uniform(1.0, 7));
    for (double t : {0.0, 0.1, 0.5, 0.99, 1.0}) CHECK(c(t) == 3.0);
}

TEST_CASE("log-derivative check") {
    const Grid grid = Grid::uniform(1.0, 100);
    CHECK(check_sigma_log_derivative(RealFunction::constant(1.0), 0.0, grid));
    CHECK_FALSE(check_sigma_log_derivative(RealFunction::exponential(1.0, 2.0), 1.0, grid));
    CHECK(check_sigma_log_derivative(RealFunction::exponential(1.0, 2.0), 2.0, grid));
    const RealFunction wobble = RealFunction::sine(1.0, 0.1, 1.0);
    const Grid long_grid = Grid::uniform(20.0, 2000);
    CHECK(check_sigma_log_derivative(wobble, 0.12, long_grid));
    CHECK_FALSE(check_sigma_log_derivative(wobble, 0.1, long_grid));
    CHECK_THROWS_AS(check_sigma_log_derivative(RealFunction::affine(-0.5, 1.0), 1.0, grid),
                    std::invalid_argument);
}

TEST_CASE("spec validation names the field") {
    auto message = [](const ModelSpec& s) {
        try {
            s.validate();
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    ModelSpec spec = constant_spec(0.0, 1.0, 0.0);
    CHECK(message(spec).empty());
    spec.epsilon_n = -1.0;
    CHECK(message(spec).find("epsilon_n") == 0);
    spec = constant_spec(0.0, 0.0, 0.0);
    CHECK(message(spec).find("sigma") == 0);
    spec = constant_spec(0.0, 1.0, -0.1);
    CHECK(message(spec).find("intensity") == 0);
    spec = constant_spec(0.0, 1.0, 0.0);
    spec.horizon = 0.0;
    CHECK(message(spec).find("horizon") == 0);
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
    const Grid g({0.0, 0.1, 0.4, 1.0});
    CHECK(g.size() == 3);
    CHECK_THAT(g.mesh(), WithinAbs(0.6, 1e-15));
    CHECK(g.interval_containing(0.1) == 0);
    CHECK(g.interval_containing(0.10001) == 1);
    CHECK(g.interval_containing(1.0) == 2);
    CHECK(Grid::uniform(3.0, 7)[7] == 3.0);
}

TEST_CASE("jump law invariants") {
    CHECK_THROWS_AS(JumpLaw::lattice({{1, 0.5}, {2, 0.4}}), std::invalid_argument);
    CHECK_THROWS_AS(JumpLaw::lattice({{1, 1.1}, {2, -0.1}}), std::invalid_argument);
    CHECK_NOTHROW(JumpLaw::lattice({{1, 0.5}, {-1, 0.5}}));
    CHECK(JumpLaw::dirac(1.0).on_integer_lattice());
    CHECK_FALSE(JumpLaw::dirac(0.5).on_integer_lattice());
    CHECK_THROWS_AS(JumpLaw::custom([](double) { return 0.4; }, 0.0, 2.0, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("jump law moments and cf") {
    const JumpLaw u = JumpLaw::uniform(-1.0, 3.0);
    CHECK_THAT(u.mean(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(u.mass(-10.0, 0.0), WithinAbs(0.25, 1e-15));
    CHECK(std::abs(u.cf(0.0) - 1.0) < 1e-15);
    const JumpLaw tri = JumpLaw::custom([](double y) { return 1.0 - std::abs(y); }, -1.0, 1.0, 1.0,
                                        1.0, {0.0});
    CHECK_THAT(tri.mean(), WithinAbs(0.0, 1e-12));
    // cf of the triangular law: (2 - 2 cos u) / u^2.
    CHECK_THAT(tri.cf(1.3).real(), WithinAbs((2.0 - 2.0 * std::cos(1.3)) / (1.3 * 1.3), 1e-10));
    CHECK_THAT(tri.smoothed_density(0.2, 1e-3), WithinAbs(0.8, 1e-6));
    const JumpLaw g = JumpLaw::gaussian(0.5, 2.0);
    CHECK_THAT(g.cf(0.7).real(), WithinAbs(std::cos(0.35) * std::exp(-0.98), 1e-14));
    const JumpLaw lat = JumpLaw::lattice({{-1, 0.25}, {2, 0.75}});
    CHECK_THAT(lat.mean(), WithinAbs(1.25, 1e-15));
}

TEST_CASE("additivity across merged intervals") {
    ModelSpec spec = constant_spec(0.0, 1.0, 0.0);
    spec.drift = RealFunction::sine(0.3, 1.0, 3.0);
    spec.sigma = RealFunction::exponential(0.5, 0.4);
    spec.intensity = RealFunction::power(2.0, 0.5);
    const Grid fine({0.0, 0.2, 0.45, 0.7, 1.0});
    const Grid coarse({0.0, 0.45, 1.0});
    const auto f = build_increment_summaries(spec, fine);
    const auto c = build_increment_summaries(spec, coarse);
    CHECK_THAT(f[0].m + f[1].m, WithinAbs(c[0].m, 1e-9));
    CHECK_THAT(f[2].sigma2 + f[3].sigma2, WithinAbs(c[1].sigma2, 1e-9));
    CHECK_THAT(f[0].lambda + f[1].lambda, WithinAbs(c[0].lambda, 1e-9));
}
