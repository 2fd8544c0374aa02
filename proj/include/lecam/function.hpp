#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "lecam/quadrature.hpp"

namespace lecam {

/// Kind name plus numeric parameters; enough to rebuild a RealFunction from
/// a config file and to write it back out.
struct FunctionDescriptor {
    std::string kind;
    std::map<std::string, double> params;

    bool operator==(const FunctionDescriptor&) const = default;
};

enum class FunctionShape { constant, affine, general };

/// A real function of time, evaluated through a callback. When an
/// antiderivative is known it is used for exact interval integrals;
/// otherwise integrals fall back to adaptive quadrature.
class RealFunction {
public:
    using Callback = std::function<double(double)>;

    RealFunction() : RealFunction(constant(0.0)) {}

    explicit RealFunction(Callback eval, Callback antiderivative = {},
                          FunctionShape shape = FunctionShape::general,
                          std::optional<FunctionDescriptor> descriptor = std::nullopt)
        : eval_(std::move(eval)),
          antiderivative_(std::move(antiderivative)),
          shape_(shape),
          descriptor_(std::move(descriptor)) {
        if (!eval_) throw std::invalid_argument("RealFunction: empty evaluation callback");
    }

    double operator()(double t) const { return eval_(t); }

    FunctionShape shape() const { return shape_; }
    bool has_antiderivative() const { return static_cast<bool>(antiderivative_); }
    const std::optional<FunctionDescriptor>& descriptor() const { return descriptor_; }

    /// \int_a^b f(t) dt. Closed form when available, otherwise quadrature
    /// with absolute tolerance `abs_tol`.
    double integral(double a, double b, double abs_tol = 1e-10,
                    std::string_view label = "function") const {
        if (antiderivative_) return antiderivative_(b) - antiderivative_(a);
        QuadratureOptions opts;
        opts.abs_tol = abs_tol;
        return integrate(eval_, a, b, {}, opts, label).value;
    }

    /// t -> f(t)^2, keeping a closed-form antiderivative for constant and affine f.
    RealFunction squared() const {
        auto f = eval_;
        Callback sq = [f](double t) {
            const double v = f(t);
            return v * v;
        };
        if (shape_ == FunctionShape::constant) {
            const double c = eval_(0.0);
            return RealFunction(sq, [c](double t) { return c * c * t; }, FunctionShape::constant);
        }
        if (shape_ == FunctionShape::affine) {
            const double a = eval_(0.0);
            const double b = eval_(1.0) - a;
            if (b == 0.0) {
                return RealFunction(sq, [a](double t) { return a * a * t; }, FunctionShape::constant);
            }
            return RealFunction(
                sq, [a, b](double t) { return std::pow(a + b * t, 3) / (3.0 * b); },
                FunctionShape::general);
        }
        return RealFunction(sq);
    }

    /// t -> k * f(t).
    RealFunction scaled(double k) const {
        auto f = eval_;
        Callback anti;
        if (antiderivative_) {
            auto F = antiderivative_;
            anti = [F, k](double t) { return k * F(t); };
        }
        return RealFunction([f, k](double t) { return k * f(t); }, anti, shape_);
    }

    static RealFunction constant(double c) {
        return RealFunction([c](double) { return c; }, [c](double t) { return c * t; },
                            FunctionShape::constant, FunctionDescriptor{"constant", {{"value", c}}});
    }

    static RealFunction affine(double intercept, double slope) {
        return RealFunction([=](double t) { return intercept + slope * t; },
                            [=](double t) { return intercept * t + 0.5 * slope * t * t; },
                            slope == 0.0 ? FunctionShape::constant : FunctionShape::affine,
                            FunctionDescriptor{"affine", {{"intercept", intercept}, {"slope", slope}}});
    }

    /// offset + amplitude * sin(omega * t + phase)
    static RealFunction sine(double offset, double amplitude, double omega, double phase = 0.0) {
        return sine_impl(offset, amplitude, omega, phase,
                         FunctionDescriptor{"sine", {{"offset", offset},
                                                     {"amplitude", amplitude},
                                                     {"omega", omega},
                                                     {"phase", phase}}});
    }

    /// offset + amplitude * sin(2 pi frequency t + phase)
    static RealFunction sine_cycles(double offset, double amplitude, double frequency,
                                    double phase = 0.0) {
        return sine_impl(offset, amplitude, 2.0 * std::numbers::pi * frequency, phase,
                         FunctionDescriptor{"sine", {{"offset", offset},
                                                     {"amplitude", amplitude},
                                                     {"frequency", frequency},
                                                     {"phase", phase}}});
    }

    /// scale * exp(rate * t)
    static RealFunction exponential(double scale, double rate) {
        Callback anti;
        if (rate == 0.0) {
            anti = [scale](double t) { return scale * t; };
        } else {
            anti = [=](double t) { return scale * std::exp(rate * t) / rate; };
        }
        return RealFunction([=](double t) { return scale * std::exp(rate * t); }, anti,
                            rate == 0.0 ? FunctionShape::constant : FunctionShape::general,
                            FunctionDescriptor{"exponential", {{"scale", scale}, {"rate", rate}}});
    }

    /// scale * max(t, 0)^exponent, an exponent-Hölder function for exponent in (0, 1].
    static RealFunction power(double scale, double exponent) {
        if (!(exponent > 0.0)) throw std::invalid_argument("power: exponent must be positive");
        return RealFunction(
            [=](double t) { return scale * std::pow(std::max(t, 0.0), exponent); },
            [=](double t) {
                return scale * std::pow(std::max(t, 0.0), exponent + 1.0) / (exponent + 1.0);
            },
            exponent == 1.0 ? FunctionShape::affine : FunctionShape::general,
            FunctionDescriptor{"power", {{"scale", scale}, {"exponent", exponent}}});
    }

private:
    static RealFunction sine_impl(double offset, double amplitude, double omega, double phase,
                                  FunctionDescriptor desc) {
        Callback anti;
        if (omega == 0.0) {
            const double c = offset + amplitude * std::sin(phase);
            anti = [c](double t) { return c * t; };
        } else {
            anti = [=](double t) {
                return offset * t - amplitude * std::cos(omega * t + phase) / omega;
            };
        }
        return RealFunction([=](double t) { return offset + amplitude * std::sin(omega * t + phase); },
                            anti,
                            (omega == 0.0 || amplitude == 0.0) ? FunctionShape::constant
                                                               : FunctionShape::general,
                            std::move(desc));
    }

    Callback eval_;
    Callback antiderivative_;
    FunctionShape shape_ = FunctionShape::general;
    std::optional<FunctionDescriptor> descriptor_;
};

}  // namespace lecam
