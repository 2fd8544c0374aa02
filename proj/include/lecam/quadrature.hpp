#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lecam/errors.hpp"

namespace lecam {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    std::size_t max_segments = 5000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t segments = 0;
};

namespace detail {

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gk21_panel(F& f, double a, double b) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
        f, a, b, 0, 0.0, &err);
    return {a, b, v, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (10/21) quadrature over [a, b].
///
/// The interval is first cut at every breakpoint that falls strictly inside
/// (a, b); after that the segment with the largest error estimate is bisected
/// until the summed error estimate is below max(abs_tol, rel_tol * |I|).
/// Throws NumericalError naming `label` and the interval when the segment
/// budget runs out.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
                           const QuadratureOptions& options = {},
                           std::string_view label = "integrand") {
    if (!(a < b)) return {};
    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto g = [&f](double x) { return static_cast<double>(f(x)); };
    std::priority_queue<detail::Segment> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto s = detail::gk21_panel(g, cuts[i], cuts[i + 1]);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }

    const double width_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(a), std::abs(b));
    while (total_err > std::max(options.abs_tol, options.rel_tol * std::abs(total))) {
        if (heap.size() >= options.max_segments) {
            std::ostringstream msg;
            msg << "quadrature of " << label << " on [" << a << ", " << b
                << "] did not converge: error estimate " << total_err << " after "
                << heap.size() << " segments";
            throw NumericalError(msg.str());
        }
        auto worst = heap.top();
        if (worst.b - worst.a <= width_floor) break;  // roundoff limited
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk21_panel(g, worst.a, mid);
        auto right = detail::gk21_panel(g, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    QuadratureResult result;
    result.segments = heap.size();
    while (!heap.empty()) {
        result.value += heap.top().value;
        result.error += heap.top().error;
        heap.pop();
    }
    return result;
}

}  // namespace lecam
