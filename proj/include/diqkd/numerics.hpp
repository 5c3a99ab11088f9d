// Copyright 2026 The diqkd authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Small numeric kernels used across the library: scaled complementary error
 * function, adaptive Simpson quadrature, and a golden-section minimizer.
 */

#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>

#include "diqkd/errors.hpp"

namespace diqkd::numerics {

/// Scaled complementary error function exp(v^2) erfc(v) for v >= 0.
inline double erfcx_nonneg(double v) {
    if (v < 0.0) throw DomainError("erfcx_nonneg: negative argument");
    if (v < 25.0) return std::exp(v * v) * std::erfc(v);
    // asymptotic expansion; truncation error is negligible at this range
    const double inv2v2 = 1.0 / (2.0 * v * v);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2 * k - 1) * inv2v2;
        sum += term;
    }
    return sum / (v * std::sqrt(M_PI));
}

namespace detail {

inline double simpson_step(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <std::invocable<double> F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson_step(a, fa, m, fm, flm);
    const double right = simpson_step(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
template <std::invocable<double> F>
double integrate(F&& f, double a, double b, double tol = 1e-9) {
    if (!(a < b)) return 0.0;
    // seed the recursion on a few panels so narrow features are not missed
    constexpr int kPanels = 8;
    const double h = (b - a) / kPanels;
    double total = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        const double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        const double f0 = f(x0), f1 = f(x1), fm = f(xm);
        const double whole = detail::simpson_step(x0, f0, x1, f1, fm);
        total += detail::adaptive_simpson_rec(f, x0, f0, x1, f1, xm, fm, whole,
                                              tol / kPanels, 48);
    }
    return total;
}

/**
 * Golden-section search for the minimum of f on [a, b].
 * Returns the abscissa of the minimum to within xtol.
 */
template <std::invocable<double> F>
double golden_section_minimize(F&& f, double a, double b, double xtol) {
    if (!(a <= b)) throw DomainError("golden_section_minimize: empty bracket");
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace diqkd::numerics
