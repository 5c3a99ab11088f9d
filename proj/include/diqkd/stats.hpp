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
 * Bayesian worst-case bounds on the CHSH value and the QBERs.
 *
 * Counts update a uniform Beta(1,1) prior; worst-case thresholds invert the
 * posterior CDF at the chosen tail error. The CHSH winning probability maps
 * to the S value through P_win = (S + 4)/8. Also hosts the incomplete-beta
 * numerics and the sinusoidal visibility fit.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>

#include "diqkd/errors.hpp"
#include "diqkd/protocol.hpp"

namespace diqkd::stats {

struct BetaPosterior {
    double a = 1.0;
    double b = 1.0;
};

inline void validate(const BetaPosterior& p) {
    if (!(p.a > 0.0) || !(p.b > 0.0)) throw DomainError("BetaPosterior: shapes must be positive");
}

/// Uniform prior updated with `successes` out of `total` trials.
inline BetaPosterior posterior_from_counts(std::uint64_t successes, std::uint64_t total) {
    if (successes > total) throw DomainError("posterior_from_counts: successes exceed total");
    return {static_cast<double>(successes) + 1.0,
            static_cast<double>(total - successes) + 1.0};
}

namespace detail {

/// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericError("reg_inc_beta: continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta I_x(a, b), absolute error below 1e-12.
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("reg_inc_beta: shapes must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Inverse of reg_inc_beta in x: bracketed bisection with Newton refinement.
inline double beta_inv_cdf(double a, double b, double p) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_inv_cdf: shapes must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("beta_inv_cdf: p outside (0, 1)");
    const double ln_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const auto pdf = [&](double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - ln_beta);
    };
    double lo = 0.0, hi = 1.0;
    double x = a / (a + b);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = reg_inc_beta(a, b, x) - p;
        if (std::abs(f) < 1e-13 || hi - lo < 1e-16) return x;
        if (f > 0.0) hi = x;
        else lo = x;
        const double dens = pdf(x);
        double next = dens > 0.0 ? x - f / dens : x;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    throw NumericError("beta_inv_cdf: did not converge");
}

enum class WinCountMethod { paper_floor, direct };

namespace detail {

inline double chsh_from_table(const protocol::CorrelationTable& t) {
    for (int x : {2, 3})
        for (int y : {0, 1})
            if (t.n[x][y] == 0)
                throw InsufficientDataError("chsh_win_count: empty CHSH cell (" +
                                            std::to_string(x) + "," + std::to_string(y) + ")");
    const auto e = [&](int x, int y) {
        return (2.0 * static_cast<double>(t.n_same[x][y]) - static_cast<double>(t.n[x][y])) /
               static_cast<double>(t.n[x][y]);
    };
    return e(2, 1) - e(2, 0) - e(3, 0) - e(3, 1);
}

} // namespace detail

/**
 * Number of won CHSH game rounds. paper_floor converts the aggregate S value
 * through floor(N_chsh (S+4)/8); direct counts winning rounds per cell
 * (same outputs where the correlator enters positively, differing outputs
 * where it enters negatively). The two can differ by a few counts.
 */
inline std::uint64_t chsh_win_count(const protocol::CorrelationTable& t,
                                    WinCountMethod method = WinCountMethod::paper_floor) {
    protocol::validate(t);
    const std::uint64_t n_chsh = t.n[2][0] + t.n[2][1] + t.n[3][0] + t.n[3][1];
    if (method == WinCountMethod::direct) {
        for (int x : {2, 3})
            for (int y : {0, 1})
                if (t.n[x][y] == 0)
                    throw InsufficientDataError("chsh_win_count: empty CHSH cell");
        return t.n_same[2][1] + (t.n[2][0] - t.n_same[2][0]) + (t.n[3][0] - t.n_same[3][0]) +
               (t.n[3][1] - t.n_same[3][1]);
    }
    const double s = detail::chsh_from_table(t);
    return static_cast<std::uint64_t>(
        std::floor(static_cast<double>(n_chsh) * (s + 4.0) / 8.0));
}

/// Worst-case thresholds at the given posterior tail error.
struct WorstCaseBounds {
    double s_min = 0.0;
    double q0_max = 0.0;
    double q1_max = 0.0;
    double tail = 0.03;
    BetaPosterior win_posterior;
    BetaPosterior q0_posterior;
    BetaPosterior q1_posterior;
    std::uint64_t win_count = 0;
    std::uint64_t n_chsh = 0;
};

inline WorstCaseBounds worst_case_bounds(const protocol::CorrelationTable& t, double tail = 0.03,
                                         WinCountMethod method = WinCountMethod::paper_floor) {
    protocol::validate(t);
    if (!(tail > 0.0 && tail < 0.5)) throw DomainError("worst_case_bounds: tail outside (0, 0.5)");
    if (t.n[0][0] == 0 || t.n[1][1] == 0)
        throw InsufficientDataError("worst_case_bounds: empty key cell");
    WorstCaseBounds out;
    out.tail = tail;
    out.n_chsh = t.n[2][0] + t.n[2][1] + t.n[3][0] + t.n[3][1];
    out.win_count = chsh_win_count(t, method);
    out.win_posterior = posterior_from_counts(out.win_count, out.n_chsh);
    out.q0_posterior = posterior_from_counts(t.n_same[0][0], t.n[0][0]);
    out.q1_posterior = posterior_from_counts(t.n_same[1][1], t.n[1][1]);
    out.s_min = 8.0 * beta_inv_cdf(out.win_posterior.a, out.win_posterior.b, tail) - 4.0;
    out.q0_max = beta_inv_cdf(out.q0_posterior.a, out.q0_posterior.b, 1.0 - tail);
    out.q1_max = beta_inv_cdf(out.q1_posterior.a, out.q1_posterior.b, 1.0 - tail);
    return out;
}

/**
 * Least-squares visibility of E ~ -V cos(2 delta):
 * V = -sum(E_i c_i) / sum(c_i^2) with c_i = cos(2 delta_i).
 */
inline double fit_visibility(std::span<const double> e_values,
                             std::span<const double> delta_deg) {
    if (e_values.size() != delta_deg.size() || e_values.size() < 2)
        throw DomainError("fit_visibility: need matching lists of length >= 2");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < e_values.size(); ++i) {
        const double c = std::cos(2.0 * delta_deg[i] * std::numbers::pi / 180.0);
        num += e_values[i] * c;
        den += c * c;
    }
    if (den < 1e-12) throw DomainError("fit_visibility: degenerate design (all cos terms zero)");
    return -num / den;
}

} // namespace diqkd::stats
