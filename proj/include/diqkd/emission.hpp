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
 * Phenomenological photon emission-time model and acceptance-window
 * machinery.
 *
 * A heralding coincidence keeps only events with both photons inside the
 * acceptance window [t_s, t_e]. Three emission-time densities drive the
 * model, all in nanoseconds:
 *
 *   single(t)        excitation pulse (Gaussian, given FWHM) convolved with
 *                    the exponential decay of lifetime tau; the ordinary
 *                    entanglement photon.
 *   double_second(t) single convolved once more with the decay: the second
 *                    photon of a double-emission process, emitted after a
 *                    re-excitation.
 *   first_of_double  the first photon of a double emission: the single
 *                    density reweighted by the probability that enough of
 *                    the excitation pulse remains to re-excite the atom
 *                    (Gaussian pulse survival), so it is concentrated early.
 *
 * Good heralds are pairs of independent single photons. Contaminated heralds
 * are double-emission events whose two photons (first early, second late)
 * fake a coincidence; they carry no entanglement and enter as white noise.
 * Starting the window after the pulse suppresses them because their first
 * photon is necessarily emitted while the pulse is still on.
 *
 * Default constants are calibrated so that the standard window reproduces
 * the measured S = 2.578, Q = 0.078, a two-photon acceptance near 27%, and
 * a factor-4 rate reduction (scripts/calibrate_emission.py).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "diqkd/errors.hpp"
#include "diqkd/numerics.hpp"

namespace diqkd::emission {

inline constexpr double kTwoSqrtTwo = 2.8284271247461903;

/// FWHM-to-sigma factor for a Gaussian, 2 sqrt(2 ln 2).
inline constexpr double kFwhmToSigma = 2.3548200450309493;

struct EmissionTimeModel {
    double pulse_fwhm_ns = 22.0;
    double pulse_center_ns = 738.0;
    double decay_tau_ns = 26.2;
    /// Fraction of heralds from double-emission processes before windowing.
    double double_emission_fraction = 0.10;
    /// Visibility of uncontaminated events.
    double v_max = 0.9156;
    /// Setting-independent residual error added to the QBER.
    double q_floor = 0.03365;
};

inline void validate(const EmissionTimeModel& m) {
    if (!(m.pulse_fwhm_ns > 0.0) || !(m.decay_tau_ns > 0.0))
        throw DomainError("EmissionTimeModel: times must be positive");
    if (!(m.double_emission_fraction >= 0.0 && m.double_emission_fraction < 1.0))
        throw DomainError("EmissionTimeModel: double_emission_fraction outside [0, 1)");
    if (!(m.v_max >= 0.0 && m.v_max <= 1.0))
        throw DomainError("EmissionTimeModel: v_max outside [0, 1]");
    if (!(m.q_floor >= 0.0 && m.q_floor < 0.5))
        throw DomainError("EmissionTimeModel: q_floor outside [0, 0.5)");
}

/// Acceptance window [t_s, t_e] in nanoseconds.
struct WindowConfig {
    double t_s_ns = 0.0;
    double t_e_ns = 850.0;
};

inline void validate(const WindowConfig& w) {
    if (!(w.t_s_ns < w.t_e_ns)) throw DomainError("WindowConfig: t_s must be below t_e");
}

enum class EmissionKind { single, double_second };

inline double pulse_sigma_ns(const EmissionTimeModel& m) {
    return m.pulse_fwhm_ns / kFwhmToSigma;
}

/// Interval outside which every density in the model carries less than
/// about 1e-9 of probability mass; window integrals clip to it.
struct Support {
    double lo;
    double hi;
};

inline Support model_support(const EmissionTimeModel& m) {
    return {m.pulse_center_ns - 5.0 * m.pulse_fwhm_ns,
            m.pulse_center_ns + 5.0 * m.pulse_fwhm_ns + 20.0 * m.decay_tau_ns};
}

namespace detail {

inline double gaussian_pdf(double t, double mu, double sigma) {
    const double z = (t - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Exponentially modified Gaussian, the Gaussian (*) Exp(1/tau) density.
inline double emg_pdf(double t, double mu, double sigma, double lambda) {
    const double v = (mu + lambda * sigma * sigma - t) / (std::numbers::sqrt2 * sigma);
    if (v >= 0.0) {
        const double z = (t - mu) / sigma;
        return 0.5 * lambda * std::exp(-0.5 * z * z) * numerics::erfcx_nonneg(v);
    }
    const double u = lambda * (mu - t) + 0.5 * lambda * lambda * sigma * sigma;
    return 0.5 * lambda * std::exp(u) * std::erfc(v);
}

} // namespace detail

/**
 * Emission-time density (1/ns) at time t. single is the EMG; double_second
 * is its convolution with one more exponential decay, evaluated in closed
 * form as lam (t - mu - lam sigma^2) single(t) + (lam sigma)^2 gauss(t).
 */
inline double emission_density(const EmissionTimeModel& m, EmissionKind kind, double t) {
    validate(m);
    const double mu = m.pulse_center_ns;
    const double sigma = pulse_sigma_ns(m);
    const double lambda = 1.0 / m.decay_tau_ns;
    const double s = detail::emg_pdf(t, mu, sigma, lambda);
    if (kind == EmissionKind::single) return s;
    const double d = lambda * (t - mu - lambda * sigma * sigma) * s +
                     lambda * lambda * sigma * sigma * detail::gaussian_pdf(t, mu, sigma);
    return d > 0.0 ? d : 0.0;
}

/**
 * Unnormalized first-of-double weight: single(t) times the Gaussian survival
 * of the pulse at t (the chance a re-excitation can still happen).
 */
inline double first_of_double_weight(const EmissionTimeModel& m, double t) {
    const double sigma = pulse_sigma_ns(m);
    const double z = (t - m.pulse_center_ns) / (std::numbers::sqrt2 * sigma);
    return emission_density(m, EmissionKind::single, t) * 0.5 * std::erfc(z);
}

/// Window integrals of the three densities (first-of-double normalized).
struct WindowIntegrals {
    double single = 0.0;
    double double_second = 0.0;
    double first_of_double = 0.0;
};

inline WindowIntegrals window_integrals(const EmissionTimeModel& m, const WindowConfig& w,
                                        double tol = 1e-9) {
    validate(m);
    validate(w);
    const Support sup = model_support(m);
    const double lo = std::max(w.t_s_ns, sup.lo);
    const double hi = std::min(w.t_e_ns, sup.hi);
    WindowIntegrals out;
    if (!(lo < hi)) return out;
    out.single = numerics::integrate(
        [&](double t) { return emission_density(m, EmissionKind::single, t); }, lo, hi, tol);
    out.double_second = numerics::integrate(
        [&](double t) { return emission_density(m, EmissionKind::double_second, t); }, lo, hi, tol);
    const double z = numerics::integrate([&](double t) { return first_of_double_weight(m, t); },
                                         sup.lo, sup.hi, tol);
    const double f = numerics::integrate([&](double t) { return first_of_double_weight(m, t); },
                                         lo, hi, tol);
    out.first_of_double = z > 0.0 ? std::clamp(f / z, 0.0, 1.0) : 0.0;
    out.single = std::clamp(out.single, 0.0, 1.0);
    out.double_second = std::clamp(out.double_second, 0.0, 1.0);
    return out;
}

struct WindowAcceptance {
    /// Probability that both photons of a good herald fall in the window.
    double accept_good = 0.0;
    /// Probability that both photons of a double-emission herald do.
    double accept_bad = 0.0;
};

inline WindowAcceptance window_acceptance(const EmissionTimeModel& m, const WindowConfig& w) {
    const WindowIntegrals wi = window_integrals(m, w);
    return {wi.single * wi.single, wi.first_of_double * wi.double_second};
}

/// Windowed herald mix: rates of good and contaminated accepted events,
/// as fractions of all generated two-photon events.
struct EventMix {
    double good = 0.0;
    double bad = 0.0;
    double total() const { return good + bad; }
};

inline EventMix event_mix(const EmissionTimeModel& m, const WindowConfig& w) {
    const WindowAcceptance acc = window_acceptance(m, w);
    const double e2 = m.double_emission_fraction;
    return {(1.0 - e2) * acc.accept_good, e2 * acc.accept_bad};
}

/// Event mix of the unfiltered window [support lo, t_e].
inline EventMix event_mix_unfiltered(const EmissionTimeModel& m, double t_e_ns) {
    return event_mix(m, WindowConfig{model_support(m).lo, t_e_ns});
}

/**
 * Visibility of the windowed event mix: accepted contaminated events carry
 * zero visibility, so V = v_max * good / (good + bad).
 */
inline double effective_visibility(const EmissionTimeModel& m, const WindowConfig& w) {
    const EventMix mix = event_mix(m, w);
    if (!(mix.total() > 0.0))
        throw DomainError("effective_visibility: window accepts no events");
    return m.v_max * mix.good / mix.total();
}

struct WindowCurvePoint {
    double t_s_ns = 0.0;
    double s_value = 0.0;
    double qber = 0.0;
    double relative_rate = 0.0;
    double key_per_time = 0.0;
};

using RateFn = std::function<double(double s, double q)>;

/**
 * Sweeps the window start over ts_grid at fixed t_e and reports S, QBER,
 * event rate relative to the unfiltered window, and rate-weighted key yield.
 */
inline std::vector<WindowCurvePoint> window_scan(const EmissionTimeModel& m,
                                                 std::span<const double> ts_grid, double t_e_ns,
                                                 const RateFn& rate_fn) {
    validate(m);
    if (ts_grid.empty()) throw DomainError("window_scan: empty grid");
    for (std::size_t i = 0; i < ts_grid.size(); ++i) {
        if (!(ts_grid[i] < t_e_ns)) throw DomainError("window_scan: grid point not below t_e");
        if (i > 0 && !(ts_grid[i] > ts_grid[i - 1]))
            throw DomainError("window_scan: grid not sorted ascending");
    }
    const double full = event_mix_unfiltered(m, t_e_ns).total();
    std::vector<WindowCurvePoint> out;
    out.reserve(ts_grid.size());
    for (double ts : ts_grid) {
        const WindowConfig w{ts, t_e_ns};
        const EventMix mix = event_mix(m, w);
        WindowCurvePoint pt;
        pt.t_s_ns = ts;
        if (mix.total() > 0.0) {
            const double v = m.v_max * mix.good / mix.total();
            pt.s_value = kTwoSqrtTwo * v;
            pt.qber = 0.5 * (1.0 - v) + m.q_floor;
            pt.relative_rate = full > 0.0 ? mix.total() / full : 0.0;
            pt.key_per_time = pt.relative_rate * std::max(0.0, rate_fn(pt.s_value, pt.qber));
        }
        out.push_back(pt);
    }
    return out;
}

/**
 * Window start maximizing key_per_time: coarse 1 ns grid, then golden-section
 * refinement to 0.01 ns. Ties break toward smaller t_s (higher rate).
 * Throws DomainError when the rate function is non-positive everywhere.
 */
inline double optimize_window(const EmissionTimeModel& m, double t_e_ns, const RateFn& rate_fn,
                              double search_lo_ns, double search_hi_ns) {
    validate(m);
    if (!(search_lo_ns < search_hi_ns) || !(search_hi_ns < t_e_ns))
        throw DomainError("optimize_window: invalid search bounds");
    const double full = event_mix_unfiltered(m, t_e_ns).total();
    const auto key_per_time = [&](double ts) {
        const EventMix mix = event_mix(m, WindowConfig{ts, t_e_ns});
        if (!(mix.total() > 0.0) || !(full > 0.0)) return 0.0;
        const double v = m.v_max * mix.good / mix.total();
        const double s = kTwoSqrtTwo * v;
        const double q = 0.5 * (1.0 - v) + m.q_floor;
        return mix.total() / full * std::max(0.0, rate_fn(s, q));
    };

    double best_ts = search_lo_ns;
    double best_val = key_per_time(search_lo_ns);
    for (double ts = search_lo_ns + 1.0; ts < search_hi_ns; ts += 1.0) {
        const double val = key_per_time(ts);
        if (val > best_val) {
            best_val = val;
            best_ts = ts;
        }
    }
    {
        const double val = key_per_time(search_hi_ns);
        if (val > best_val) {
            best_val = val;
            best_ts = search_hi_ns;
        }
    }
    if (!(best_val > 0.0)) throw DomainError("optimize_window: no positive key rate in bounds");

    const double lo = std::max(search_lo_ns, best_ts - 1.0);
    const double hi = std::min(search_hi_ns, best_ts + 1.0);
    const double refined =
        numerics::golden_section_minimize([&](double ts) { return -key_per_time(ts); }, lo, hi, 0.01);
    const double refined_val = key_per_time(refined);
    if (refined_val > best_val || (refined_val == best_val && refined < best_ts)) return refined;
    return best_ts;
}

} // namespace diqkd::emission
