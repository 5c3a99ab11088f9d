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
 * Discrete-event simulation of the event-ready entanglement link.
 *
 * Attempts tick at attempt_rate * duty_cycle. Each attempt heralds with
 * probability herald_efficiency thinned by the acceptance-window factor of
 * the emission model. After a herald the next attempt waits for the two-way
 * ready signal plus the slower readout. Runs are reproducible for a fixed
 * seed; inter-herald gaps are sampled geometrically so a run costs O(heralds)
 * rather than O(attempts).
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "diqkd/emission.hpp"
#include "diqkd/errors.hpp"
#include "diqkd/rng.hpp"

namespace diqkd::link {

struct LinkParams {
    double attempt_rate_hz = 52000.0;
    double duty_cycle = 0.5;
    /// Herald probability per attempt pair with the unfiltered window.
    double herald_efficiency = 0.49e-6;
    double two_way_latency_us = 7.0;
    double readout_delay_us_a = 25.55;
    double readout_delay_us_b = 16.7;
    /// Per-arm photon detection probabilities (diagnostic only).
    double per_arm_detection_prob_a = 5.98e-3;
    double per_arm_detection_prob_b = 1.44e-3;
};

inline void validate(const LinkParams& p) {
    if (!(p.attempt_rate_hz >= 0.0)) throw DomainError("LinkParams: negative attempt rate");
    if (!(p.duty_cycle > 0.0 && p.duty_cycle <= 1.0))
        throw DomainError("LinkParams: duty_cycle outside (0, 1]");
    for (double prob : {p.herald_efficiency, p.per_arm_detection_prob_a, p.per_arm_detection_prob_b})
        if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("LinkParams: probability outside [0, 1]");
    if (!(p.two_way_latency_us >= 0.0) || !(p.readout_delay_us_a >= 0.0) ||
        !(p.readout_delay_us_b >= 0.0))
        throw DomainError("LinkParams: negative latency");
}

/// Heralds per second: attempt_rate * duty_cycle * herald_efficiency.
inline double expected_event_rate(const LinkParams& p) {
    validate(p);
    return p.attempt_rate_hz * p.duty_cycle * p.herald_efficiency;
}

struct HeraldEvent {
    std::uint64_t attempt_index = 0;
    double herald_time_s = 0.0;
    /// Hidden truth for diagnostics: herald came from a double emission.
    bool contaminated = false;
};

/**
 * Simulates n_heralds heralded events. Throws NumericError when the attempt
 * budget is exhausted before the next herald (e.g. zero efficiency).
 */
inline std::vector<HeraldEvent> run_link(const LinkParams& p, const emission::EmissionTimeModel& m,
                                         const emission::WindowConfig& w, std::uint64_t n_heralds,
                                         std::uint64_t seed,
                                         std::uint64_t attempt_cap = 1'000'000'000'000ULL) {
    validate(p);
    emission::validate(m);
    emission::validate(w);
    if (n_heralds < 1) throw DomainError("run_link: n_heralds must be >= 1");

    const emission::EventMix mix = emission::event_mix(m, w);
    const emission::EventMix full = emission::event_mix_unfiltered(m, w.t_e_ns);
    const double thinning = full.total() > 0.0 ? mix.total() / full.total() : 0.0;
    const double p_herald = p.herald_efficiency * thinning;
    const double p_contaminated = mix.total() > 0.0 ? mix.bad / mix.total() : 0.0;

    const double attempt_period_s = 1.0 / (p.attempt_rate_hz * p.duty_cycle);
    const double post_herald_delay_s =
        (p.two_way_latency_us + std::max(p.readout_delay_us_a, p.readout_delay_us_b)) * 1e-6;

    RandomStream rng(seed);
    std::vector<HeraldEvent> events;
    events.reserve(n_heralds);
    std::uint64_t attempts = 0;
    double clock_s = 0.0;
    for (std::uint64_t i = 0; i < n_heralds; ++i) {
        const std::uint64_t budget = attempt_cap - attempts;
        const std::uint64_t k = rng.next_geometric(p_herald, budget);
        if (k > budget)
            throw NumericError("run_link: no herald within attempt cap (efficiency too low)");
        attempts += k;
        clock_s += static_cast<double>(k) * attempt_period_s;
        HeraldEvent ev;
        ev.attempt_index = attempts;
        ev.herald_time_s = clock_s;
        ev.contaminated = rng.next_bernoulli(p_contaminated);
        events.push_back(ev);
        clock_s += post_herald_delay_s;
    }
    return events;
}

} // namespace diqkd::link
