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
 * Protocol rounds, the append-only event ledger, and the CHSH/QBER
 * estimators.
 *
 * Inputs X in {0..3} map to Alice's readout angles and Y in {0, 1} to Bob's.
 * Every statistic derives from tabulate(ledger) so the simulation and
 * analysis paths cannot drift apart. Key outputs are anti-correlated by
 * convention, so rounds with a = b count as errors.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diqkd/errors.hpp"
#include "diqkd/quantum.hpp"
#include "diqkd/rng.hpp"

namespace diqkd::protocol {

/// Input-to-angle map; defaults are the measured device's settings.
struct SettingsMap {
    std::array<double, 4> alpha_deg = {-22.5, 22.5, -45.0, 0.0};
    std::array<double, 2> beta_deg = {-22.5, 22.5};
};

struct EventRecord {
    std::uint64_t round_id = 0;
    std::int64_t herald_time_ns = 0;
    std::uint8_t x = 0; // in {0..3}
    std::uint8_t y = 0; // in {0, 1}
    std::uint8_t a = 0; // in {0, 1}
    std::uint8_t b = 0; // in {0, 1}
};

inline void validate(const EventRecord& r) {
    if (r.x > 3 || r.y > 1 || r.a > 1 || r.b > 1)
        throw DomainError("EventRecord: field out of range");
}

/// Append-only round log with strictly increasing round ids.
class EventLedger {
  public:
    void append(const EventRecord& r) {
        validate(r);
        if (!records_.empty() && r.round_id <= records_.back().round_id)
            throw DomainError("EventLedger: round_id must be strictly increasing");
        records_.push_back(r);
    }

    const std::vector<EventRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

  private:
    std::vector<EventRecord> records_;
};

/// Per-setting round counts and same-outcome counts.
struct CorrelationTable {
    std::array<std::array<std::uint64_t, 2>, 4> n{};      // n[x][y]
    std::array<std::array<std::uint64_t, 2>, 4> n_same{}; // rounds with a == b
};

inline void validate(const CorrelationTable& t) {
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 2; ++y)
            if (t.n_same[x][y] > t.n[x][y])
                throw SchemaError("CorrelationTable: n_same exceeds n in cell (" +
                                  std::to_string(x) + "," + std::to_string(y) + ")");
}

struct BellEstimate {
    /// Correlators and their binomial errors for the CHSH cells, indexed [x-2][y].
    std::array<std::array<double, 2>, 2> e{};
    std::array<std::array<double, 2>, 2> sigma_e{};
    double s_value = 0.0;
    double sigma_s = 0.0;
    double q0 = 0.0;
    double q1 = 0.0;
    /// Pooled QBER (all key rounds together).
    double q_avg = 0.0;
    /// Unpooled mean (Q0 + Q1)/2, kept for diagnostics.
    double q_mean = 0.0;
};

/// Joint-outcome sampler for given readout angles (degrees).
using Sampler = std::function<std::pair<int, int>(double alpha_deg, double beta_deg, RandomStream&)>;

/// Draws outcomes from a distribution; order p00, p01, p10, p11.
inline std::pair<int, int> sample_outcome(const quantum::OutcomeDistribution& d, RandomStream& rng) {
    const double u = rng.next_uniform01();
    double acc = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            acc += d.p[a][b];
            if (u < acc) return {a, b};
        }
    return {1, 1};
}

/**
 * Sampler backed by the Born-rule oracle on a Werner state. Distributions
 * are cached per angle pair, so repeated rounds cost one uniform draw.
 * The cache is unsynchronized; each concurrent run owns its own sampler.
 */
inline Sampler make_werner_sampler(double v, quantum::MeasurementConvention conv = {}) {
    auto state = std::make_shared<quantum::TwoQubitState>(quantum::werner(v));
    auto cache = std::make_shared<std::map<std::pair<double, double>, quantum::OutcomeDistribution>>();
    return [state, cache, conv](double alpha_deg, double beta_deg, RandomStream& rng) {
        auto key = std::make_pair(alpha_deg, beta_deg);
        auto it = cache->find(key);
        if (it == cache->end()) {
            const quantum::OutcomeDistribution d = quantum::joint_outcome_probs(
                *state, {alpha_deg, 0.0}, {beta_deg, 0.0}, conv);
            it = cache->emplace(key, d).first;
        }
        return sample_outcome(it->second, rng);
    };
}

/// Thrown when the sampler fails mid-run; carries the partial ledger.
class AbortedRunError : public std::runtime_error {
  public:
    AbortedRunError(const std::string& what, EventLedger partial)
        : std::runtime_error(what), partial_ledger(std::move(partial)) {}
    EventLedger partial_ledger;
};

/**
 * Runs n_rounds protocol rounds. Per round the seeded stream draws X from
 * two bits, Y from one bit, then queries the sampler with the mapped angles.
 * Optional herald_times_ns supplies per-round timestamps (defaults to the
 * round index).
 */
inline EventLedger run_protocol(std::uint64_t n_rounds, const Sampler& sampler,
                                const SettingsMap& settings, std::uint64_t seed,
                                std::span<const std::int64_t> herald_times_ns = {}) {
    if (n_rounds < 1) throw DomainError("run_protocol: n_rounds must be >= 1");
    if (!herald_times_ns.empty() && herald_times_ns.size() < n_rounds)
        throw DomainError("run_protocol: fewer herald times than rounds");
    RandomStream rng(seed);
    EventLedger ledger;
    for (std::uint64_t i = 0; i < n_rounds; ++i) {
        const int x = static_cast<int>(rng.next_bits(2));
        const int y = static_cast<int>(rng.next_bits(1));
        std::pair<int, int> outcome;
        try {
            outcome = sampler(settings.alpha_deg[static_cast<std::size_t>(x)],
                              settings.beta_deg[static_cast<std::size_t>(y)], rng);
        } catch (const std::exception& e) {
            throw AbortedRunError("run_protocol: sampler failed at round " + std::to_string(i) +
                                      ": " + e.what(),
                                  std::move(ledger));
        }
        EventRecord rec;
        rec.round_id = i;
        rec.herald_time_ns = herald_times_ns.empty() ? static_cast<std::int64_t>(i)
                                                     : herald_times_ns[i];
        rec.x = static_cast<std::uint8_t>(x);
        rec.y = static_cast<std::uint8_t>(y);
        rec.a = static_cast<std::uint8_t>(outcome.first);
        rec.b = static_cast<std::uint8_t>(outcome.second);
        ledger.append(rec);
    }
    return ledger;
}

inline CorrelationTable tabulate(const EventLedger& ledger) {
    CorrelationTable t;
    for (const EventRecord& r : ledger.records()) {
        t.n[r.x][r.y] += 1;
        if (r.a == r.b) t.n_same[r.x][r.y] += 1;
    }
    return t;
}

namespace detail {

inline double cell_correlator(const CorrelationTable& t, int x, int y) {
    const double n = static_cast<double>(t.n[x][y]);
    const double same = static_cast<double>(t.n_same[x][y]);
    return (2.0 * same - n) / n;
}

inline void require_cell(const CorrelationTable& t, int x, int y) {
    if (t.n[x][y] == 0)
        throw InsufficientDataError("estimate_bell: empty cell (" + std::to_string(x) + "," +
                                    std::to_string(y) + ")");
}

} // namespace detail

/**
 * CHSH value S = E_{2,1} - E_{2,0} - E_{3,0} - E_{3,1}, per-cell binomial
 * errors, and the QBERs of the two key settings.
 */
inline BellEstimate estimate_bell(const CorrelationTable& t) {
    validate(t);
    for (int x : {2, 3})
        for (int y : {0, 1}) detail::require_cell(t, x, y);
    detail::require_cell(t, 0, 0);
    detail::require_cell(t, 1, 1);

    BellEstimate out;
    double var_s = 0.0;
    for (int x : {2, 3}) {
        for (int y : {0, 1}) {
            const double e = detail::cell_correlator(t, x, y);
            const double sigma =
                std::sqrt((1.0 - e * e) / static_cast<double>(t.n[x][y]));
            out.e[x - 2][y] = e;
            out.sigma_e[x - 2][y] = sigma;
            var_s += sigma * sigma;
        }
    }
    out.s_value = out.e[0][1] - out.e[0][0] - out.e[1][0] - out.e[1][1];
    out.sigma_s = std::sqrt(var_s);
    out.q0 = static_cast<double>(t.n_same[0][0]) / static_cast<double>(t.n[0][0]);
    out.q1 = static_cast<double>(t.n_same[1][1]) / static_cast<double>(t.n[1][1]);
    out.q_avg = static_cast<double>(t.n_same[0][0] + t.n_same[1][1]) /
                static_cast<double>(t.n[0][0] + t.n[1][1]);
    out.q_mean = 0.5 * (out.q0 + out.q1);
    return out;
}

struct SiftResult {
    std::vector<std::uint8_t> key_a;
    std::vector<std::uint8_t> key_b;
    /// Fraction of sifted rounds with a == b; absent when nothing was sifted.
    std::optional<double> mismatch_rate;
};

/// Keeps rounds with matching key settings (x = y in {0, 1}) in ledger order.
inline SiftResult sift(const EventLedger& ledger) {
    SiftResult out;
    std::uint64_t mismatches = 0;
    for (const EventRecord& r : ledger.records()) {
        if (r.x <= 1 && r.x == r.y) {
            out.key_a.push_back(r.a);
            out.key_b.push_back(r.b);
            if (r.a == r.b) ++mismatches;
        }
    }
    if (!out.key_a.empty())
        out.mismatch_rate = static_cast<double>(mismatches) / static_cast<double>(out.key_a.size());
    return out;
}

} // namespace diqkd::protocol
