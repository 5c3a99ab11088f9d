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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "diqkd/link.hpp"

using namespace diqkd;
using namespace diqkd::link;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const emission::EmissionTimeModel kModel{};
const emission::WindowConfig kNoFilter{0.0, 850.0};
} // namespace

TEST_CASE("expected event rate", "[link]") {
    const LinkParams p{};
    REQUIRE_THAT(expected_event_rate(p), WithinRel(0.01274, 1e-12));
    REQUIRE_THAT(1.0 / expected_event_rate(p), WithinAbs(82.0, 8.2)); // within 10%

    LinkParams ideal = p;
    ideal.duty_cycle = 1.0;
    ideal.herald_efficiency = 1.0;
    REQUIRE_THAT(expected_event_rate(ideal), WithinRel(p.attempt_rate_hz, 1e-15));

    LinkParams half = p;
    half.duty_cycle = p.duty_cycle / 2.0;
    REQUIRE_THAT(expected_event_rate(half), WithinRel(expected_event_rate(p) / 2.0, 1e-12));

    LinkParams bad = p;
    bad.duty_cycle = 0.0;
    REQUIRE_THROWS_AS(expected_event_rate(bad), DomainError);
    bad = p;
    bad.herald_efficiency = 1.5;
    REQUIRE_THROWS_AS(expected_event_rate(bad), DomainError);
}

TEST_CASE("run_link is deterministic for a fixed seed", "[link]") {
    const LinkParams p{};
    const auto a = run_link(p, kModel, kNoFilter, 50, 12345);
    const auto b = run_link(p, kModel, kNoFilter, 50, 12345);
    REQUIRE(a.size() == 50);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].attempt_index == b[i].attempt_index);
        REQUIRE(a[i].herald_time_s == b[i].herald_time_s);
        REQUIRE(a[i].contaminated == b[i].contaminated);
    }
    const auto c = run_link(p, kModel, kNoFilter, 50, 54321);
    REQUIRE(a.front().attempt_index != c.front().attempt_index);
}

TEST_CASE("herald times increase and follow the attempt clock", "[link]") {
    LinkParams sure{};
    sure.duty_cycle = 1.0;
    sure.herald_efficiency = 1.0;
    const auto events = run_link(sure, kModel, kNoFilter, 10, 7);
    const double period = 1.0 / sure.attempt_rate_hz;
    const double extra = (sure.two_way_latency_us + sure.readout_delay_us_a) * 1e-6;
    REQUIRE_THAT(events[0].herald_time_s, WithinRel(period, 1e-12));
    for (std::size_t i = 1; i < events.size(); ++i) {
        REQUIRE(events[i].herald_time_s > events[i - 1].herald_time_s);
        REQUIRE(events[i].attempt_index == events[i - 1].attempt_index + 1);
        REQUIRE_THAT(events[i].herald_time_s - events[i - 1].herald_time_s,
                     WithinRel(period + extra, 1e-9));
    }
}

TEST_CASE("mean inter-herald time matches the analytic rate", "[link]") {
    const LinkParams p{};
    const std::uint64_t n = 100;
    const auto events = run_link(p, kModel, kNoFilter, n, 2024);
    const double mean = events.back().herald_time_s / static_cast<double>(n);
    const double analytic = 1.0 / expected_event_rate(p); // no-filter window: thinning is 1
    const double sigma = analytic / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(mean - analytic) < 3.0 * sigma);
}

TEST_CASE("window thinning slows the link and marks contaminated heralds", "[link]") {
    const LinkParams p{};
    const emission::WindowConfig filtered{755.0, 850.0};
    const std::uint64_t n = 400;
    const auto events = run_link(p, kModel, filtered, n, 99);

    const emission::EventMix mix = emission::event_mix(kModel, filtered);
    const emission::EventMix full = emission::event_mix_unfiltered(kModel, filtered.t_e_ns);
    const double analytic = 1.0 / (expected_event_rate(p) * mix.total() / full.total());
    const double mean = events.back().herald_time_s / static_cast<double>(n);
    REQUIRE(std::abs(mean - analytic) < 3.0 * analytic / std::sqrt(static_cast<double>(n)));

    // contamination flag rate ~ Binomial(n, bad/total)
    std::uint64_t contaminated = 0;
    for (const auto& ev : events) contaminated += ev.contaminated ? 1 : 0;
    const double p_bad = mix.bad / mix.total();
    const double sd = std::sqrt(static_cast<double>(n) * p_bad * (1.0 - p_bad));
    REQUIRE(std::abs(static_cast<double>(contaminated) - static_cast<double>(n) * p_bad) <
            5.0 * sd + 1.0);
}

TEST_CASE("zero efficiency times out", "[link]") {
    LinkParams p{};
    p.herald_efficiency = 0.0;
    REQUIRE_THROWS_AS(run_link(p, kModel, kNoFilter, 1, 1, 1000), NumericError);

    LinkParams slow{};
    REQUIRE_THROWS_AS(run_link(slow, kModel, kNoFilter, 1, 1, 10), NumericError);

    REQUIRE_THROWS_AS(run_link(LinkParams{}, kModel, kNoFilter, 0, 1), DomainError);
}
