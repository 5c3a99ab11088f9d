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
#include <numbers>

#include "diqkd/numerics.hpp"

using namespace diqkd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("erfcx matches reference values", "[numerics]") {
    // reference values from an independent high-precision implementation
    REQUIRE_THAT(numerics::erfcx_nonneg(0.0), WithinRel(1.0, 1e-14));
    REQUIRE_THAT(numerics::erfcx_nonneg(0.5), WithinRel(6.1569034419292579e-01, 1e-13));
    REQUIRE_THAT(numerics::erfcx_nonneg(1.0), WithinRel(4.2758357615580700e-01, 1e-13));
    REQUIRE_THAT(numerics::erfcx_nonneg(5.0), WithinRel(1.1070463773306861e-01, 1e-12));
    REQUIRE_THAT(numerics::erfcx_nonneg(24.9), WithinRel(2.2639987776049506e-02, 1e-11));
    REQUIRE_THAT(numerics::erfcx_nonneg(26.0), WithinRel(2.1683584850562911e-02, 1e-11));
    REQUIRE_THAT(numerics::erfcx_nonneg(40.0), WithinRel(1.4100335983377815e-02, 1e-11));
    REQUIRE_THROWS_AS(numerics::erfcx_nonneg(-0.1), DomainError);
}

TEST_CASE("adaptive Simpson integrates analytic cases", "[numerics]") {
    const double s = numerics::integrate([](double x) { return std::sin(x); }, 0.0,
                                         std::numbers::pi, 1e-12);
    REQUIRE_THAT(s, WithinAbs(2.0, 1e-11));

    // standard normal over [-10, 10]
    const double g = numerics::integrate(
        [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }, -10.0,
        10.0, 1e-12);
    REQUIRE_THAT(g, WithinAbs(1.0, 1e-10));

    // narrow bump centered off the panel midpoints
    const double bump = numerics::integrate(
        [](double x) { return std::exp(-(x - 0.37) * (x - 0.37) / 2e-4); }, 0.0, 1.0, 1e-12);
    REQUIRE_THAT(bump, WithinRel(std::sqrt(std::numbers::pi * 2e-4), 1e-7));

    REQUIRE(numerics::integrate([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
    REQUIRE(numerics::integrate([](double) { return 1.0; }, 2.0, 1.0) == 0.0);
}

TEST_CASE("golden section finds the minimum", "[numerics]") {
    const double x = numerics::golden_section_minimize(
        [](double t) { return (t - 2.345) * (t - 2.345) + 1.0; }, 0.0, 5.0, 1e-8);
    REQUIRE_THAT(x, WithinAbs(2.345, 1e-6));

    // monotone decreasing function: minimum at the right edge
    const double y = numerics::golden_section_minimize([](double t) { return -t; }, 0.0, 1.0, 1e-8);
    REQUIRE_THAT(y, WithinAbs(1.0, 1e-6));
}
