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
 * Seeded random stream with fully specified draw semantics.
 *
 * std::mt19937_64 output is pinned by the C++ standard, but the standard
 * distributions are not; every transformation here is spelled out so that a
 * (seed, draw order) pair reproduces the same stream on any platform.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "diqkd/errors.hpp"

namespace diqkd {

class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Top k bits of the next word, k in [1, 64].
    std::uint32_t next_bits(int k) {
        if (k < 1 || k > 32) throw DomainError("RandomStream::next_bits: k out of range");
        return static_cast<std::uint32_t>(engine_() >> (64 - k));
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double next_uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool next_bernoulli(double p) { return next_uniform01() < p; }

    /**
     * Number of Bernoulli(p) trials up to and including the first success,
     * sampled by inversion. Returns at least 1; returns cap+1 when the draw
     * exceeds cap (so callers can detect lack of progress).
     */
    std::uint64_t next_geometric(double p, std::uint64_t cap) {
        if (p >= 1.0) return 1;
        if (p <= 0.0) return cap + 1;
        const double u = next_uniform01();
        const double k = std::floor(std::log1p(-u) / std::log1p(-p)) + 1.0;
        if (!(k >= 1.0) || k > static_cast<double>(cap)) return cap + 1;
        return static_cast<std::uint64_t>(k);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace diqkd
