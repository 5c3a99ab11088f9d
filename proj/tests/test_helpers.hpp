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

#pragma once

#include <array>
#include <cstdint>

#include "diqkd/protocol.hpp"

namespace diqkd::testing {

/// Measured correlation counts used as the reference dataset in tests.
inline protocol::CorrelationTable reference_table() {
    protocol::CorrelationTable t;
    const std::array<std::array<std::uint64_t, 2>, 4> n = {{{448, 408}, {425, 412}, {389, 403}, {434, 423}}};
    const std::array<std::array<std::uint64_t, 2>, 4> same = {{{35, 198}, {205, 32}, {78, 326}, {73, 64}}};
    t.n = n;
    t.n_same = same;
    return t;
}

/// Deterministic ledger realizing exactly the counts of a table.
inline protocol::EventLedger ledger_from_table(const protocol::CorrelationTable& t) {
    protocol::EventLedger ledger;
    std::uint64_t round = 0;
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 2; ++y) {
            for (std::uint64_t i = 0; i < t.n[x][y]; ++i) {
                protocol::EventRecord r;
                r.round_id = round;
                r.herald_time_ns = static_cast<std::int64_t>(round);
                r.x = static_cast<std::uint8_t>(x);
                r.y = static_cast<std::uint8_t>(y);
                const bool same = i < t.n_same[x][y];
                r.a = 1;
                r.b = same ? 1 : 0;
                ledger.append(r);
                ++round;
            }
        }
    }
    return ledger;
}

} // namespace diqkd::testing
