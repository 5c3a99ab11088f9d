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
 * File formats, configuration, and report plumbing.
 *
 * Ledger CSV:  header `round_id,herald_time_ns,x,y,a,b`, one record per line.
 * Table CSV:   header `x,y,n,n_same`, eight data rows.
 * Scan CSV:    header `t_s_ns,S,Q,relative_rate,key_per_time`.
 * Config:      flat key=value lines, `#` comments; CLI flags override.
 * Reports print numbers at six significant digits so golden files stay
 * stable, and embed provenance (input hash, seed, tool version).
 */

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diqkd/emission.hpp"
#include "diqkd/errors.hpp"
#include "diqkd/keyrate.hpp"
#include "diqkd/link.hpp"
#include "diqkd/protocol.hpp"
#include "diqkd/stats.hpp"

namespace diqkd::io {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kDataDirEnvVar = "DIQKD_DATA_DIR";

/// Fixed six-significant-digit formatting used by every report emitter.
inline std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// FNV-1a 64-bit content fingerprint for report provenance.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string file_fingerprint(const std::string& path) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file(path))));
    return buf;
}

/// Resolves a bundled data file, honoring the data-directory env override.
inline std::string data_path(const std::string& filename) {
    if (const char* dir = std::getenv(kDataDirEnvVar); dir != nullptr && *dir != '\0')
        return (std::filesystem::path(dir) / filename).string();
    return (std::filesystem::path("data") / filename).string();
}

namespace detail {

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        if (s.empty() || s[0] == '-') throw std::invalid_argument("negative");
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(context + ": not a non-negative integer: '" + s + "'");
    }
}

inline std::int64_t parse_i64(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(context + ": not an integer: '" + s + "'");
    }
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(context + ": not a number: '" + s + "'");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Correlation table CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kTableHeader = "x,y,n,n_same";

inline std::string write_table_csv(const protocol::CorrelationTable& t) {
    std::ostringstream out;
    out << kTableHeader << "\n";
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 2; ++y)
            out << x << ',' << y << ',' << t.n[x][y] << ',' << t.n_same[x][y] << "\n";
    return out.str();
}

inline protocol::CorrelationTable parse_table_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("table: empty file");
    detail::strip_cr(line);
    if (line != kTableHeader) throw ParseError("table line 1: expected header '" +
                                               std::string(kTableHeader) + "'");
    protocol::CorrelationTable t;
    std::array<std::array<bool, 2>, 4> seen{};
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        const std::string ctx = "table line " + std::to_string(line_no);
        if (fields.size() != 4) throw ParseError(ctx + ": expected 4 fields");
        const std::uint64_t x = detail::parse_u64(fields[0], ctx);
        const std::uint64_t y = detail::parse_u64(fields[1], ctx);
        if (x > 3 || y > 1) throw SchemaError(ctx + ": cell (x,y) out of range");
        if (seen[x][y]) throw SchemaError(ctx + ": duplicate cell");
        seen[x][y] = true;
        t.n[x][y] = detail::parse_u64(fields[2], ctx);
        t.n_same[x][y] = detail::parse_u64(fields[3], ctx);
        if (t.n_same[x][y] > t.n[x][y]) throw SchemaError(ctx + ": n_same exceeds n");
    }
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 2; ++y)
            if (!seen[x][y])
                throw SchemaError("table: missing cell (" + std::to_string(x) + "," +
                                  std::to_string(y) + ")");
    return t;
}

inline protocol::CorrelationTable load_correlation_table(const std::string& path) {
    return parse_table_csv(read_file(path));
}

inline void save_table_csv(const protocol::CorrelationTable& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << write_table_csv(t);
}

// ---------------------------------------------------------------------------
// Event ledger CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kLedgerHeader = "round_id,herald_time_ns,x,y,a,b";

inline std::string write_ledger_csv(const protocol::EventLedger& ledger) {
    std::ostringstream out;
    out << kLedgerHeader << "\n";
    for (const protocol::EventRecord& r : ledger.records())
        out << r.round_id << ',' << r.herald_time_ns << ',' << int(r.x) << ',' << int(r.y) << ','
            << int(r.a) << ',' << int(r.b) << "\n";
    return out.str();
}

inline protocol::EventLedger parse_ledger_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("ledger: empty file");
    detail::strip_cr(line);
    if (line != kLedgerHeader) throw ParseError("ledger line 1: expected header '" +
                                                std::string(kLedgerHeader) + "'");
    protocol::EventLedger ledger;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        const std::string ctx = "ledger line " + std::to_string(line_no);
        if (fields.size() != 6) throw ParseError(ctx + ": expected 6 fields");
        protocol::EventRecord r;
        r.round_id = detail::parse_u64(fields[0], ctx);
        r.herald_time_ns = detail::parse_i64(fields[1], ctx);
        const std::uint64_t x = detail::parse_u64(fields[2], ctx);
        const std::uint64_t y = detail::parse_u64(fields[3], ctx);
        const std::uint64_t a = detail::parse_u64(fields[4], ctx);
        const std::uint64_t b = detail::parse_u64(fields[5], ctx);
        if (x > 3 || y > 1 || a > 1 || b > 1) throw SchemaError(ctx + ": field out of range");
        r.x = static_cast<std::uint8_t>(x);
        r.y = static_cast<std::uint8_t>(y);
        r.a = static_cast<std::uint8_t>(a);
        r.b = static_cast<std::uint8_t>(b);
        try {
            ledger.append(r);
        } catch (const DomainError& e) {
            throw SchemaError(ctx + ": " + e.what());
        }
    }
    return ledger;
}

inline protocol::EventLedger load_ledger(const std::string& path) {
    return parse_ledger_csv(read_file(path));
}

inline void save_ledger_csv(const protocol::EventLedger& ledger, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << write_ledger_csv(ledger);
}

// ---------------------------------------------------------------------------
// Window-scan CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kScanHeader = "t_s_ns,S,Q,relative_rate,key_per_time";

inline std::string write_scan_csv(std::span<const emission::WindowCurvePoint> points) {
    std::ostringstream out;
    out << kScanHeader << "\n";
    for (const auto& p : points)
        out << format_num(p.t_s_ns) << ',' << format_num(p.s_value) << ',' << format_num(p.qber)
            << ',' << format_num(p.relative_rate) << ',' << format_num(p.key_per_time) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Flat key=value configuration
// ---------------------------------------------------------------------------

using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config(const std::string& text) {
    ConfigMap out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string stripped = strip(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = strip(stripped.substr(0, eq));
        const std::string value = strip(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError("config line " + std::to_string(line_no) + ": empty key");
        out[key] = value;
    }
    return out;
}

inline ConfigMap load_config(const std::string& path) { return parse_config(read_file(path)); }

/// Everything a run needs; assembled from defaults, config file, CLI flags.
struct RunConfig {
    link::LinkParams link;
    emission::EmissionTimeModel model;
    emission::WindowConfig window;
    protocol::SettingsMap settings;
    double werner_v = 0.9115;
    double f_ec = 1.15;
    double finite_key_c = keyrate::kFiniteKeyPenaltyDefault;
};

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct Provenance {
    std::string input_path;
    std::string input_fingerprint; // fnv1a64 of the input bytes, hex
    std::optional<std::uint64_t> seed;
    std::string tool_version = kToolVersion;
};

/// Complete analysis of one dataset; rendering is byte-stable for fixed inputs.
struct ReportBundle {
    protocol::BellEstimate bell;
    stats::WorstCaseBounds bounds;
    std::optional<keyrate::KeyRateResult> rate; // absent without a Bell violation
    keyrate::RobustAnchorReport anchor;
    Provenance provenance;
};

inline ReportBundle build_report_bundle(const protocol::CorrelationTable& table,
                                        Provenance provenance, double tail = 0.03) {
    if (provenance.input_path.empty())
        throw DomainError("build_report_bundle: provenance requires an input path");
    ReportBundle bundle;
    bundle.bell = protocol::estimate_bell(table);
    bundle.bounds = stats::worst_case_bounds(table, tail);
    if (bundle.bell.s_value > 2.0 &&
        bundle.bell.s_value <= keyrate::kTwoSqrtTwo + 1e-9)
        bundle.rate = keyrate::dw_chsh_rate(bundle.bell.s_value, bundle.bell.q_avg);
    bundle.anchor = keyrate::robust_anchor_check(bundle.bell.s_value, bundle.bell.q_avg);
    bundle.provenance = std::move(provenance);
    return bundle;
}

inline std::string render_report(const ReportBundle& b) {
    std::ostringstream r;
    r << "diqkd report\n";
    r << "input: " << b.provenance.input_path;
    if (!b.provenance.input_fingerprint.empty())
        r << " (fnv1a64 " << b.provenance.input_fingerprint << ")";
    r << "\n";
    if (b.provenance.seed) r << "seed: " << *b.provenance.seed << "\n";
    r << "tool: diqkd " << b.provenance.tool_version << "\n\n";
    r << "S = " << format_num(b.bell.s_value) << " +/- " << format_num(b.bell.sigma_s) << "\n";
    r << "Q0 = " << format_num(b.bell.q0) << "  Q1 = " << format_num(b.bell.q1)
      << "  Q_pooled = " << format_num(b.bell.q_avg) << "\n";
    r << "worst case (tail " << format_num(b.bounds.tail) << "): S >= "
      << format_num(b.bounds.s_min) << ", Q0 <= " << format_num(b.bounds.q0_max) << ", Q1 <= "
      << format_num(b.bounds.q1_max) << "\n";
    if (b.rate)
        r << "one-basis asymptotic rate = " << format_num(b.rate->rate)
          << (b.rate->clamped ? " (clamped)" : "") << "\n";
    else
        r << "one-basis asymptotic rate undefined (no Bell violation)\n";
    r << "robust-protocol anchor model (" << b.anchor.label
      << "): rate = " << format_num(b.anchor.modeled_rate) << ", "
      << (b.anchor.positive ? "positive" : "non-positive") << "\n";
    return r.str();
}

inline RunConfig run_config_from_map(const ConfigMap& cfg) {
    RunConfig rc;
    const auto get = [&](const char* key, double& slot) {
        if (auto it = cfg.find(key); it != cfg.end())
            slot = detail::parse_double(it->second, std::string("config key ") + key);
    };
    get("attempt_rate_hz", rc.link.attempt_rate_hz);
    get("duty_cycle", rc.link.duty_cycle);
    get("herald_efficiency", rc.link.herald_efficiency);
    get("two_way_latency_us", rc.link.two_way_latency_us);
    get("readout_delay_us_a", rc.link.readout_delay_us_a);
    get("readout_delay_us_b", rc.link.readout_delay_us_b);
    get("per_arm_detection_prob_a", rc.link.per_arm_detection_prob_a);
    get("per_arm_detection_prob_b", rc.link.per_arm_detection_prob_b);
    get("pulse_fwhm_ns", rc.model.pulse_fwhm_ns);
    get("pulse_center_ns", rc.model.pulse_center_ns);
    get("decay_tau_ns", rc.model.decay_tau_ns);
    get("double_emission_fraction", rc.model.double_emission_fraction);
    get("v_max", rc.model.v_max);
    get("q_floor", rc.model.q_floor);
    get("window_t_s_ns", rc.window.t_s_ns);
    get("window_t_e_ns", rc.window.t_e_ns);
    get("werner_v", rc.werner_v);
    get("f_ec", rc.f_ec);
    get("finite_key_c", rc.finite_key_c);
    for (int x = 0; x < 4; ++x)
        get(("alpha_deg_" + std::to_string(x)).c_str(), rc.settings.alpha_deg[x]);
    for (int y = 0; y < 2; ++y)
        get(("beta_deg_" + std::to_string(y)).c_str(), rc.settings.beta_deg[y]);
    return rc;
}

} // namespace diqkd::io
