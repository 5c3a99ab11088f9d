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
 * Command-line dispatch. Subcommands: simulate, analyze, bayes, keyrate,
 * finite-key, window-scan, optimize-window, rate-budget.
 *
 * Exit codes: 0 success, 1 domain/parse error, 2 numeric failure. Reports
 * are deterministic for fixed inputs.
 */

#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diqkd/emission.hpp"
#include "diqkd/io.hpp"
#include "diqkd/keyrate.hpp"
#include "diqkd/link.hpp"
#include "diqkd/protocol.hpp"
#include "diqkd/quantum.hpp"
#include "diqkd/stats.hpp"

namespace diqkd::cli {

namespace detail {

inline void write_output(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write file: " + path);
    f << text;
}

inline std::string provenance_line(const std::string& path) {
    return "input: " + path + " (fnv1a64 " + io::file_fingerprint(path) + ")";
}

inline keyrate::RateFn clamped_dw_rate() {
    return [](double s, double q) {
        if (s <= 2.0 || q > 0.5) return 0.0;
        return keyrate::dw_chsh_rate(std::min(s, keyrate::kTwoSqrtTwo), q).rate;
    };
}

/// All-eight correlators and angle differences for one Bob setting row.
inline void visibility_row(const protocol::CorrelationTable& t, const protocol::SettingsMap& s,
                           int y, std::vector<double>& e, std::vector<double>& delta) {
    e.clear();
    delta.clear();
    for (int x = 0; x < 4; ++x) {
        if (t.n[x][y] == 0) continue;
        e.push_back((2.0 * static_cast<double>(t.n_same[x][y]) - static_cast<double>(t.n[x][y])) /
                    static_cast<double>(t.n[x][y]));
        delta.push_back(s.alpha_deg[x] - s.beta_deg[y]);
    }
}

inline std::string analyze_report(const protocol::CorrelationTable& table,
                                  const protocol::SettingsMap& settings,
                                  const std::string& provenance) {
    const protocol::BellEstimate est = protocol::estimate_bell(table);
    std::uint64_t rounds = 0;
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 2; ++y) rounds += table.n[x][y];

    std::ostringstream r;
    r << "diqkd analyze report\n";
    r << provenance << "\n";
    r << "tool: diqkd " << io::kToolVersion << "\n\n";
    r << "rounds: " << rounds << "\n";
    for (int x : {2, 3})
        for (int y : {0, 1})
            r << "E[" << x << "][" << y << "] = " << io::format_num(est.e[x - 2][y])
              << "  sigma " << io::format_num(est.sigma_e[x - 2][y]) << "\n";
    r << "S = " << io::format_num(est.s_value) << "\n";
    r << "sigma_S = " << io::format_num(est.sigma_s) << "\n";
    r << "Q0 = " << io::format_num(est.q0) << "\n";
    r << "Q1 = " << io::format_num(est.q1) << "\n";
    r << "Q_pooled = " << io::format_num(est.q_avg) << "\n";
    r << "Q_mean = " << io::format_num(est.q_mean) << "\n";
    std::vector<double> e, delta;
    for (int y : {0, 1}) {
        visibility_row(table, settings, y, e, delta);
        if (e.size() >= 2)
            r << "visibility[Y=" << y << "] = " << io::format_num(stats::fit_visibility(e, delta))
              << "\n";
    }
    return r.str();
}

inline std::string bayes_report(const stats::WorstCaseBounds& wc, const std::string& provenance,
                                const std::string& method) {
    std::ostringstream r;
    r << "diqkd bayes report\n";
    r << provenance << "\n";
    r << "tool: diqkd " << io::kToolVersion << "\n\n";
    r << "tail error: " << io::format_num(wc.tail) << "\n";
    r << "win count (" << method << "): " << wc.win_count << " of " << wc.n_chsh << "\n";
    r << "posterior win: Beta(" << io::format_num(wc.win_posterior.a) << ","
      << io::format_num(wc.win_posterior.b) << ")\n";
    r << "posterior Q0: Beta(" << io::format_num(wc.q0_posterior.a) << ","
      << io::format_num(wc.q0_posterior.b) << ")\n";
    r << "posterior Q1: Beta(" << io::format_num(wc.q1_posterior.a) << ","
      << io::format_num(wc.q1_posterior.b) << ")\n";
    r << "S_min = " << io::format_num(wc.s_min) << "\n";
    r << "Q0_max = " << io::format_num(wc.q0_max) << "\n";
    r << "Q1_max = " << io::format_num(wc.q1_max) << "\n";
    r << "Q_max_joint = " << io::format_num(std::max(wc.q0_max, wc.q1_max)) << "\n";
    return r.str();
}

} // namespace detail

/// Parses argv (without the program name) and runs one subcommand.
inline int dispatch(std::vector<std::string> args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"Simulator and analysis toolkit for device-independent QKD over a heralded "
                 "entanglement link"};
    app.name("diqkd");
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "flat key=value config file");

    // deferred so --config is applied before field overrides
    struct Overrides {
        std::optional<double> window_ts, window_te, werner_v, eps2, v_max, q_floor, pulse_center;
    } ov;
    app.add_option("--window-ts", ov.window_ts, "acceptance window start [ns]");
    app.add_option("--window-te", ov.window_te, "acceptance window end [ns]");
    app.add_option("--werner-v", ov.werner_v, "visibility of the simulated state");
    app.add_option("--eps2", ov.eps2, "double-emission fraction");
    app.add_option("--v-max", ov.v_max, "visibility of uncontaminated events");
    app.add_option("--q-floor", ov.q_floor, "setting-independent residual QBER");
    app.add_option("--pulse-center", ov.pulse_center, "excitation pulse center [ns]");

    const auto effective_config = [&]() {
        io::RunConfig rc = config_path.empty() ? io::RunConfig{}
                                               : io::run_config_from_map(io::load_config(config_path));
        if (ov.window_ts) rc.window.t_s_ns = *ov.window_ts;
        if (ov.window_te) rc.window.t_e_ns = *ov.window_te;
        if (ov.werner_v) rc.werner_v = *ov.werner_v;
        if (ov.eps2) rc.model.double_emission_fraction = *ov.eps2;
        if (ov.v_max) rc.model.v_max = *ov.v_max;
        if (ov.q_floor) rc.model.q_floor = *ov.q_floor;
        if (ov.pulse_center) rc.model.pulse_center_ns = *ov.pulse_center;
        return rc;
    };

    // ---- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "simulate link heralds and protocol rounds");
    std::uint64_t sim_seed = 0;
    std::uint64_t sim_rounds = 3342;
    std::string sim_out, sim_table_out;
    bool sim_window_visibility = false;
    sim->add_option("--seed", sim_seed, "random seed")->required();
    sim->add_option("--rounds", sim_rounds, "number of heralded rounds");
    sim->add_option("--out", sim_out, "ledger CSV output path");
    sim->add_option("--table-out", sim_table_out, "tabulated counts CSV output path");
    sim->add_flag("--window-visibility", sim_window_visibility,
                  "derive the sampled visibility from the emission model and window");
    sim->callback([&] {
        const io::RunConfig rc = effective_config();
        const auto heralds = link::run_link(rc.link, rc.model, rc.window, sim_rounds, sim_seed);
        std::vector<std::int64_t> times_ns;
        times_ns.reserve(heralds.size());
        for (const auto& h : heralds)
            times_ns.push_back(static_cast<std::int64_t>(std::llround(h.herald_time_s * 1e9)));
        const double v = sim_window_visibility
                             ? emission::effective_visibility(rc.model, rc.window)
                             : rc.werner_v;
        const protocol::EventLedger ledger = protocol::run_protocol(
            sim_rounds, protocol::make_werner_sampler(v), rc.settings, sim_seed, times_ns);
        detail::write_output(io::write_ledger_csv(ledger), sim_out, out);
        if (!sim_table_out.empty())
            io::save_table_csv(protocol::tabulate(ledger), sim_table_out);
        if (!sim_out.empty())
            out << "simulate: seed " << sim_seed << ", rounds " << sim_rounds << ", visibility "
                << io::format_num(v) << ", ledger " << sim_out << "\n";
    });

    // ---- analyze -----------------------------------------------------------
    auto* ana = app.add_subcommand("analyze", "Bell/QBER estimates from a table or ledger");
    std::string ana_table, ana_ledger, ana_out;
    bool ana_full = false;
    double ana_tail = 0.03;
    ana->add_option("--table", ana_table, "correlation table CSV");
    ana->add_option("--ledger", ana_ledger, "event ledger CSV");
    ana->add_option("--out", ana_out, "report output path (default stdout)");
    ana->add_flag("--full", ana_full, "bundle worst-case bounds and key rates into the report");
    ana->add_option("--tail", ana_tail, "posterior tail error for --full (default 0.03)");
    ana->callback([&] {
        if (ana_table.empty() == ana_ledger.empty())
            throw DomainError("analyze: pass exactly one of --table or --ledger");
        const io::RunConfig rc = effective_config();
        const std::string& path = ana_table.empty() ? ana_ledger : ana_table;
        protocol::CorrelationTable table;
        if (!ana_table.empty()) table = io::load_correlation_table(ana_table);
        else table = protocol::tabulate(io::load_ledger(ana_ledger));
        if (ana_full) {
            io::Provenance prov{path, io::file_fingerprint(path), std::nullopt,
                                io::kToolVersion};
            detail::write_output(io::render_report(io::build_report_bundle(table, prov, ana_tail)),
                                 ana_out, out);
        } else {
            detail::write_output(
                detail::analyze_report(table, rc.settings, detail::provenance_line(path)), ana_out,
                out);
        }
    });

    // ---- bayes -------------------------------------------------------------
    auto* bay = app.add_subcommand("bayes", "worst-case bounds from Beta posteriors");
    std::string bay_table, bay_out, bay_csv, bay_method = "paper_floor";
    double bay_tail = 0.03;
    bay->add_option("--table", bay_table, "correlation table CSV")->required();
    bay->add_option("--tail", bay_tail, "posterior tail error (default 0.03)");
    bay->add_option("--method", bay_method, "win-count method: paper_floor or direct")
        ->check(CLI::IsMember({"paper_floor", "direct"}));
    bay->add_option("--out", bay_out, "report output path (default stdout)");
    bay->add_option("--csv", bay_csv, "also write machine-readable CSV row here");
    bay->callback([&] {
        const auto table = io::load_correlation_table(bay_table);
        const auto method = bay_method == "direct" ? stats::WinCountMethod::direct
                                                   : stats::WinCountMethod::paper_floor;
        const auto wc = stats::worst_case_bounds(table, bay_tail, method);
        detail::write_output(
            detail::bayes_report(wc, detail::provenance_line(bay_table), bay_method), bay_out, out);
        if (!bay_csv.empty()) {
            std::ostringstream csv;
            csv << "s_min,q0_max,q1_max,tail\n"
                << io::format_num(wc.s_min) << ',' << io::format_num(wc.q0_max) << ','
                << io::format_num(wc.q1_max) << ',' << io::format_num(wc.tail) << "\n";
            detail::write_output(csv.str(), bay_csv, out);
        }
    });

    // ---- keyrate -----------------------------------------------------------
    auto* kr = app.add_subcommand("keyrate", "asymptotic rate components for (S, Q)");
    double kr_s = 2.578, kr_q = 0.0779;
    std::string kr_table;
    kr->add_option("--s", kr_s, "CHSH value (default 2.578)");
    kr->add_option("--q", kr_q, "QBER (default 0.0779)");
    kr->add_option("--table", kr_table, "derive S and Q from a correlation table CSV");
    kr->callback([&] {
        std::string prov = "input: command line";
        if (!kr_table.empty()) {
            const auto est = protocol::estimate_bell(io::load_correlation_table(kr_table));
            kr_s = est.s_value;
            kr_q = est.q_avg;
            prov = detail::provenance_line(kr_table);
        }
        const auto res = keyrate::dw_chsh_rate(kr_s, kr_q);
        const auto anchor = keyrate::robust_anchor_check(kr_s, kr_q);
        out << "diqkd keyrate report\n" << prov << "\n";
        out << "tool: diqkd " << io::kToolVersion << "\n\n";
        out << "S = " << io::format_num(kr_s) << "  Q = " << io::format_num(kr_q) << "\n";
        out << "h(Q) = " << io::format_num(res.h_q) << "\n";
        out << "chi(S) = " << io::format_num(res.chi_s) << "\n";
        out << "one-basis asymptotic rate = " << io::format_num(res.raw_rate)
            << (res.clamped ? " (clamped to 0)" : "") << "\n";
        out << "robust-protocol anchor model (" << anchor.label
            << "): rate = " << io::format_num(anchor.modeled_rate) << ", "
            << (anchor.positive ? "positive" : "non-positive") << "\n";
        out << "robust thresholds: S > " << io::format_num(anchor.threshold_s) << " or Q < "
            << io::format_num(anchor.threshold_q) << " on the depolarizing line\n";
        out << "one-basis critical QBER (depolarizing): "
            << io::format_num(anchor.original_protocol_critical_q) << "\n";
    });

    // ---- finite-key --------------------------------------------------------
    auto* fk = app.add_subcommand("finite-key", "heuristic minimal block length over an eps grid");
    double fk_s = 2.578, fk_q = 0.0779;
    std::vector<double> fk_eps;
    std::string fk_out;
    fk->add_option("--s", fk_s, "CHSH value");
    fk->add_option("--q", fk_q, "QBER");
    fk->add_option("--eps", fk_eps, "security-error grid (default 1e-3..1e-10)");
    fk->add_option("--out", fk_out, "CSV output path (default stdout)");
    fk->callback([&] {
        const io::RunConfig rc = effective_config();
        if (fk_eps.empty())
            for (int k = 3; k <= 10; ++k) fk_eps.push_back(std::pow(10.0, -k));
        std::ostringstream csv;
        csv << "eps,n_min\n";
        for (double eps : fk_eps) {
            const keyrate::FiniteKeyQuery q{fk_s, fk_q, eps, rc.f_ec};
            csv << io::format_num(eps) << ','
                << keyrate::heuristic_min_block_length(q, detail::clamped_dw_rate(),
                                                       rc.finite_key_c)
                << "\n";
        }
        detail::write_output(csv.str(), fk_out, out);
    });

    // ---- window-scan -------------------------------------------------------
    auto* ws = app.add_subcommand("window-scan", "S/Q/rate trade-off versus window start");
    double ws_from = 716.0, ws_to = 849.0, ws_step = 1.0;
    std::string ws_out;
    ws->add_option("--ts-from", ws_from, "first window start [ns]");
    ws->add_option("--ts-to", ws_to, "last window start [ns]");
    ws->add_option("--ts-step", ws_step, "grid step [ns]");
    ws->add_option("--out", ws_out, "CSV output path (default stdout)");
    ws->callback([&] {
        if (!(ws_step > 0.0)) throw DomainError("window-scan: step must be positive");
        const io::RunConfig rc = effective_config();
        std::vector<double> grid;
        for (double t = ws_from; t <= ws_to + 1e-9; t += ws_step) grid.push_back(t);
        const auto points =
            emission::window_scan(rc.model, grid, rc.window.t_e_ns, detail::clamped_dw_rate());
        detail::write_output(io::write_scan_csv(points), ws_out, out);
    });

    // ---- optimize-window ---------------------------------------------------
    auto* ow = app.add_subcommand("optimize-window", "window start maximizing key per time");
    double ow_lo = 716.0, ow_hi = 830.0;
    ow->add_option("--lo", ow_lo, "search lower bound [ns]");
    ow->add_option("--hi", ow_hi, "search upper bound [ns]");
    ow->callback([&] {
        const io::RunConfig rc = effective_config();
        const double ts = emission::optimize_window(rc.model, rc.window.t_e_ns,
                                                    detail::clamped_dw_rate(), ow_lo, ow_hi);
        const emission::WindowConfig w{ts, rc.window.t_e_ns};
        const double v = emission::effective_visibility(rc.model, w);
        out << "optimal window start t_s = " << io::format_num(ts) << " ns (t_e = "
            << io::format_num(rc.window.t_e_ns) << " ns)\n";
        out << "S = " << io::format_num(emission::kTwoSqrtTwo * v) << "  Q = "
            << io::format_num(0.5 * (1.0 - v) + rc.model.q_floor) << "\n";
    });

    // ---- rate-budget -------------------------------------------------------
    auto* rb = app.add_subcommand("rate-budget", "expected herald rate from link parameters");
    rb->callback([&] {
        const io::RunConfig rc = effective_config();
        const double rate = link::expected_event_rate(rc.link);
        const auto mix = emission::event_mix(rc.model, rc.window);
        const auto full = emission::event_mix_unfiltered(rc.model, rc.window.t_e_ns);
        const double thinning = full.total() > 0.0 ? mix.total() / full.total() : 0.0;
        out << "diqkd rate-budget report\n";
        out << "tool: diqkd " << io::kToolVersion << "\n\n";
        out << "attempt rate = " << io::format_num(rc.link.attempt_rate_hz) << " Hz, duty cycle = "
            << io::format_num(rc.link.duty_cycle) << "\n";
        out << "herald efficiency (unfiltered window) = "
            << io::format_num(rc.link.herald_efficiency) << "\n";
        out << "expected event rate = " << io::format_num(rate) << " per s (one per "
            << io::format_num(1.0 / rate) << " s)\n";
        out << "window thinning factor = " << io::format_num(thinning) << "\n";
        out << "windowed event rate = " << io::format_num(rate * thinning) << " per s (one per "
            << io::format_num(1.0 / (rate * thinning)) << " s)\n";
        out << "per-arm detection probabilities (diagnostic): "
            << io::format_num(rc.link.per_arm_detection_prob_a) << ", "
            << io::format_num(rc.link.per_arm_detection_prob_b) << "\n";
    });

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const protocol::AbortedRunError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace diqkd::cli
