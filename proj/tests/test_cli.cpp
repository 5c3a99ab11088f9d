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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "diqkd/cli.hpp"
#include "test_helpers.hpp"

using namespace diqkd;
using Catch::Matchers::ContainsSubstring;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content = "")
        : path("/tmp/diqkd_test_" + name) {
        if (!content.empty()) {
            std::ofstream f(path, std::ios::binary);
            f << content;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("analyze reproduces the published estimates", "[cli]") {
    const auto res = run_cli({"analyze", "--table", "data/paper_table1.csv"});
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.out, ContainsSubstring("S = 2.57783"));
    REQUIRE_THAT(res.out, ContainsSubstring("sigma_S = 0.0754074"));
    REQUIRE_THAT(res.out, ContainsSubstring("Q0 = 0.078125"));
    REQUIRE_THAT(res.out, ContainsSubstring("Q1 = 0.0776699"));
    REQUIRE_THAT(res.out, ContainsSubstring("Q_pooled = 0.077907"));
    REQUIRE_THAT(res.out, ContainsSubstring("visibility[Y=0] = 0.86826"));
    REQUIRE_THAT(res.out, ContainsSubstring("visibility[Y=1] = 0.887347"));
    REQUIRE_THAT(res.out, ContainsSubstring("fnv1a64"));
}

TEST_CASE("analyze from a replayed ledger matches the table path", "[cli]") {
    const auto ledger = testing::ledger_from_table(testing::reference_table());
    TempFile f("replay.csv", io::write_ledger_csv(ledger));
    const auto via_ledger = run_cli({"analyze", "--ledger", f.path});
    const auto via_table = run_cli({"analyze", "--table", "data/paper_table1.csv"});
    REQUIRE(via_ledger.code == 0);
    // identical estimates; only the provenance line differs
    const auto tail = [](const std::string& s) { return s.substr(s.find("rounds:")); };
    REQUIRE(tail(via_ledger.out) == tail(via_table.out));
}

TEST_CASE("analyze --full bundles bounds and rates", "[cli]") {
    const auto a = run_cli({"analyze", "--table", "data/paper_table1.csv", "--full"});
    const auto b = run_cli({"analyze", "--table", "data/paper_table1.csv", "--full"});
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out); // byte-for-byte reproducible
    REQUIRE_THAT(a.out, ContainsSubstring("worst case (tail 0.03): S >= 2.42615"));
    REQUIRE_THAT(a.out, ContainsSubstring("one-basis asymptotic rate = 0.157531"));
    REQUIRE_THAT(a.out, ContainsSubstring("rate = 0.0699448, positive"));
}

TEST_CASE("bayes reports worst-case bounds and machine-readable output", "[cli]") {
    TempFile csv("bayes_out.csv");
    const auto res = run_cli(
        {"bayes", "--table", "data/paper_table1.csv", "--tail", "0.03", "--csv", csv.path});
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.out, ContainsSubstring("win count (paper_floor): 1355 of 1649"));
    REQUIRE_THAT(res.out, ContainsSubstring("posterior win: Beta(1356,295)"));
    REQUIRE_THAT(res.out, ContainsSubstring("posterior Q0: Beta(36,414)"));
    REQUIRE_THAT(res.out, ContainsSubstring("S_min = 2.42615"));
    REQUIRE_THAT(res.out, ContainsSubstring("Q0_max = 0.105548"));
    REQUIRE_THAT(res.out, ContainsSubstring("Q1_max = 0.106367"));

    const std::string csv_text = io::read_file(csv.path);
    REQUIRE(csv_text == "s_min,q0_max,q1_max,tail\n2.42615,0.105548,0.106367,0.03\n");

    const auto direct = run_cli({"bayes", "--table", "data/paper_table1.csv", "--method", "direct"});
    REQUIRE(direct.code == 0);
    REQUIRE_THAT(direct.out, ContainsSubstring("win count (direct): 1357 of 1649"));
}

TEST_CASE("simulate is reproducible and feeds analyze", "[cli]") {
    const auto a = run_cli({"simulate", "--seed", "7", "--rounds", "100"});
    const auto b = run_cli({"simulate", "--seed", "7", "--rounds", "100"});
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out); // byte-identical ledgers
    REQUIRE_THAT(a.out, ContainsSubstring("round_id,herald_time_ns,x,y,a,b"));

    const auto c = run_cli({"simulate", "--seed", "8", "--rounds", "100"});
    REQUIRE(c.out != a.out);

    TempFile ledger("sim.csv", a.out);
    const auto ana = run_cli({"analyze", "--ledger", ledger.path});
    REQUIRE(ana.code == 0);
    REQUIRE_THAT(ana.out, ContainsSubstring("rounds: 100"));
}

TEST_CASE("simulate with window-derived visibility reproduces the operating point", "[cli]") {
    // full chain: emission model -> effective visibility -> sampler -> ledger
    TempFile ledger("winvis.csv");
    TempFile table("winvis_table.csv");
    const auto sim = run_cli({"--window-ts", "755", "simulate", "--seed", "5", "--rounds", "4000",
                              "--window-visibility", "--out", ledger.path, "--table-out",
                              table.path});
    REQUIRE(sim.code == 0);
    REQUIRE_THAT(sim.out, ContainsSubstring("visibility 0.911492"));

    const auto est = protocol::estimate_bell(io::load_correlation_table(table.path));
    REQUIRE(std::abs(est.s_value - 2.578) < 5.0 * est.sigma_s);

    const auto ana = run_cli({"analyze", "--ledger", ledger.path});
    REQUIRE(ana.code == 0);
    REQUIRE_THAT(ana.out, ContainsSubstring("rounds: 4000"));
}

TEST_CASE("keyrate and finite-key subcommands", "[cli]") {
    const auto kr = run_cli({"keyrate", "--s", "2.578", "--q", "0.0779"});
    REQUIRE(kr.code == 0);
    REQUIRE_THAT(kr.out, ContainsSubstring("one-basis asymptotic rate = 0.157775"));
    REQUIRE_THAT(kr.out, ContainsSubstring("rate = 0.07, positive"));
    REQUIRE_THAT(kr.out, ContainsSubstring("not a security bound"));

    const auto fk = run_cli({"finite-key", "--s", "2.578", "--q", "0.0779", "--eps", "1e-5"});
    REQUIRE(fk.code == 0);
    REQUIRE_THAT(fk.out, ContainsSubstring("eps,n_min"));
    REQUIRE_THAT(fk.out, ContainsSubstring("1e-05,174"));

    const auto bad = run_cli({"keyrate", "--s", "1.9", "--q", "0.05"});
    REQUIRE(bad.code == 1);
    REQUIRE_THAT(bad.err, ContainsSubstring("no Bell violation"));
}

TEST_CASE("window subcommands", "[cli]") {
    const auto scan = run_cli({"window-scan", "--ts-from", "740", "--ts-to", "760", "--ts-step", "5"});
    REQUIRE(scan.code == 0);
    REQUIRE_THAT(scan.out, ContainsSubstring("t_s_ns,S,Q,relative_rate,key_per_time"));
    REQUIRE_THAT(scan.out, ContainsSubstring("755,2.57809"));

    TempFile csv("scan.csv");
    const auto scan_file = run_cli({"window-scan", "--ts-from", "750", "--ts-to", "760",
                                    "--ts-step", "5", "--out", csv.path});
    REQUIRE(scan_file.code == 0);
    REQUIRE_THAT(io::read_file(csv.path), ContainsSubstring("755,2.57809"));

    const auto opt = run_cli({"optimize-window", "--lo", "745", "--hi", "760"});
    REQUIRE(opt.code == 0);
    REQUIRE_THAT(opt.out, ContainsSubstring("optimal window start t_s = 751.5"));

    const auto rb = run_cli({"rate-budget"});
    REQUIRE(rb.code == 0);
    REQUIRE_THAT(rb.out, ContainsSubstring("expected event rate = 0.01274"));
    REQUIRE_THAT(rb.out, ContainsSubstring("one per 78.4929 s"));
}

TEST_CASE("config file feeds the subcommands and flags override it", "[cli]") {
    TempFile cfg("cfg.cfg", "v_max=0.5\n");
    const auto weak = run_cli({"--config", cfg.path, "window-scan", "--ts-from", "750", "--ts-to",
                               "756", "--ts-step", "3"});
    REQUIRE(weak.code == 0);
    REQUIRE_THAT(weak.out, ContainsSubstring(",0\n")); // no positive key anywhere

    const auto overridden = run_cli({"--config", cfg.path, "--v-max", "0.9156", "window-scan",
                                     "--ts-from", "755", "--ts-to", "756", "--ts-step", "3"});
    REQUIRE(overridden.code == 0);
    REQUIRE_THAT(overridden.out, ContainsSubstring("755,2.57809"));
}

TEST_CASE("CLI error handling and exit codes", "[cli]") {
    const auto unknown = run_cli({"frobnicate"});
    REQUIRE(unknown.code == 1);

    const auto missing = run_cli({"analyze", "--table", "/nonexistent/file.csv"});
    REQUIRE(missing.code == 1);
    REQUIRE_THAT(missing.err, ContainsSubstring("cannot open file"));

    const auto neither = run_cli({"analyze"});
    REQUIRE(neither.code == 1);

    const auto help = run_cli({"--help"});
    REQUIRE(help.code == 0);
    REQUIRE_THAT(help.out, ContainsSubstring("simulate"));
    REQUIRE_THAT(help.out, ContainsSubstring("analyze"));

    // numeric failure: a dead link cannot produce heralds
    TempFile cfg("dead.cfg", "herald_efficiency=0\n");
    const auto dead = run_cli({"--config", cfg.path, "simulate", "--seed", "1", "--rounds", "1"});
    REQUIRE(dead.code == 2);
    REQUIRE_THAT(dead.err, ContainsSubstring("numeric error"));
}
