// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "irqv/driver.hpp"
#include "support/corpus.hpp"

using namespace irqv;

namespace {

std::string temp_program(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("irqv_test_" + name + ".irq");
    std::ofstream(path) << text;
    return path.string();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

template <typename F>
Run run(F f, const std::string& path, const DriverOptions& opts) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = f(path, opts, out, err);
    return {code, out.str(), err.str()};
}

DriverOptions json_options() {
    DriverOptions o;
    o.json = true;
    return o;
}

} // namespace

TEST_CASE("analyze emits the stable JSON schema and exit codes") {
    const Run r = run(run_analyze, testing::corpus_path("priority_three_handlers"), json_options());
    CHECK(r.code == exit_code::warning);
    CHECK(r.out == R"({
  "verdicts": [
    {
      "assertion_id": "irq_H#1",
      "handler": "irq_H",
      "verdict": "Warning"
    },
    {
      "assertion_id": "irq_L#1",
      "handler": "irq_L",
      "verdict": "Warning"
    },
    {
      "assertion_id": "irq_M#1",
      "handler": "irq_M",
      "verdict": "Proved"
    }
  ],
  "pairs": {
    "total": 3,
    "pruned": 1,
    "ratio": 0.3333333333333333
  },
  "iterations": 4,
  "pruning_enabled": true,
  "converged": true
}
)");
}

TEST_CASE("analyze without pruning reports three warnings on the branch example") {
    DriverOptions o = json_options();
    o.no_pruning = true;
    const Run r = run(run_analyze, testing::corpus_path("postdom_branches"), o);
    CHECK(r.code == exit_code::warning);
    const auto j = nlohmann::json::parse(r.out);
    for (const auto& v : j["verdicts"]) {
        CHECK(v["verdict"] == "Warning");
    }
    CHECK(j["pruning_enabled"] == false);
}

TEST_CASE("analyze exit code 0 when everything is proved or there is nothing to prove") {
    CHECK(run(run_analyze, testing::corpus_path("loop_postdom"), json_options()).code == exit_code::ok);
    const std::string empty = temp_program("empty", "global x = 0; handler h priority 0 { x = 1; }");
    const Run r = run(run_analyze, empty, json_options());
    CHECK(r.code == exit_code::ok);
    CHECK(nlohmann::json::parse(r.out)["verdicts"].empty());
}

TEST_CASE("input errors exit with 2 and a located diagnostic") {
    const std::string bad = temp_program("bad", "handler h priority 0 {\n  x = 1;\n}\n");
    const Run r = run(run_analyze, bad, DriverOptions{});
    CHECK(r.code == exit_code::input_error);
    CHECK(r.err.find(bad + ":2:3: error:") != std::string::npos);
    CHECK(run(run_analyze, "/nonexistent/file.irq", DriverOptions{}).code == exit_code::input_error);
    DriverOptions zero;
    zero.max_iters = 0;
    CHECK(run(run_analyze, testing::corpus_path("loop_postdom"), zero).code == exit_code::input_error);
}

TEST_CASE("human-readable table") {
    const Run r = run(run_analyze, testing::corpus_path("loop_postdom"), DriverOptions{});
    CHECK(r.out.find("irq0#1     irq0     Proved") != std::string::npos);
    CHECK(r.out.find("pairs: 2 total, 1 pruned (ratio 0.50)") != std::string::npos);
}

TEST_CASE("dump flags prefix the report") {
    DriverOptions o;
    o.dump_cfg = true;
    o.dump_facts = true;
    const Run r = run(run_analyze, testing::corpus_path("loop_postdom"), o);
    CHECK(r.out.find("node irq1:1 loop\n") != std::string::npos);
    CHECK(r.out.find("MustNotReadFrom(irq0:1, irq1:2, x)") != std::string::npos);
}

TEST_CASE("facts subcommand lists the pruned pairs") {
    const Run r = run(run_facts, testing::corpus_path("loop_postdom"), json_options());
    CHECK(r.code == exit_code::ok);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["must_not_read_from"].size() == 1);
    CHECK(j["must_not_read_from"][0]["store"] == "irq1:2");
    CHECK(j["pairs"]["total"] == 2);
}

TEST_CASE("oracle subcommand") {
    DriverOptions o = json_options();
    o.track_flows = true;
    const Run r = run(run_oracle, testing::corpus_path("priority_three_handlers"), o);
    CHECK(r.code == exit_code::warning);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["violated"] == nlohmann::json::array({"irq_H#1", "irq_L#1"}));
    CHECK(j["flows"].size() == 4);
    CHECK(j["truncated"] == false);
    o.track_flows = false;
    CHECK_FALSE(nlohmann::json::parse(run(run_oracle, testing::corpus_path("loop_postdom"), o).out).contains("flows"));
}

TEST_CASE("compare: three columns, pair statistics, no discrepancy on the corpus") {
    for (const std::string& name : testing::corpus_names()) {
        const Run r = run(run_compare, testing::corpus_path(name), json_options());
        CHECK(r.code == exit_code::ok);
        CHECK(nlohmann::json::parse(r.out)["unsound"].empty());
    }
    const Run r = run(run_compare, testing::corpus_path("loop_postdom"), json_options());
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["assertions"][0]["pruning"] == "Proved");
    CHECK(j["assertions"][0]["no_pruning"] == "Warning");
    CHECK(j["assertions"][0]["oracle"] == "holds");
    CHECK(j["oracle_truncated"] == true);
}

TEST_CASE("compare marks the oracle column skipped past the ceiling") {
    DriverOptions o = json_options();
    o.oracle_ceiling = 3;
    const Run r = run(run_compare, testing::corpus_path("priority_three_handlers"), o);
    CHECK(r.code == exit_code::ok);
    for (const auto& a : nlohmann::json::parse(r.out)["assertions"]) {
        CHECK(a["oracle"] == "skipped");
    }
}

TEST_CASE("single-handler program: zero pairs") {
    const std::string one = temp_program("one", "global x = 0; handler h priority 0 { x = 1; assert(x == 1); }");
    const Run r = run(run_compare, one, json_options());
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["pairs"]["total"] == 0);
    CHECK(j["pairs"]["ratio"] == 0.0);
}
