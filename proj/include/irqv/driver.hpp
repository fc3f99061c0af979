// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Subcommand implementations behind the irqv CLI. Each returns the process
// exit code and writes only to the given streams.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "irqv/analyzer.hpp"
#include "irqv/oracle.hpp"

namespace irqv {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int warning = 1; // some assertion unproved (analyze) or violated (oracle)
inline constexpr int input_error = 2;
inline constexpr int unsound = 3; // compare: Proved but violated by the oracle
} // namespace exit_code

struct DriverOptions {
    bool json = false;
    bool no_pruning = false;
    bool dump_cfg = false;
    bool dump_facts = false;
    int widen_delay = 2;
    int max_iters = 100;
    int oracle_budget = 1;
    int unroll = 2;
    bool track_flows = false;
    bool threads = false; // oracle: free interleaving instead of priorities
    std::size_t oracle_ceiling = 2'000'000;

    AnalysisConfig analysis_config() const;
    OracleConfig oracle_config() const;
};

/// Reads and validates a program file; throws ParseError or std::runtime_error.
Program load_program(const std::string& path);

nlohmann::ordered_json report_to_json(const AnalysisReport& report);
nlohmann::ordered_json oracle_to_json(const Program& p, const OracleResult& result, bool with_flows);

int run_analyze(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err);
int run_oracle(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err);
int run_facts(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err);
int run_compare(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err);

} // namespace irqv
