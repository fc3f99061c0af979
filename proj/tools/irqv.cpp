// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"

#include "irqv/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"irqv: static verification of interrupt-driven programs"};
    app.require_subcommand(1);

    irqv::DriverOptions opts;
    std::string path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("file", path, "program file")->required();
        sub->add_flag("--json", opts.json, "machine-readable output");
    };
    auto add_analysis = [&](CLI::App* sub) {
        sub->add_option("--widen-delay", opts.widen_delay, "rounds before widening")->capture_default_str();
        sub->add_option("--max-iters", opts.max_iters, "outer fixpoint iteration limit")->capture_default_str();
    };
    auto add_oracle = [&](CLI::App* sub) {
        sub->add_option("--oracle-budget", opts.oracle_budget, "invocations per handler")->capture_default_str();
        sub->add_option("--unroll", opts.unroll, "loop iterations per entry")->capture_default_str();
        sub->add_option("--oracle-ceiling", opts.oracle_ceiling, "abort after this many states")
            ->capture_default_str();
    };

    CLI::App* analyze = app.add_subcommand("analyze", "prove or warn on each assertion");
    add_common(analyze);
    add_analysis(analyze);
    analyze->add_flag("--no-pruning", opts.no_pruning, "ignore must-not-read-from facts");
    analyze->add_flag("--dump-cfg", opts.dump_cfg, "print control flow graphs and dominance");
    analyze->add_flag("--dump-facts", opts.dump_facts, "print the relational facts");

    CLI::App* oracle = app.add_subcommand("oracle", "enumerate concrete executions");
    add_common(oracle);
    add_oracle(oracle);
    oracle->add_flag("--track-flows", opts.track_flows, "record store-to-load flows");
    oracle->add_flag("--threads", opts.threads, "interleave freely, ignoring priorities");

    CLI::App* facts = app.add_subcommand("facts", "print facts and infeasible store-to-load pairs");
    add_common(facts);
    facts->add_flag("--dump-cfg", opts.dump_cfg, "print control flow graphs and dominance");

    CLI::App* compare = app.add_subcommand("compare", "pruning vs no pruning vs oracle");
    add_common(compare);
    add_analysis(compare);
    add_oracle(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : irqv::exit_code::input_error;
    }

    if (analyze->parsed()) {
        return irqv::run_analyze(path, opts, std::cout, std::cerr);
    }
    if (oracle->parsed()) {
        return irqv::run_oracle(path, opts, std::cout, std::cerr);
    }
    if (facts->parsed()) {
        return irqv::run_facts(path, opts, std::cout, std::cerr);
    }
    return irqv::run_compare(path, opts, std::cout, std::cerr);
}
