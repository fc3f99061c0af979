// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/driver.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace irqv {

using nlohmann::ordered_json;

AnalysisConfig DriverOptions::analysis_config() const {
    AnalysisConfig c;
    c.pruning = !no_pruning;
    c.widening_delay = widen_delay;
    c.max_outer_iterations = max_iters;
    return c;
}

OracleConfig DriverOptions::oracle_config() const {
    OracleConfig c;
    c.max_invocations = oracle_budget;
    c.unroll = unroll;
    c.track_flows = track_flows;
    c.state_ceiling = oracle_ceiling;
    return c;
}

Program load_program(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_program(text.str());
}

ordered_json report_to_json(const AnalysisReport& report) {
    ordered_json j;
    j["verdicts"] = ordered_json::array();
    for (const AssertionResult& a : report.verdicts) {
        j["verdicts"].push_back(
            {{"assertion_id", a.assertion_id}, {"handler", a.handler}, {"verdict", std::string(to_string(a.verdict))}});
    }
    j["pairs"] = {{"total", report.pairs.total}, {"pruned", report.pairs.pruned}, {"ratio", report.pairs.ratio}};
    j["iterations"] = report.iterations;
    j["pruning_enabled"] = report.pruning_enabled;
    j["converged"] = report.converged;
    return j;
}

ordered_json oracle_to_json(const Program& p, const OracleResult& result, bool with_flows) {
    ordered_json j;
    j["violated"] = ordered_json::array();
    for (const std::string& id : result.violated) {
        j["violated"].push_back(id);
    }
    if (with_flows) {
        j["flows"] = ordered_json::array();
        for (const ReadFromPair& f : result.flows) {
            j["flows"].push_back({{"load", node_name(p, f.load)}, {"store", node_name(p, f.store)}, {"var", f.var}});
        }
    }
    j["executions"] = result.executions;
    j["states"] = result.states;
    j["truncated"] = result.truncated;
    return j;
}

namespace {

std::string format_ratio(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", r);
    return buf;
}

// Runs `body` with uniform handling of input errors.
int guarded(const std::string& path, std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << path << ":" << e.line() << ":" << e.column() << ": error: " << e.detail() << "\n";
    } catch (const OracleLimitExceeded& e) {
        err << path << ": error: " << e.what() << "\n";
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << path << ": error: " << e.what() << "\n";
    }
    return exit_code::input_error;
}

void emit_dumps(const Program& p, const AnalysisResult& r, const DriverOptions& opts, std::ostream& out) {
    if (opts.dump_cfg) {
        for (const Cfg& g : r.cfgs) {
            out << dump_cfg(p, g);
        }
    }
    if (opts.dump_facts) {
        for (const std::string& line : dump_facts(p, r.facts, r.feasibility)) {
            out << line << "\n";
        }
    }
}

void print_table(const AnalysisReport& report, std::ostream& out) {
    std::size_t id_width = 9;
    std::size_t handler_width = 7;
    for (const AssertionResult& a : report.verdicts) {
        id_width = std::max(id_width, a.assertion_id.size());
        handler_width = std::max(handler_width, a.handler.size());
    }
    out << std::left << std::setw(static_cast<int>(id_width + 2)) << "assertion"
        << std::setw(static_cast<int>(handler_width + 2)) << "handler" << "verdict\n";
    for (const AssertionResult& a : report.verdicts) {
        out << std::setw(static_cast<int>(id_width + 2)) << a.assertion_id
            << std::setw(static_cast<int>(handler_width + 2)) << a.handler << to_string(a.verdict) << "\n";
    }
    out << "pairs: " << report.pairs.total << " total, " << report.pairs.pruned << " pruned (ratio "
        << format_ratio(report.pairs.ratio) << ")\n";
    out << "iterations: " << report.iterations << (report.converged ? "" : " (not converged)") << "\n";
    out << "pruning: " << (report.pruning_enabled ? "on" : "off") << "\n";
}

bool any_warning(const AnalysisReport& report) {
    for (const AssertionResult& a : report.verdicts) {
        if (a.verdict != AssertionVerdict::Proved) {
            return true;
        }
    }
    return false;
}

} // namespace

int run_analyze(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(path, err, [&] {
        const AnalysisConfig config = opts.analysis_config();
        config.check();
        const Program p = load_program(path);
        const AnalysisResult r = analyze(p, config);
        emit_dumps(p, r, opts, out);
        if (opts.json) {
            out << report_to_json(r.report).dump(2) << "\n";
        } else {
            print_table(r.report, out);
        }
        return any_warning(r.report) ? exit_code::warning : exit_code::ok;
    });
}

int run_oracle(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(path, err, [&] {
        const OracleConfig config = opts.oracle_config();
        config.check();
        const Program p = load_program(path);
        const OracleResult r = opts.threads ? thread_enumerate(p, config) : enumerate(p, config);
        if (opts.json) {
            out << oracle_to_json(p, r, opts.track_flows).dump(2) << "\n";
        } else {
            out << "semantics: " << (opts.threads ? "threads" : "interrupts") << "\n";
            out << "executions: " << r.executions << "\n";
            out << "states: " << r.states << "\n";
            out << "truncated: " << (r.truncated ? "yes" : "no") << "\n";
            out << "violated:";
            for (const std::string& id : r.violated) {
                out << " " << id;
            }
            out << (r.violated.empty() ? " none\n" : "\n");
            if (opts.track_flows) {
                for (const ReadFromPair& f : r.flows) {
                    out << "flow " << node_name(p, f.load) << " <- " << node_name(p, f.store) << " (" << f.var
                        << ")\n";
                }
            }
        }
        return r.violated.empty() ? exit_code::ok : exit_code::warning;
    });
}

int run_facts(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(path, err, [&] {
        const Program p = load_program(path);
        const std::vector<Cfg> cfgs = build_cfgs(p);
        std::vector<AccessInfo> infos;
        for (const Cfg& g : cfgs) {
            infos.push_back(access_info(g, p));
        }
        const FactBase fb = extract_facts(p, cfgs, infos);
        const FeasibilityResult fr = must_not_read_from(fb);
        if (opts.dump_cfg) {
            for (const Cfg& g : cfgs) {
                out << dump_cfg(p, g);
            }
        }
        if (opts.json) {
            ordered_json j;
            j["facts"] = dump_facts(p, fb, fr);
            j["must_not_read_from"] = ordered_json::array();
            for (const ReadFromPair& pr : fr.must_not_read_from) {
                j["must_not_read_from"].push_back(
                    {{"load", node_name(p, pr.load)}, {"store", node_name(p, pr.store)}, {"var", pr.var}});
            }
            const PairStats stats = pair_statistics(fb, fr);
            j["pairs"] = {{"total", stats.total}, {"pruned", stats.pruned}, {"ratio", stats.ratio}};
            out << j.dump(2) << "\n";
        } else {
            for (const std::string& line : dump_facts(p, fb, fr)) {
                out << line << "\n";
            }
        }
        return exit_code::ok;
    });
}

int run_compare(const std::string& path, const DriverOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(path, err, [&] {
        AnalysisConfig with = opts.analysis_config();
        with.pruning = true;
        AnalysisConfig without = with;
        without.pruning = false;
        with.check();
        OracleConfig oracle_config = opts.oracle_config();
        oracle_config.track_flows = false;
        oracle_config.check();

        const Program p = load_program(path);
        const AnalysisResult pruned = analyze(p, with);
        const AnalysisReport plain = analyze_program(p, without);

        std::optional<OracleResult> oracle;
        try {
            oracle = enumerate(p, oracle_config);
        } catch (const OracleLimitExceeded&) {
            oracle.reset();
        }

        auto oracle_cell = [&](const std::string& id) -> std::string {
            if (!oracle) {
                return "skipped";
            }
            return oracle->violated.count(id) ? "violated" : "holds";
        };

        std::vector<std::string> unsound;
        for (std::size_t i = 0; i < pruned.report.verdicts.size(); ++i) {
            const std::string& id = pruned.report.verdicts[i].assertion_id;
            if (!oracle || !oracle->violated.count(id)) {
                continue;
            }
            if (pruned.report.verdicts[i].verdict == AssertionVerdict::Proved ||
                plain.verdicts[i].verdict == AssertionVerdict::Proved) {
                unsound.push_back(id);
            }
        }

        if (opts.json) {
            ordered_json j;
            j["assertions"] = ordered_json::array();
            for (std::size_t i = 0; i < pruned.report.verdicts.size(); ++i) {
                const AssertionResult& a = pruned.report.verdicts[i];
                j["assertions"].push_back({{"assertion_id", a.assertion_id},
                                           {"handler", a.handler},
                                           {"pruning", std::string(to_string(a.verdict))},
                                           {"no_pruning", std::string(to_string(plain.verdicts[i].verdict))},
                                           {"oracle", oracle_cell(a.assertion_id)}});
            }
            const PairStats& s = pruned.report.pairs;
            j["pairs"] = {{"total", s.total}, {"pruned", s.pruned}, {"ratio", s.ratio}};
            j["oracle_truncated"] = oracle ? oracle->truncated : false;
            j["unsound"] = unsound;
            out << j.dump(2) << "\n";
        } else {
            std::size_t id_width = 9;
            for (const AssertionResult& a : pruned.report.verdicts) {
                id_width = std::max(id_width, a.assertion_id.size());
            }
            const int w = static_cast<int>(id_width + 2);
            out << std::left << std::setw(w) << "assertion" << std::setw(10) << "pruning" << std::setw(12)
                << "no-pruning" << "oracle\n";
            for (std::size_t i = 0; i < pruned.report.verdicts.size(); ++i) {
                const AssertionResult& a = pruned.report.verdicts[i];
                out << std::setw(w) << a.assertion_id << std::setw(10) << to_string(a.verdict) << std::setw(12)
                    << to_string(plain.verdicts[i].verdict) << oracle_cell(a.assertion_id) << "\n";
            }
            const PairStats& s = pruned.report.pairs;
            out << "pairs: " << s.total << " total, " << s.pruned << " pruned (ratio " << format_ratio(s.ratio)
                << ")\n";
            for (const std::string& id : unsound) {
                err << path << ": fatal: " << id << " is Proved but the oracle found a violation\n";
            }
        }
        if (!unsound.empty()) {
            return exit_code::unsound;
        }
        return exit_code::ok;
    });
}

} // namespace irqv
