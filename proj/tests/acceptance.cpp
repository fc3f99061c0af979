// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <array>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "irqv/analyzer.hpp"
#include "irqv/driver.hpp"
#include "irqv/oracle.hpp"
#include "support/brute_force.hpp"
#include "support/corpus.hpp"
#include "support/random_program.hpp"

#ifndef IRQV_CLI_PATH
#error "IRQV_CLI_PATH must name the irqv executable"
#endif

using namespace irqv;
using namespace irqv::testing;

namespace {

// Collects failure messages for one criterion.
struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::map<std::string, std::string> verdict_map(const AnalysisReport& r) {
    std::map<std::string, std::string> out;
    for (const AssertionResult& a : r.verdicts) {
        out[a.assertion_id] = std::string(to_string(a.verdict));
    }
    return out;
}

std::map<std::string, std::string> expected_verdicts(const nlohmann::json& j) {
    std::map<std::string, std::string> out;
    for (const auto& [id, v] : j.items()) {
        out[id] = v.get<std::string>();
    }
    return out;
}

// Golden verdicts with and without pruning, pair statistics, must-not-read-from.
void check_golden(const std::string& name, Check& c) {
    const auto t0 = Clock::now();
    const Program p = corpus_program(name);
    const nlohmann::json expect = sidecar(name);
    AnalysisConfig on;
    AnalysisConfig off;
    off.pruning = false;
    const AnalysisResult with = analyze(p, on);
    const AnalysisReport without = analyze_program(p, off);
    const double elapsed = seconds_since(t0);

    c.expect(verdict_map(with.report) == expected_verdicts(expect["verdicts"]["pruning"]),
             name + ": verdicts with pruning differ from the expected ones");
    c.expect(verdict_map(without) == expected_verdicts(expect["verdicts"]["no_pruning"]),
             name + ": verdicts without pruning differ from the expected ones");
    c.expect(with.report.converged && without.converged, name + ": fixpoint did not converge");
    c.expect(with.report.pairs.total == expect["pairs"]["total"].get<std::size_t>() &&
                 with.report.pairs.pruned == expect["pairs"]["pruned"].get<std::size_t>(),
             name + ": pair statistics differ");
    std::set<ReadFromPair> mnrf;
    for (const auto& e : expect["must_not_read_from"]) {
        mnrf.insert(ReadFromPair{parse_node(p, e["load"]), parse_node(p, e["store"]), e["var"]});
    }
    c.expect(with.feasibility.must_not_read_from == mnrf, name + ": must-not-read-from set differs");
    c.expect(elapsed < 1.0, name + ": took " + std::to_string(elapsed) + " s");

    // The concrete semantics must agree with every Warning/Proved split above.
    OracleConfig oc;
    oc.max_invocations = expect["oracle"]["budget"].get<int>();
    const OracleResult concrete = enumerate(p, oc);
    std::set<std::string> violated;
    for (const auto& id : expect["oracle"]["violated"]) {
        violated.insert(id.get<std::string>());
    }
    c.expect(concrete.violated == violated, name + ": oracle violations differ");
    for (const AssertionResult& a : with.report.verdicts) {
        c.expect(a.verdict != AssertionVerdict::Proved || !concrete.violated.count(a.assertion_id),
                 name + ": " + a.assertion_id + " Proved but violated");
    }
    for (const ReadFromPair& pr : with.feasibility.must_not_read_from) {
        c.expect(!concrete.flows.count(pr), name + ": pruned pair observed concretely");
    }
}

void criterion_loop(Check& c) {
    check_golden("loop_postdom", c);
    const Program p = corpus_program("loop_postdom");
    const AnalysisResult r = analyze(p, AnalysisConfig{});
    const NodeId load = parse_node(p, "irq0:1");
    const NodeId one = parse_node(p, "irq1:2");
    const NodeId zero = parse_node(p, "irq1:3");
    c.expect(p.handlers[one.handler].body[0].kind == Stmt::Kind::While, "store x = 1 is not inside the loop");
    c.expect(r.feasibility.excludes(load, one, "x"), "(load x, store x = 1) not in must-not-read-from");
    c.expect(!r.feasibility.excludes(load, zero, "x"), "(load x, store x = 0) wrongly pruned");
    c.expect(r.facts.postdom.count({zero, one}) > 0, "x = 0 does not post-dominate x = 1");
    c.expect(r.feasibility.intercepted_store.count({one, "x"}) > 0, "x = 1 is not an intercepted store");
    // Not covered: the pair is excluded only through the intercepted-store rule.
    c.expect(r.feasibility.covered_load.count({load, "x"}) == 0, "load of x should not be covered");
}

Program with_priorities(Program p, int irq0, int irq1) {
    p.handlers[*p.handler_index("irq0")].priority = irq0;
    p.handlers[*p.handler_index("irq1")].priority = irq1;
    return p;
}

void criterion_quadrants(Check& c) {
    const std::array<std::string, 4> names = {"covered_intercepted", "covered_not_intercepted",
                                              "uncovered_intercepted", "uncovered_not_intercepted"};
    int cases = 0;
    for (const std::string& name : names) {
        const nlohmann::json q = sidecar(name)["quadrant"];
        const Program base = corpus_program(name);
        struct Ordering {
            int irq0;
            int irq1;
            const char* key;
        };
        for (const Ordering& o : {Ordering{0, 1, "pruned_when_irq1_preempts_irq0"},
                                  Ordering{1, 0, "pruned_when_irq0_preempts_irq1"}}) {
            ++cases;
            const Program p = with_priorities(base, o.irq0, o.irq1);
            const AnalysisResult r = analyze(p, AnalysisConfig{});
            const NodeId load = parse_node(p, q["load"]);
            const NodeId store = parse_node(p, q["store"]);
            const std::string var = q["var"];
            const std::string label = name + " (" + o.key + ")";
            c.expect(r.feasibility.covered_load.count({load, var}) == static_cast<std::size_t>(q["covered_load"].get<bool>()),
                     label + ": covered-load classification");
            c.expect(r.feasibility.intercepted_store.count({store, var}) ==
                         static_cast<std::size_t>(q["intercepted_store"].get<bool>()),
                     label + ": intercepted-store classification");
            const bool pruned = r.feasibility.excludes(load, store, var);
            c.expect(pruned == q[o.key].get<bool>(), label + ": must-not-read-from membership");

            // Independent check: a pair left in must be observable, a pruned one must not.
            OracleConfig oc;
            const OracleResult concrete = enumerate(p, oc);
            const bool observed = concrete.flows.count(ReadFromPair{load, store, var}) > 0;
            c.expect(observed == !q[o.key].get<bool>(), label + ": oracle disagrees with the expected table entry");
        }
    }
    c.expect(cases == 8, "expected 8 quadrant cases");
}

std::set<std::vector<std::string>> traces_after(const Program& p, const OracleResult& r, const std::string& first) {
    std::set<std::vector<std::string>> out;
    for (const auto& trace : r.traces) {
        if (trace.empty() || node_name(p, trace.front()) != first) {
            continue;
        }
        std::vector<std::string> names;
        for (NodeId n : trace) {
            names.push_back(node_name(p, n));
        }
        out.insert(names);
    }
    return out;
}

void criterion_traces(Check& c) {
    const Program p = corpus_program("two_handler_traces");
    const nlohmann::json t = sidecar("two_handler_traces")["traces_after_first"];
    OracleConfig oc;
    oc.record_traces = true;
    const auto interrupts = traces_after(p, enumerate(p, oc), t["first"]);
    const auto threads = traces_after(p, thread_enumerate(p, oc), t["first"]);
    auto expected = [](const nlohmann::json& j) {
        std::set<std::vector<std::string>> out;
        for (const auto& trace : j) {
            out.insert(trace.get<std::vector<std::string>>());
        }
        return out;
    };
    c.expect(interrupts == expected(t["interrupts"]), "interrupt traces differ");
    c.expect(threads == expected(t["threads"]), "thread traces differ");
    c.expect(interrupts.size() == 2, "expected 2 interrupt traces, got " + std::to_string(interrupts.size()));
    c.expect(threads.size() == 3, "expected 3 thread traces, got " + std::to_string(threads.size()));
}

struct Sample {
    std::string source;
    Program program;
    OracleResult concrete;
    AnalysisResult pruned;
    AnalysisResult plain;
};

// Random programs that the oracle can enumerate exhaustively within the ceiling.
const std::vector<Sample>& random_corpus() {
    static const std::vector<Sample> samples = [] {
        std::vector<Sample> out;
        // IRQV_RANDOM_PROGRAMS / IRQV_RANDOM_SEED enlarge or reseed the corpus.
        const char* count_env = std::getenv("IRQV_RANDOM_PROGRAMS");
        const char* seed_env = std::getenv("IRQV_RANDOM_SEED");
        const std::size_t count = std::max<std::size_t>(500, count_env ? std::stoul(count_env) : 0);
        std::mt19937_64 rng(seed_env ? std::stoull(seed_env) : 20240611);
        int skipped = 0;
        std::size_t flows = 0;
        std::size_t pruned = 0;
        std::size_t proved = 0;
        std::size_t violated = 0;
        while (out.size() < count) {
            Sample s;
            s.source = random_program(rng);
            s.program = parse_program(s.source);
            OracleConfig oc;
            oc.max_invocations = std::uniform_int_distribution<int>(1, 2)(rng);
            oc.unroll = std::uniform_int_distribution<int>(1, 2)(rng);
            oc.state_ceiling = 300'000;
            try {
                s.concrete = enumerate(s.program, oc);
            } catch (const OracleLimitExceeded&) {
                ++skipped;
                continue;
            }
            AnalysisConfig off;
            off.pruning = false;
            s.pruned = analyze(s.program, AnalysisConfig{});
            s.plain = analyze(s.program, off);
            flows += s.concrete.flows.size();
            pruned += s.pruned.feasibility.must_not_read_from.size();
            violated += s.concrete.violated.size();
            for (const AssertionResult& a : s.pruned.report.verdicts) {
                proved += a.verdict == AssertionVerdict::Proved;
            }
            out.push_back(std::move(s));
        }
        std::cerr << "random corpus: " << out.size() << " programs (" << skipped
                  << " skipped at the state ceiling), " << flows << " observed flows, " << pruned
                  << " pruned pairs, " << proved << " proofs, " << violated << " violated assertions\n";
        return out;
    }();
    return samples;
}

void criterion_mnrf_sound(Check& c) {
    std::size_t pruned_pairs = 0;
    for (const Sample& s : random_corpus()) {
        pruned_pairs += s.pruned.feasibility.must_not_read_from.size();
        for (const ReadFromPair& pr : s.pruned.feasibility.must_not_read_from) {
            if (s.concrete.flows.count(pr)) {
                c.expect(false, "pruned pair " + node_name(s.program, pr.load) + " <- " +
                                    node_name(s.program, pr.store) + " observed in:\n" + s.source);
            }
        }
    }
    // Guard against a vacuous pass.
    c.expect(pruned_pairs > 0, "no program in the random corpus had a pruned pair");
}

void check_values(const Sample& s, const AnalysisResult& r, const std::string& mode, Check& c) {
    for (const auto& [node, vars] : s.concrete.assertion_values) {
        const AbstractState& st = r.states[node.handler].input[node.index];
        for (const auto& [var, range] : vars) {
            const Interval abs = st.get(var);
            if (!abs.contains(range.lo) || !abs.contains(range.hi)) {
                c.expect(false, mode + ": " + var + " in [" + std::to_string(range.lo) + ", " +
                                    std::to_string(range.hi) + "] escapes " + to_string(abs) + " at " +
                                    node_name(s.program, node) + " in:\n" + s.source);
            }
        }
    }
    for (const AssertionResult& a : r.report.verdicts) {
        if (a.verdict == AssertionVerdict::Proved && s.concrete.violated.count(a.assertion_id)) {
            c.expect(false, mode + ": " + a.assertion_id + " Proved but violated in:\n" + s.source);
        }
    }
}

void criterion_analyzer_sound(Check& c) {
    std::size_t proved = 0;
    std::size_t checked_nodes = 0;
    for (const Sample& s : random_corpus()) {
        check_values(s, s.pruned, "pruning", c);
        check_values(s, s.plain, "no pruning", c);
        checked_nodes += s.concrete.assertion_values.size();
        for (const AssertionResult& a : s.pruned.report.verdicts) {
            proved += a.verdict == AssertionVerdict::Proved;
        }
    }
    c.expect(checked_nodes > 0 && proved > 0, "random corpus exercised no assertions");
}

void criterion_pruning_refines(Check& c) {
    for (const Sample& s : random_corpus()) {
        for (std::size_t h = 0; h < s.pruned.states.size(); ++h) {
            const NodeStates& a = s.pruned.states[h];
            const NodeStates& b = s.plain.states[h];
            for (std::size_t n = 0; n < a.input.size(); ++n) {
                if (!leq(a.input[n], b.input[n]) || !leq(a.pre[n], b.pre[n])) {
                    c.expect(false, "state at " + node_name(s.program, NodeId{static_cast<std::uint32_t>(h),
                                                                               static_cast<std::uint32_t>(n)}) +
                                        " with pruning " + to_string(a.input[n]) + " not below " +
                                        to_string(b.input[n]) + " in:\n" + s.source);
                }
            }
        }
        for (std::size_t i = 0; i < s.plain.report.verdicts.size(); ++i) {
            if (s.plain.report.verdicts[i].verdict == AssertionVerdict::Proved &&
                s.pruned.report.verdicts[i].verdict != AssertionVerdict::Proved) {
                c.expect(false, "proof lost by enabling pruning in:\n" + s.source);
            }
        }
    }
}

Interval random_interval(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 9);
    const int shape = pick(rng);
    if (shape == 0) {
        return Interval::bottom();
    }
    if (shape == 1) {
        return Interval::top();
    }
    std::uniform_int_distribution<std::int64_t> value(-5, 5);
    std::int64_t a = value(rng);
    std::int64_t b = value(rng);
    if (a > b) {
        std::swap(a, b);
    }
    std::optional<std::int64_t> lo = a;
    std::optional<std::int64_t> hi = b;
    if (shape == 2) {
        lo.reset();
    } else if (shape == 3) {
        hi.reset();
    }
    return Interval::range(lo, hi);
}

void criterion_lattice_and_dominance(Check& c) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const Interval a = random_interval(rng);
        const Interval b = random_interval(rng);
        const Interval d = random_interval(rng);
        const std::string ctx = " for " + to_string(a) + ", " + to_string(b) + ", " + to_string(d);
        c.expect(a.join(b) == b.join(a), "join not commutative" + ctx);
        c.expect(a.meet(b) == b.meet(a), "meet not commutative" + ctx);
        c.expect(a.join(b).join(d) == a.join(b.join(d)), "join not associative" + ctx);
        c.expect(a.meet(b).meet(d) == a.meet(b.meet(d)), "meet not associative" + ctx);
        c.expect(a.join(a) == a && a.meet(a) == a, "idempotence" + ctx);
        c.expect(a.join(a.meet(b)) == a && a.meet(a.join(b)) == a, "absorption" + ctx);
        c.expect(a.leq(b) == (a.join(b) == b), "order inconsistent with join" + ctx);
        c.expect(Interval::bottom().leq(a) && a.leq(Interval::top()), "bottom/top bounds" + ctx);
        c.expect(a.leq(a.widen(b)) && b.leq(a.widen(b)), "widening is not an upper bound" + ctx);
        if (b.leq(a)) {
            const Interval n = a.narrow(b);
            c.expect(b.leq(n) && n.leq(a), "narrowing out of range" + ctx);
        }
    }
    // Widening an ascending chain changes the iterate at most 3 times
    // (bottom to finite, then each bound to infinity).
    for (int i = 0; i < 500; ++i) {
        Interval acc = random_interval(rng);
        Interval w = acc;
        int changes = 0;
        for (int step = 1; step <= 12; ++step) {
            acc = acc.join(random_interval(rng));
            const Interval next = w.widen(acc);
            changes += !(next == w);
            w = next;
        }
        c.expect(changes <= 3, "widening changed " + std::to_string(changes) + " times");
    }
    int cfgs = 0;
    while (cfgs < 300) {
        const Program p = parse_program(random_single_handler(rng, 5));
        const Cfg g = build_cfg(p.handlers[0]);
        if (g.size() > 12) {
            continue;
        }
        ++cfgs;
        c.expect(dominators(g) == brute_dominators(g), "dominators differ for:\n" + print_program(p));
        c.expect(post_dominators(g) == brute_post_dominators(g), "post-dominators differ for:\n" + print_program(p));
    }
}

std::string run_cli(const std::string& args) {
    const std::string cmd = std::string(IRQV_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        throw std::runtime_error("cannot run " + cmd);
    }
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    out += "\nstatus " + std::to_string(status);
    return out;
}

void criterion_determinism(Check& c) {
    const std::array<std::string, 5> commands = {"analyze --json", "analyze --json --no-pruning",
                                                 "oracle --json --track-flows", "facts --json", "compare --json"};
    for (const std::string& name : corpus_names()) {
        for (const std::string& cmd : commands) {
            const std::string args = cmd + " " + corpus_path(name);
            const std::string first = run_cli(args);
            const std::string second = run_cli(args);
            c.expect(first == second, "output differs between runs: " + args);
            c.expect(first.find('{') != std::string::npos, "no JSON produced: " + args);
        }
    }
}

} // namespace

int main() {
    struct Criterion {
        int number;
        std::string title;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "golden verdicts, three priorities (pruning proves irq_M; without, a bogus warning)",
         [](Check& c) { check_golden("priority_three_handlers", c); }},
        {2, "golden verdicts, post-dominating branch stores", [](Check& c) { check_golden("postdom_branches", c); }},
        {3, "loop store pruned through post-dominance", criterion_loop},
        {4, "covered/intercepted quadrant matrix under both priority orderings", criterion_quadrants},
        {5, "interleavings after the first statement: interrupts vs threads", criterion_traces},
        {6, "must-not-read-from never contradicted by concrete flows on random programs", criterion_mnrf_sound},
        {7, "analyzer intervals contain all concrete assertion values, with and without pruning",
         criterion_analyzer_sound},
        {8, "pruning refines every node state", criterion_pruning_refines},
        {9, "interval lattice laws, widening stabilization, dominance vs brute force",
         criterion_lattice_and_dominance},
        {10, "CLI JSON output byte-identical across runs", criterion_determinism},
    };

    int failed = 0;
    for (const Criterion& cr : criteria) {
        Check check;
        const auto t0 = Clock::now();
        try {
            cr.run(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        const double elapsed = seconds_since(t0);
        const bool ok = check.failures.empty();
        failed += !ok;
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.3f s", elapsed);
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << cr.number << ": " << cr.title << " (" << timing
                  << ")\n";
        const std::size_t shown = std::min<std::size_t>(check.failures.size(), 5);
        for (std::size_t i = 0; i < shown; ++i) {
            std::cout << "    " << check.failures[i] << "\n";
        }
        if (check.failures.size() > shown) {
            std::cout << "    ... " << check.failures.size() - shown << " more\n";
        }
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
