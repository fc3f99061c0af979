// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/analyzer.hpp"

#include <deque>
#include <stdexcept>

namespace irqv {

void AnalysisConfig::check() const {
    if (widening_delay < 0) {
        throw std::invalid_argument("widening delay must be non-negative");
    }
    if (max_outer_iterations < 1) {
        throw std::invalid_argument("max outer iterations must be at least 1");
    }
    if (descending_rounds < 0) {
        throw std::invalid_argument("descending rounds must be non-negative");
    }
}

std::string_view to_string(AssertionVerdict v) { return v == AssertionVerdict::Proved ? "Proved" : "Warning"; }

AbstractState initial_state(const Program& p) {
    AbstractState s;
    for (const Global& g : p.globals) {
        s.set(g.name, Interval::constant(g.init));
    }
    return s;
}

AbstractState read_state(const Cfg& g, std::uint32_t n, const AbstractState& pre, const InterferenceMap& interference,
                         const FeasibilityResult& feasibility, bool pruning) {
    if (pre.is_bottom()) {
        return pre;
    }
    AbstractState out = pre;
    for (const VarRef& v : reads_of(g.instr(n))) {
        if (!v.is_global()) {
            continue;
        }
        auto it = interference.find(v.name);
        if (it == interference.end()) {
            continue;
        }
        Interval value = pre.get(v.name);
        for (const StoreValue& sv : it->second) {
            if (pruning && feasibility.excludes(g.id(n), sv.store, v.name)) {
                continue;
            }
            value = value.join(sv.value);
        }
        out.set(v.name, value);
    }
    return out;
}

NodeStates analyze_local(const Cfg& g, const AbstractState& entry, const InterferenceMap& interference,
                         const FeasibilityResult& feasibility, const AnalysisConfig& config) {
    const std::size_t n_nodes = g.size();
    std::vector<AbstractState> pre(n_nodes, AbstractState::bottom());
    pre[g.entry()] = entry;

    auto post_of = [&](std::uint32_t n, const std::vector<AbstractState>& states) {
        return transfer(g.instr(n), read_state(g, n, states[n], interference, feasibility, config.pruning));
    };

    std::deque<std::uint32_t> worklist;
    std::vector<bool> queued(n_nodes, false);
    for (std::uint32_t n : g.reverse_post_order()) {
        worklist.push_back(n);
        queued[n] = true;
    }
    std::vector<int> visits(n_nodes, 0);
    while (!worklist.empty()) {
        const std::uint32_t n = worklist.front();
        worklist.pop_front();
        queued[n] = false;
        const AbstractState post = post_of(n, pre);
        if (post.is_bottom()) {
            continue;
        }
        for (std::uint32_t m : g.succ(n)) {
            if (leq(post, pre[m])) {
                continue;
            }
            if (g.is_loop_head(m) && visits[m] >= config.widening_delay) {
                pre[m] = widen(pre[m], join(pre[m], post));
            } else {
                pre[m] = join(pre[m], post);
            }
            ++visits[m];
            if (!queued[m]) {
                worklist.push_back(m);
                queued[m] = true;
            }
        }
    }

    // Descending passes in reverse post order; each update reads the states
    // already narrowed in this pass, so loop exits see the recovered bound.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::uint32_t m : g.reverse_post_order()) {
            if (m == g.entry()) {
                continue;
            }
            AbstractState incoming = AbstractState::bottom();
            for (std::uint32_t p : g.pred(m)) {
                incoming = join(incoming, post_of(p, pre));
            }
            pre[m] = narrow(pre[m], incoming);
        }
    }

    NodeStates out;
    out.input.reserve(n_nodes);
    for (std::uint32_t n = 0; n < n_nodes; ++n) {
        out.input.push_back(read_state(g, n, pre[n], interference, feasibility, config.pruning));
    }
    out.pre = std::move(pre);
    return out;
}

InterferenceMap collect_interferences(const Cfg& g, const NodeStates& states) {
    InterferenceMap out;
    for (std::uint32_t n = 0; n < g.size(); ++n) {
        const auto target = write_of(g.instr(n));
        if (!target || !target->is_global() || states.input[n].is_bottom()) {
            continue;
        }
        const Interval value = transfer(g.instr(n), states.input[n]).get(target->name);
        if (!value.is_bottom()) {
            out[target->name].push_back(StoreValue{g.id(n), value});
        }
    }
    return out;
}

void merge_into(InterferenceMap& into, const InterferenceMap& from) {
    for (const auto& [var, entries] : from) {
        auto& dst = into[var];
        dst.insert(dst.end(), entries.begin(), entries.end());
    }
}

namespace {

NodeStates bottom_states(const Cfg& g) {
    return NodeStates{std::vector<AbstractState>(g.size(), AbstractState::bottom()),
                      std::vector<AbstractState>(g.size(), AbstractState::bottom())};
}

void accumulate(std::vector<AbstractState>& into, const std::vector<AbstractState>& from, bool widening) {
    for (std::size_t i = 0; i < into.size(); ++i) {
        const AbstractState joined = join(into[i], from[i]);
        into[i] = widening ? widen(into[i], joined) : joined;
    }
}

void meet_into(std::vector<NodeStates>& into, const std::vector<NodeStates>& other) {
    for (std::size_t h = 0; h < into.size(); ++h) {
        for (std::size_t n = 0; n < into[h].pre.size(); ++n) {
            into[h].pre[n] = meet(into[h].pre[n], other[h].pre[n]);
            into[h].input[n] = meet(into[h].input[n], other[h].input[n]);
        }
    }
}

struct Solution {
    std::vector<NodeStates> states;
    int rounds = 0;
    bool converged = false;
};

// Soundness of everything below rests on one fact: a round computed from
// states that cover all reachable concrete states covers them again, since
// its interferences and entries then cover every concrete write and entry.
// Meets of such states are therefore sound too.
Solution solve(const std::vector<Cfg>& cfgs, const AbstractState& init, const FeasibilityResult& feasibility,
               const AnalysisConfig& config) {
    const std::size_t n_handlers = cfgs.size();

    // One round: every handler against the interferences of the others in
    // `from`, entered from the initial values or its own previous exit.
    auto round_from = [&](const std::vector<NodeStates>& from, const AnalysisConfig& cfg) {
        std::vector<InterferenceMap> produced(n_handlers);
        for (std::size_t h = 0; h < n_handlers; ++h) {
            produced[h] = collect_interferences(cfgs[h], from[h]);
        }
        std::vector<NodeStates> out;
        for (std::size_t h = 0; h < n_handlers; ++h) {
            InterferenceMap interference;
            for (std::size_t other = 0; other < n_handlers; ++other) {
                if (other != h) {
                    merge_into(interference, produced[other]);
                }
            }
            // Values left by other handlers arrive through interference at
            // each read, so the entry only needs this handler's own exit.
            const AbstractState entry = join(init, from[h].pre[cfgs[h].exit()]);
            out.push_back(analyze_local(cfgs[h], entry, interference, feasibility, cfg));
        }
        return out;
    };

    auto ascend = [&](const AnalysisConfig& cfg) {
        Solution s;
        for (const Cfg& g : cfgs) {
            s.states.push_back(bottom_states(g));
        }
        while (!s.converged && s.rounds < cfg.max_outer_iterations) {
            ++s.rounds;
            const std::vector<NodeStates> local = round_from(s.states, cfg);
            std::vector<NodeStates> next = s.states;
            const bool widening = s.rounds > cfg.widening_delay;
            for (std::size_t h = 0; h < n_handlers; ++h) {
                accumulate(next[h].pre, local[h].pre, widening);
                accumulate(next[h].input, local[h].input, widening);
            }
            s.converged = next == s.states;
            s.states = std::move(next);
        }
        return s;
    };

    // Recovers bounds lost to widening across rounds.
    auto descend = [&](Solution& s, const AnalysisConfig& cfg) {
        for (int i = 0; s.converged && i < cfg.descending_rounds; ++i) {
            std::vector<NodeStates> next = round_from(s.states, cfg);
            meet_into(next, s.states);
            if (next == s.states) {
                break;
            }
            s.states = std::move(next);
        }
    };

    Solution solution = ascend(config);
    descend(solution, config);
    if (!config.pruning || !solution.converged) {
        return solution;
    }
    // Widening is not monotone, so the pruned run can end up coarser than the
    // unpruned one at some node. Both are sound; start from their meet.
    AnalysisConfig plain = config;
    plain.pruning = false;
    Solution unpruned = ascend(plain);
    descend(unpruned, plain);
    if (!unpruned.converged) {
        return solution;
    }
    meet_into(solution.states, unpruned.states);
    descend(solution, config);
    return solution;
}

} // namespace

AnalysisResult analyze(const Program& p, const AnalysisConfig& config) {
    config.check();
    AnalysisResult r;
    r.cfgs = build_cfgs(p);
    std::vector<AccessInfo> infos;
    for (const Cfg& g : r.cfgs) {
        infos.push_back(access_info(g, p));
    }
    r.facts = extract_facts(p, r.cfgs, infos);
    r.feasibility = must_not_read_from(r.facts);

    const std::size_t n_handlers = r.cfgs.size();
    const Solution solution = solve(r.cfgs, initial_state(p), r.feasibility, config);
    r.states = solution.states;
    const bool converged = solution.converged;
    const int round = solution.rounds;

    AnalysisReport& report = r.report;
    report.iterations = round;
    report.converged = converged;
    report.pruning_enabled = config.pruning;
    report.pairs = pair_statistics(r.facts, r.feasibility);
    for (std::size_t h = 0; h < n_handlers; ++h) {
        for (const auto& [var, entries] : collect_interferences(r.cfgs[h], r.states[h])) {
            report.interference_sizes[var] += entries.size();
        }
    }
    for (const Global& g : p.globals) {
        report.interference_sizes.try_emplace(g.name, 0);
    }
    for (std::size_t h = 0; h < n_handlers; ++h) {
        const Cfg& g = r.cfgs[h];
        for (std::uint32_t n = 0; n < g.size(); ++n) {
            const Instruction& instr = g.instr(n);
            if (instr.kind != Instruction::Kind::Assert) {
                continue;
            }
            AssertionResult a;
            a.assertion_id = instr.assertion_id;
            a.handler = g.handler();
            a.node = g.id(n);
            // Without a fixpoint the states are not an over-approximation.
            a.verdict = converged && check_assert(instr.cond, r.states[h].input[n]) == Verdict::Proved
                            ? AssertionVerdict::Proved
                            : AssertionVerdict::Warning;
            report.verdicts.push_back(std::move(a));
        }
    }
    return r;
}

AnalysisReport analyze_program(const Program& p, const AnalysisConfig& config) { return analyze(p, config).report; }

} // namespace irqv
