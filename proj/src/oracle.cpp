// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/oracle.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

namespace irqv {

void OracleConfig::check() const {
    if (max_invocations < 1) {
        throw std::invalid_argument("oracle invocation budget must be at least 1");
    }
    if (unroll < 1) {
        throw std::invalid_argument("oracle unroll bound must be at least 1");
    }
    if (state_ceiling < 1) {
        throw std::invalid_argument("oracle state ceiling must be at least 1");
    }
}

namespace {

enum class Semantics { Interrupt, Thread };

constexpr std::int32_t kInitialWriter = -1;

struct Frame {
    std::uint32_t handler = 0;
    std::uint32_t node = 0;
    std::vector<std::int64_t> locals;
    std::vector<std::int64_t> loop_counts;
};

struct State {
    std::vector<Frame> frames; // stack (interrupts) or sorted by handler (threads)
    std::vector<std::int64_t> globals;
    std::vector<std::int32_t> writer; // flat store node index or kInitialWriter
    std::vector<std::int64_t> budget;
};

struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const {
        std::uint64_t h = 1469598103934665603ULL;
        for (std::int64_t v : key) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

__extension__ using Wide = __int128;

std::int64_t checked(Wide v) {
    if (v < std::numeric_limits<std::int64_t>::min() || v > std::numeric_limits<std::int64_t>::max()) {
        throw std::overflow_error("integer overflow during concrete execution");
    }
    return static_cast<std::int64_t>(v);
}

class Explorer {
public:
    Explorer(const Program& p, const OracleConfig& config, Semantics semantics)
        : program_(p), config_(config), semantics_(semantics), cfgs_(build_cfgs(p)) {
        config.check();
        memoize_ = config.memoize && !config.record_traces;
        for (const Cfg& g : cfgs_) {
            offsets_.push_back(static_cast<std::uint32_t>(flat_nodes_.size()));
            for (std::uint32_t n = 0; n < g.size(); ++n) {
                flat_nodes_.push_back(g.id(n));
            }
            index_locals(g);
        }
    }

    OracleResult run() {
        State s;
        for (const Global& g : program_.globals) {
            s.globals.push_back(g.init);
        }
        s.writer.assign(program_.globals.size(), kInitialWriter);
        s.budget.assign(program_.handlers.size(), config_.max_invocations);
        explore(s);
        result_.states = memoize_ ? visited_.size() : explored_;
        return std::move(result_);
    }

private:
    void index_locals(const Cfg& g) {
        std::map<std::string, std::uint32_t> slots;
        std::map<std::uint32_t, std::uint32_t> loops;
        for (std::uint32_t n = 0; n < g.size(); ++n) {
            const Instruction& instr = g.instr(n);
            std::vector<VarRef> vars = reads_of(instr);
            if (auto w = write_of(instr)) {
                vars.push_back(*w);
            }
            for (const VarRef& v : vars) {
                if (!v.is_global()) {
                    slots.try_emplace(v.name, static_cast<std::uint32_t>(slots.size()));
                }
            }
            if (g.is_loop_head(n)) {
                loops.emplace(n, static_cast<std::uint32_t>(loops.size()));
            }
        }
        local_slots_.push_back(std::move(slots));
        loop_slots_.push_back(std::move(loops));
    }

    int priority(const Frame& f) const { return program_.handlers[f.handler].priority; }

    std::int64_t read(const State& s, const Frame& f, const VarRef& v) const {
        if (v.is_global()) {
            return s.globals[*program_.global_index(v.name)];
        }
        return f.locals[local_slots_[f.handler].at(v.name)];
    }

    std::int64_t eval(const State& s, const Frame& f, const Expr& e) const {
        switch (e.kind) {
        case Expr::Kind::Constant: return e.constant;
        case Expr::Kind::Variable: return read(s, f, e.var);
        case Expr::Kind::Add: return checked(Wide{eval(s, f, e.operands[0])} + eval(s, f, e.operands[1]));
        case Expr::Kind::Sub: return checked(Wide{eval(s, f, e.operands[0])} - eval(s, f, e.operands[1]));
        case Expr::Kind::Scale: return checked(Wide{e.constant} * eval(s, f, e.operands[0]));
        }
        return 0;
    }

    bool holds(const State& s, const Frame& f, const Cond& c) const {
        const std::int64_t a = eval(s, f, c.lhs);
        const std::int64_t b = eval(s, f, c.rhs);
        switch (c.op) {
        case RelOp::Eq: return a == b;
        case RelOp::Ne: return a != b;
        case RelOp::Lt: return a < b;
        case RelOp::Le: return a <= b;
        case RelOp::Gt: return a > b;
        case RelOp::Ge: return a >= b;
        }
        return false;
    }

    void record_flows(const State& s, const Instruction& instr, NodeId at) {
        if (!config_.track_flows) {
            return;
        }
        for (const VarRef& v : reads_of(instr)) {
            if (!v.is_global()) {
                continue;
            }
            const std::int32_t w = s.writer[*program_.global_index(v.name)];
            if (w != kInitialWriter) {
                result_.flows.insert(ReadFromPair{at, flat_nodes_[static_cast<std::size_t>(w)], v.name});
            }
        }
    }

    void write(State& s, Frame& f, const VarRef& target, std::int64_t value, NodeId at) {
        if (target.is_global()) {
            const std::size_t g = *program_.global_index(target.name);
            s.globals[g] = value;
            s.writer[g] = static_cast<std::int32_t>(offsets_[at.handler] + at.index);
        } else {
            f.locals[local_slots_[f.handler].at(target.name)] = value;
        }
    }

    std::vector<std::int64_t> key_of(const State& s) const {
        std::vector<std::int64_t> key;
        key.push_back(static_cast<std::int64_t>(s.frames.size()));
        for (const Frame& f : s.frames) {
            key.push_back(f.handler);
            key.push_back(f.node);
            key.insert(key.end(), f.locals.begin(), f.locals.end());
            key.insert(key.end(), f.loop_counts.begin(), f.loop_counts.end());
        }
        key.insert(key.end(), s.globals.begin(), s.globals.end());
        key.insert(key.end(), s.writer.begin(), s.writer.end());
        key.insert(key.end(), s.budget.begin(), s.budget.end());
        return key;
    }

    Frame fresh_frame(std::uint32_t h) const {
        Frame f;
        f.handler = h;
        f.node = cfgs_[h].entry();
        f.locals.assign(local_slots_[h].size(), 0);
        f.loop_counts.assign(loop_slots_[h].size(), 0);
        return f;
    }

    void check_stack(const State& s) const {
        if (semantics_ != Semantics::Interrupt) {
            return;
        }
        for (std::size_t i = 1; i < s.frames.size(); ++i) {
            if (priority(s.frames[i]) <= priority(s.frames[i - 1])) {
                throw std::logic_error("activation stack priorities are not strictly increasing");
            }
        }
    }

    // Executes one node of frame `fi`; appends the resulting states.
    void step(const State& s, std::size_t fi, std::vector<State>& out) {
        const Frame& frame = s.frames[fi];
        const Cfg& g = cfgs_[frame.handler];
        const std::uint32_t n = frame.node;
        const Instruction& instr = g.instr(n);
        const NodeId at = g.id(n);

        std::vector<State> executed;
        switch (instr.kind) {
        case Instruction::Kind::Skip: executed.push_back(s); break;
        case Instruction::Kind::Assume:
            if (holds(s, frame, instr.cond)) {
                record_flows(s, instr, at);
                executed.push_back(s);
            }
            break;
        case Instruction::Kind::Assert: {
            record_flows(s, instr, at);
            std::vector<VarRef> vars;
            collect_reads(instr.cond, vars);
            auto& observed = result_.assertion_values[at];
            for (const VarRef& v : vars) {
                const std::int64_t value = read(s, frame, v);
                auto [it, inserted] = observed.try_emplace(v.name, ValueRange{value, value});
                if (!inserted) {
                    it->second.lo = std::min(it->second.lo, value);
                    it->second.hi = std::max(it->second.hi, value);
                }
            }
            if (!holds(s, frame, instr.cond)) {
                result_.violated.insert(instr.assertion_id);
            }
            executed.push_back(s);
            break;
        }
        case Instruction::Kind::Assign: {
            record_flows(s, instr, at);
            const std::int64_t value = eval(s, frame, instr.expr);
            State next = s;
            write(next, next.frames[fi], instr.target, value, at);
            executed.push_back(std::move(next));
            break;
        }
        case Instruction::Kind::Havoc:
            for (std::int64_t value : kHavocSamples) {
                State next = s;
                write(next, next.frames[fi], instr.target, value, at);
                executed.push_back(std::move(next));
            }
            break;
        }

        for (State& done : executed) {
            if (n == g.exit()) {
                done.frames.erase(done.frames.begin() + static_cast<std::ptrdiff_t>(fi));
                out.push_back(std::move(done));
                continue;
            }
            for (std::uint32_t m : g.succ(n)) {
                State next = done;
                Frame& f = next.frames[fi];
                if (g.is_loop_head(m)) {
                    std::int64_t& count = f.loop_counts[loop_slots_[f.handler].at(m)];
                    if (g.is_back_edge(n, m)) {
                        if (count >= config_.unroll) {
                            result_.truncated = true;
                            continue;
                        }
                        ++count;
                    } else {
                        count = 0;
                    }
                }
                f.node = m;
                out.push_back(std::move(next));
            }
        }
    }

    std::vector<State> successors(const State& s) {
        std::vector<State> out;
        const auto n_handlers = static_cast<std::uint32_t>(program_.handlers.size());
        if (semantics_ == Semantics::Interrupt) {
            if (!s.frames.empty()) {
                step(s, s.frames.size() - 1, out);
            }
            for (std::uint32_t h = 0; h < n_handlers; ++h) {
                if (s.budget[h] == 0) {
                    continue;
                }
                if (!s.frames.empty() && program_.handlers[h].priority <= priority(s.frames.back())) {
                    continue;
                }
                State next = s;
                --next.budget[h];
                next.frames.push_back(fresh_frame(h));
                out.push_back(std::move(next));
            }
        } else {
            for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
                step(s, fi, out);
            }
            for (std::uint32_t h = 0; h < n_handlers; ++h) {
                const bool active = std::any_of(s.frames.begin(), s.frames.end(),
                                                [&](const Frame& f) { return f.handler == h; });
                if (s.budget[h] == 0 || active) {
                    continue;
                }
                State next = s;
                --next.budget[h];
                auto pos = std::find_if(next.frames.begin(), next.frames.end(),
                                        [&](const Frame& f) { return f.handler > h; });
                next.frames.insert(pos, fresh_frame(h));
                out.push_back(std::move(next));
            }
        }
        return out;
    }

    void explore(const State& s) {
        if (memoize_) {
            if (!visited_.insert(key_of(s)).second) {
                return;
            }
            if (visited_.size() > config_.state_ceiling) {
                throw OracleLimitExceeded("oracle explored more than " + std::to_string(config_.state_ceiling) +
                                          " states");
            }
        } else if (++explored_ > config_.state_ceiling) {
            throw OracleLimitExceeded("oracle explored more than " + std::to_string(config_.state_ceiling) +
                                      " states");
        }
        check_stack(s);
        result_.max_depth = std::max(result_.max_depth, s.frames.size());

        std::vector<State> next = successors(s);
        if (next.empty()) {
            ++result_.executions;
            if (config_.record_traces) {
                result_.traces.insert(trace_);
            }
            return;
        }
        for (const State& t : next) {
            // The executed node, if any, is the one that moved or vanished.
            const std::size_t mark = trace_.size();
            if (config_.record_traces) {
                note_step(s, t);
            }
            explore(t);
            trace_.resize(mark);
        }
    }

    // Appends the statement executed between `from` and `to` to the trace.
    void note_step(const State& from, const State& to) {
        if (to.frames.size() > from.frames.size()) {
            return; // invocation
        }
        for (const Frame& f : from.frames) {
            auto it = std::find_if(to.frames.begin(), to.frames.end(),
                                   [&](const Frame& t) { return t.handler == f.handler; });
            if (it != to.frames.end() && it->node == f.node && it->locals == f.locals &&
                it->loop_counts == f.loop_counts) {
                continue;
            }
            const Cfg& g = cfgs_[f.handler];
            if (g.role(f.node) == NodeRole::Statement) {
                trace_.push_back(g.id(f.node));
            }
            return;
        }
    }

    const Program& program_;
    OracleConfig config_;
    Semantics semantics_;
    std::vector<Cfg> cfgs_;
    bool memoize_ = true;
    std::vector<std::uint32_t> offsets_;
    std::vector<NodeId> flat_nodes_;
    std::vector<std::map<std::string, std::uint32_t>> local_slots_;
    std::vector<std::map<std::uint32_t, std::uint32_t>> loop_slots_;
    std::unordered_set<std::vector<std::int64_t>, KeyHash> visited_;
    std::size_t explored_ = 0;
    std::vector<NodeId> trace_;
    OracleResult result_;
};

} // namespace

OracleResult enumerate(const Program& p, const OracleConfig& config) {
    return Explorer(p, config, Semantics::Interrupt).run();
}

OracleResult thread_enumerate(const Program& p, const OracleConfig& config) {
    return Explorer(p, config, Semantics::Thread).run();
}

} // namespace irqv
