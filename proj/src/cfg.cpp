// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/cfg.hpp"

#include <algorithm>
#include <sstream>

namespace irqv {

std::string_view to_string(NodeRole role) {
    switch (role) {
    case NodeRole::Entry: return "entry";
    case NodeRole::Exit: return "exit";
    case NodeRole::Statement: return "statement";
    case NodeRole::Branch: return "branch";
    case NodeRole::Join: return "join";
    case NodeRole::LoopHead: return "loop";
    }
    return "?";
}

std::string Cfg::label(std::uint32_t n) const {
    if (roles_[n] == NodeRole::Statement) {
        return to_string(instr_[n]);
    }
    return std::string(to_string(roles_[n]));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Cfg::edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t n = 0; n < succ_.size(); ++n) {
        for (std::uint32_t s : succ_[n]) {
            out.emplace_back(n, s);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> Cfg::reverse_post_order() const {
    std::vector<std::uint32_t> order;
    std::vector<bool> seen(size(), false);
    // Iterative DFS; each stack entry is (node, next successor to visit).
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{entry_, 0}};
    seen[entry_] = true;
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < succ_[node].size()) {
            const std::uint32_t s = succ_[node][next++];
            if (!seen[s]) {
                seen[s] = true;
                stack.emplace_back(s, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

class CfgBuilder {
public:
    CfgBuilder(const Handler& h, std::uint32_t handler_index) {
        g_.handler_ = h.name;
        g_.handler_index_ = handler_index;
        g_.entry_ = add(NodeRole::Entry, Instruction::skip());
        const std::uint32_t last = lower(h.body, g_.entry_);
        g_.exit_ = add(NodeRole::Exit, Instruction::skip());
        connect(last, g_.exit_);
    }

    Cfg take() { return std::move(g_); }

private:
    std::uint32_t add(NodeRole role, Instruction instr) {
        g_.instr_.push_back(std::move(instr));
        g_.roles_.push_back(role);
        g_.succ_.emplace_back();
        g_.pred_.emplace_back();
        return static_cast<std::uint32_t>(g_.instr_.size() - 1);
    }

    void connect(std::uint32_t from, std::uint32_t to) {
        auto& out = g_.succ_[from];
        if (std::find(out.begin(), out.end(), to) == out.end()) {
            out.push_back(to);
            g_.pred_[to].push_back(from);
        }
    }

    std::uint32_t append(std::uint32_t cur, Instruction instr) {
        const std::uint32_t n = add(NodeRole::Statement, std::move(instr));
        connect(cur, n);
        return n;
    }

    std::uint32_t lower(const std::vector<Stmt>& body, std::uint32_t cur) {
        for (const Stmt& s : body) {
            cur = lower(s, cur);
        }
        return cur;
    }

    std::uint32_t lower(const Stmt& s, std::uint32_t cur) {
        switch (s.kind) {
        case Stmt::Kind::Assign:
        case Stmt::Kind::Local: return append(cur, Instruction::assign(s.target, s.expr));
        case Stmt::Kind::Assume: return append(cur, Instruction::assume(*s.cond));
        case Stmt::Kind::Assert: return append(cur, Instruction::assertion(*s.cond, s.assertion_id));
        case Stmt::Kind::Havoc: return append(cur, Instruction::havoc(s.target));
        case Stmt::Kind::Skip: return append(cur, Instruction::skip());
        case Stmt::Kind::If: {
            const std::uint32_t branch = add(NodeRole::Branch, Instruction::skip());
            connect(cur, branch);
            std::uint32_t then_start = branch;
            std::uint32_t else_start = branch;
            if (s.cond) {
                then_start = append(branch, Instruction::assume(*s.cond));
                else_start = append(branch, Instruction::assume(negate(*s.cond)));
            }
            const std::uint32_t then_end = lower(s.then_body, then_start);
            const std::uint32_t else_end = lower(s.else_body, else_start);
            const std::uint32_t join = add(NodeRole::Join, Instruction::skip());
            connect(then_end, join);
            connect(else_end, join);
            return join;
        }
        case Stmt::Kind::While: {
            const std::uint32_t head = add(NodeRole::LoopHead, Instruction::skip());
            connect(cur, head);
            const std::uint32_t body_start = s.cond ? append(head, Instruction::assume(*s.cond)) : head;
            const std::uint32_t body_end = lower(s.then_body, body_start);
            connect(body_end, head);
            g_.back_edges_.insert({body_end, head});
            return s.cond ? append(head, Instruction::assume(negate(*s.cond))) : head;
        }
        }
        return cur;
    }

    Cfg g_;
};

Cfg build_cfg(const Handler& h, std::uint32_t handler_index) { return CfgBuilder(h, handler_index).take(); }

std::vector<Cfg> build_cfgs(const Program& p) {
    std::vector<Cfg> out;
    out.reserve(p.handlers.size());
    for (std::uint32_t i = 0; i < p.handlers.size(); ++i) {
        out.push_back(build_cfg(p.handlers[i], i));
    }
    return out;
}

namespace {

// Iterative dataflow: D(root) = {root}, D(n) = {n} ∪ ⋂ D(p) over the
// predecessors p in the chosen direction. Returns D as membership rows.
std::vector<std::vector<bool>> dominance_sets(std::size_t n, std::uint32_t root, const std::vector<std::uint32_t>& order,
                                              const auto& preds_of) {
    std::vector<std::vector<bool>> dom(n, std::vector<bool>(n, true));
    dom[root].assign(n, false);
    dom[root][root] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::uint32_t b : order) {
            if (b == root) {
                continue;
            }
            std::vector<bool> next(n, true);
            for (std::uint32_t p : preds_of(b)) {
                for (std::size_t i = 0; i < n; ++i) {
                    next[i] = next[i] && dom[p][i];
                }
            }
            next[b] = true;
            if (next != dom[b]) {
                dom[b] = std::move(next);
                changed = true;
            }
        }
    }
    return dom;
}

NodeRelation to_relation(const Cfg& g, const std::vector<std::vector<bool>>& sets) {
    NodeRelation out;
    for (std::uint32_t b = 0; b < sets.size(); ++b) {
        for (std::uint32_t a = 0; a < sets[b].size(); ++a) {
            if (sets[b][a]) {
                out.emplace(g.id(a), g.id(b));
            }
        }
    }
    return out;
}

} // namespace

NodeRelation dominators(const Cfg& g) {
    const auto sets =
        dominance_sets(g.size(), g.entry(), g.reverse_post_order(), [&](std::uint32_t b) { return g.pred(b); });
    return to_relation(g, sets);
}

NodeRelation post_dominators(const Cfg& g) {
    // Reverse post-order of the forward graph, reversed, is a good visiting
    // order for the backward problem.
    std::vector<std::uint32_t> order = g.reverse_post_order();
    std::reverse(order.begin(), order.end());
    for (std::uint32_t n = 0; n < g.size(); ++n) {
        if (std::find(order.begin(), order.end(), n) == order.end()) {
            order.push_back(n);
        }
    }
    const auto sets = dominance_sets(g.size(), g.exit(), order, [&](std::uint32_t b) { return g.succ(b); });
    return to_relation(g, sets);
}

AccessInfo access_info(const Cfg& g, const Program& p) {
    AccessInfo info;
    for (std::uint32_t n = 0; n < g.size(); ++n) {
        const Instruction& instr = g.instr(n);
        for (const VarRef& v : reads_of(instr)) {
            if (v.is_global() && p.is_global(v.name)) {
                info.loads.emplace(g.id(n), v.name);
            }
        }
        if (auto w = write_of(instr); w && w->is_global() && p.is_global(w->name)) {
            info.stores.emplace(g.id(n), w->name);
        }
    }
    return info;
}

std::string node_name(const Program& p, NodeId n) {
    const std::string handler =
        n.handler < p.handlers.size() ? p.handlers[n.handler].name : "h" + std::to_string(n.handler);
    return handler + ":" + std::to_string(n.index);
}

std::string dump_cfg(const Program& p, const Cfg& g) {
    std::ostringstream os;
    for (std::uint32_t n = 0; n < g.size(); ++n) {
        os << "node " << node_name(p, g.id(n)) << ' ' << to_string(g.role(n));
        if (g.role(n) == NodeRole::Statement) {
            os << " \"" << g.label(n) << '"';
        }
        os << '\n';
    }
    for (const auto& [from, to] : g.edges()) {
        os << "edge " << node_name(p, g.id(from)) << ' ' << node_name(p, g.id(to))
           << (g.is_back_edge(from, to) ? " back" : "") << '\n';
    }
    for (const auto& [a, b] : dominators(g)) {
        os << "dom " << node_name(p, a) << ' ' << node_name(p, b) << '\n';
    }
    for (const auto& [a, b] : post_dominators(g)) {
        os << "postdom " << node_name(p, a) << ' ' << node_name(p, b) << '\n';
    }
    return os.str();
}

} // namespace irqv
