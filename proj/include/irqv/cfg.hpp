// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "irqv/ir.hpp"

namespace irqv {

/// A CFG node, unique across the whole program: the owning handler's index
/// and the node's position in that handler's graph.
struct NodeId {
    std::uint32_t handler = 0;
    std::uint32_t index = 0;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// Role of a node in the lowered graph. Only `Statement` nodes come from
/// source statements; the rest are structural and carry `skip`.
enum class NodeRole { Entry, Exit, Statement, Branch, Join, LoopHead };

std::string_view to_string(NodeRole role);

using NodePair = std::pair<NodeId, NodeId>;
using NodeRelation = std::set<NodePair>;

/// Per-handler control-flow graph with one instruction per node, a synthetic
/// entry with no predecessors and a synthetic exit that every node reaches.
class Cfg {
public:
    const std::string& handler() const { return handler_; }
    std::uint32_t handler_index() const { return handler_index_; }

    std::size_t size() const { return instr_.size(); }
    NodeId id(std::uint32_t index) const { return NodeId{handler_index_, index}; }
    std::uint32_t entry() const { return entry_; }
    std::uint32_t exit() const { return exit_; }

    const Instruction& instr(std::uint32_t n) const { return instr_[n]; }
    NodeRole role(std::uint32_t n) const { return roles_[n]; }
    const std::vector<std::uint32_t>& succ(std::uint32_t n) const { return succ_[n]; }
    const std::vector<std::uint32_t>& pred(std::uint32_t n) const { return pred_[n]; }

    bool is_loop_head(std::uint32_t n) const { return roles_[n] == NodeRole::LoopHead; }
    bool is_back_edge(std::uint32_t from, std::uint32_t to) const { return back_edges_.count({from, to}) > 0; }

    /// Display label: the instruction text for statements, the role otherwise.
    std::string label(std::uint32_t n) const;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

    /// Reverse post-order from the entry, ignoring back edges' effect on order.
    std::vector<std::uint32_t> reverse_post_order() const;

private:
    friend class CfgBuilder;

    std::string handler_;
    std::uint32_t handler_index_ = 0;
    std::vector<Instruction> instr_;
    std::vector<NodeRole> roles_;
    std::vector<std::vector<std::uint32_t>> succ_;
    std::vector<std::vector<std::uint32_t>> pred_;
    std::set<std::pair<std::uint32_t, std::uint32_t>> back_edges_;
    std::uint32_t entry_ = 0;
    std::uint32_t exit_ = 0;
};

/// Lowers a handler body: `if` becomes a diamond (branch, assume per arm,
/// join), `while` a loop head with an assume-guarded body and a back edge.
/// Nondeterministic `*` conditions produce no assume nodes.
Cfg build_cfg(const Handler& h, std::uint32_t handler_index = 0);

std::vector<Cfg> build_cfgs(const Program& p);

/// Dom(a, b): every path from entry to b passes through a. Reflexive.
NodeRelation dominators(const Cfg& g);

/// PostDom(a, b): every path from b to the exit passes through a. Reflexive.
NodeRelation post_dominators(const Cfg& g);

using AccessSet = std::set<std::pair<NodeId, std::string>>;

struct AccessInfo {
    AccessSet loads;
    AccessSet stores;
};

/// Global reads and writes per node. Assertions load every global in their
/// condition; `x = x + 1` is both a load and a store of x at one node.
AccessInfo access_info(const Cfg& g, const Program& p);

/// "handler:index", the textual node name used in dumps.
std::string node_name(const Program& p, NodeId n);

/// Line-oriented dump of nodes, edges, Dom and PostDom.
std::string dump_cfg(const Program& p, const Cfg& g);

} // namespace irqv
