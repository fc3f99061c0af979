// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Priority-aware feasibility of store-to-load data flows between handlers.
//
// Facts (Dom, PostDom, Pri, Load, Store) are extracted from the lowered
// program and three derived relations are evaluated natively:
//
//   NoPreempt(s1, s2)      <- Pri(s1, p1), Pri(s2, p2), p2 >= p1   (separate handlers)
//   CoveredLoad(l, v)      <- Load(l, v), Store(s, v), Dom(s, l), s != l
//   InterceptedStore(s, v) <- Store(s, v), Store(s2, v), PostDom(s2, s), s2 != s
//
// and MustNotReadFrom(l, s, v), for a load and store of v in different
// handlers, holds when one of
//
//   (R1) CoveredLoad(l, v) and InterceptedStore(s, v)
//   (R2) CoveredLoad(l, v) and NoPreempt(s, l)
//   (R3) InterceptedStore(s, v) and NoPreempt(l, s)
//
// The rules are non-recursive, so one stratified pass computes everything.
// The result under-approximates the infeasible flows: every pair in it is
// unobservable on any concrete interrupt execution.

#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "irqv/cfg.hpp"

namespace irqv {

struct FactBase {
    NodeRelation dom;
    NodeRelation postdom;
    std::map<NodeId, int> pri;
    AccessSet load;
    AccessSet store;
    std::map<NodeId, std::string> handler_of;
};

/// A (load, store, variable) triple; used both for derived infeasibility and
/// for flows observed by the oracle.
struct ReadFromPair {
    NodeId load;
    NodeId store;
    std::string var;

    friend auto operator<=>(const ReadFromPair&, const ReadFromPair&) = default;
};

struct FeasibilityResult {
    NodeRelation no_preempt;
    AccessSet covered_load;
    AccessSet intercepted_store;
    std::set<ReadFromPair> must_not_read_from;

    bool excludes(NodeId load, NodeId store, const std::string& var) const {
        return must_not_read_from.count(ReadFromPair{load, store, var}) > 0;
    }
};

FactBase extract_facts(const Program& p, std::span<const Cfg> cfgs, std::span<const AccessInfo> infos);

NodeRelation no_preempt(const FactBase& fb);
AccessSet covered_loads(const FactBase& fb);
AccessSet intercepted_stores(const FactBase& fb);
FeasibilityResult must_not_read_from(const FactBase& fb);

/// Every cross-handler same-variable (load, store) pair: the candidate flows
/// a priority-unaware thread analysis would propagate.
std::set<ReadFromPair> cross_handler_pairs(const FactBase& fb);

struct PairStats {
    std::size_t total = 0;
    std::size_t pruned = 0;
    double ratio = 0.0; // pruned / total, 0 when total is 0
};

PairStats pair_statistics(const FactBase& fb, const FeasibilityResult& r);

/// `REL(arg, ...)` tuples for every fact and derived relation, one per line,
/// sorted lexicographically.
std::vector<std::string> dump_facts(const Program& p, const FactBase& fb, const FeasibilityResult& r);

} // namespace irqv
