// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Modular abstract interpretation of interrupt-driven programs.
//
// Each handler is analyzed in isolation against the interferences of the
// other handlers (the abstract values their stores may write). Interferences
// are kept as per-store (node, value) pairs so that individual store-to-load
// flows proven infeasible can be dropped at each load. The per-handler
// analyses are iterated until the node states of all handlers stabilize,
// then refined by a few descending rounds.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "irqv/cfg.hpp"
#include "irqv/domain.hpp"
#include "irqv/feasibility.hpp"

namespace irqv {

struct AnalysisConfig {
    bool pruning = true;
    int widening_delay = 2;
    int max_outer_iterations = 100;
    /// Rounds recomputed from the converged states without accumulation;
    /// recovers bounds lost to widening across rounds.
    int descending_rounds = 2;

    /// Throws std::invalid_argument on out-of-range settings.
    void check() const;
};

struct StoreValue {
    NodeId store;
    Interval value;

    friend bool operator==(const StoreValue&, const StoreValue&) = default;
};

/// Global -> the (store site, written value) pairs of other handlers.
using InterferenceMap = std::map<std::string, std::vector<StoreValue>>;

struct NodeStates {
    /// State on entry to each node, before any shared read.
    std::vector<AbstractState> pre;
    /// `pre` with the admitted interferences joined in for every global the
    /// node reads; this is what the node's instruction executes on.
    std::vector<AbstractState> input;

    friend bool operator==(const NodeStates&, const NodeStates&) = default;
};

/// State seen by node `n` when it executes: `pre` joined, for every global
/// read at `n`, with each interfering store value not ruled out by
/// `feasibility` (all of them when `pruning` is off).
AbstractState read_state(const Cfg& g, std::uint32_t n, const AbstractState& pre, const InterferenceMap& interference,
                         const FeasibilityResult& feasibility, bool pruning);

/// Worklist fixpoint over one handler (FIFO, seeded in reverse post-order),
/// widening at loop heads after `widening_delay` visits, followed by one
/// narrowing pass.
NodeStates analyze_local(const Cfg& g, const AbstractState& entry, const InterferenceMap& interference,
                         const FeasibilityResult& feasibility, const AnalysisConfig& config);

/// One (store, value) pair per reachable store of a global in `g`.
InterferenceMap collect_interferences(const Cfg& g, const NodeStates& states);

void merge_into(InterferenceMap& into, const InterferenceMap& from);

enum class AssertionVerdict { Proved, Warning };

std::string_view to_string(AssertionVerdict v);

struct AssertionResult {
    std::string assertion_id;
    std::string handler;
    NodeId node;
    AssertionVerdict verdict = AssertionVerdict::Warning;
};

struct AnalysisReport {
    std::vector<AssertionResult> verdicts; // program order
    int iterations = 0;
    bool converged = false;
    bool pruning_enabled = true;
    std::map<std::string, std::size_t> interference_sizes;
    PairStats pairs;
};

struct AnalysisResult {
    std::vector<Cfg> cfgs;
    FactBase facts;
    FeasibilityResult feasibility;
    std::vector<NodeStates> states; // per handler
    AnalysisReport report;
};

/// Full analysis, keeping the intermediate artifacts.
AnalysisResult analyze(const Program& p, const AnalysisConfig& config);

AnalysisReport analyze_program(const Program& p, const AnalysisConfig& config);

/// Initial values of all globals; locals are unconstrained.
AbstractState initial_state(const Program& p);

} // namespace irqv
