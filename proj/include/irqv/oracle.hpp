// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Exhaustive concrete execution of small programs, used as ground truth.
//
// Interrupt semantics: handlers run on an activation stack whose priorities
// strictly increase towards the top. At every step either the top frame
// executes one CFG node, or a handler with remaining budget whose priority
// exceeds every active frame's priority is pushed. Arrival is never
// mandatory, so every schedule that stops early is covered as well.
//
// Thread semantics: any active frame may step, and any inactive handler with
// budget may start, regardless of priority.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "irqv/cfg.hpp"
#include "irqv/feasibility.hpp"

namespace irqv {

struct OracleConfig {
    int max_invocations = 1; // per handler
    int unroll = 2;          // back edges taken per loop entry before the path is cut
    bool track_flows = true;
    /// Record the statement sequence of every complete execution. Disables
    /// state memoization, so only use on tiny programs.
    bool record_traces = false;
    bool memoize = true;
    std::size_t state_ceiling = 5'000'000;

    void check() const;
};

struct ValueRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

struct OracleResult {
    std::set<std::string> violated;
    /// (load, store, var): the load observed the value written by the store.
    std::set<ReadFromPair> flows;
    /// Hull of the concrete values of each variable of an assertion's
    /// condition, observed when the assertion executed.
    std::map<NodeId, std::map<std::string, ValueRange>> assertion_values;
    /// Terminal states reached; with memoization, distinct terminal states.
    std::size_t executions = 0;
    std::size_t states = 0;
    std::size_t max_depth = 0; // deepest activation nesting seen
    bool truncated = false;
    std::set<std::vector<NodeId>> traces;
};

class OracleLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Values a `havoc` may produce during enumeration.
inline constexpr std::int64_t kHavocSamples[] = {-1, 0, 1, 2};

OracleResult enumerate(const Program& p, const OracleConfig& config);
OracleResult thread_enumerate(const Program& p, const OracleConfig& config);

} // namespace irqv
