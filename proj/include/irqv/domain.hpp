// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Interval abstract domain over mathematical integers.
//
// Bounds are 64-bit with infinities. Arithmetic is computed exactly in 128
// bits and then rounded outward: a lower bound below the int64 range becomes
// -oo, one above it is clamped to the int64 maximum (still a valid lower
// bound), and symmetrically for upper bounds. Results are therefore always
// sound for unbounded integers.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "irqv/ir.hpp"

namespace irqv {

class Interval {
public:
    /// Top.
    Interval() = default;

    static Interval top() { return Interval(); }
    static Interval bottom();
    static Interval constant(std::int64_t v) { return Interval(v, v); }
    /// nullopt lower bound is -oo, nullopt upper bound is +oo. Empty ranges give bottom.
    static Interval range(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi);

    bool is_bottom() const { return bottom_; }
    bool is_top() const { return !bottom_ && !lo_ && !hi_; }
    std::optional<std::int64_t> lower() const { return lo_; }
    std::optional<std::int64_t> upper() const { return hi_; }
    std::optional<std::int64_t> singleton() const;
    bool contains(std::int64_t v) const;

    bool leq(const Interval& other) const;
    Interval join(const Interval& other) const;
    Interval meet(const Interval& other) const;
    /// Unstable bounds jump to infinity.
    Interval widen(const Interval& newer) const;
    /// Only infinite bounds are refined.
    Interval narrow(const Interval& newer) const;

    Interval operator+(const Interval& other) const;
    Interval operator-(const Interval& other) const;
    Interval operator-() const { return scale(-1); }
    Interval scale(std::int64_t factor) const;

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    Interval(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) : lo_(lo), hi_(hi) {}

    bool bottom_ = false;
    std::optional<std::int64_t> lo_;
    std::optional<std::int64_t> hi_;
};

std::string to_string(const Interval& i);

/// Variable -> interval map. A missing variable is Top; a Bottom binding
/// collapses the whole state to Bottom (unreachable).
class AbstractState {
public:
    /// Top: every variable unconstrained.
    AbstractState() = default;

    static AbstractState top() { return AbstractState(); }
    static AbstractState bottom();

    bool is_bottom() const { return bottom_; }

    Interval get(const std::string& var) const;
    void set(const std::string& var, const Interval& value);
    void forget(const std::string& var);

    const std::map<std::string, Interval>& bindings() const { return vars_; }

    friend bool operator==(const AbstractState&, const AbstractState&) = default;

private:
    bool bottom_ = false;
    std::map<std::string, Interval> vars_; // never stores Top or Bottom
};

AbstractState join(const AbstractState& a, const AbstractState& b);
AbstractState meet(const AbstractState& a, const AbstractState& b);
bool leq(const AbstractState& a, const AbstractState& b);
AbstractState widen(const AbstractState& older, const AbstractState& newer);
AbstractState narrow(const AbstractState& older, const AbstractState& newer);

std::string to_string(const AbstractState& s);

/// Interval evaluation of an affine expression.
Interval eval(const Expr& e, const AbstractState& s);

/// Refines `s` by the condition. Sound: every concrete state in `s`
/// satisfying `c` is kept.
AbstractState assume(const Cond& c, const AbstractState& s);

AbstractState transfer(const Instruction& instr, const AbstractState& s);

enum class Verdict { Proved, Unknown };

/// Proved iff `c` holds in every concretization of `s` (vacuously on Bottom).
Verdict check_assert(const Cond& c, const AbstractState& s);

} // namespace irqv
