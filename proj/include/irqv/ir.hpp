// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

// Interrupt IR: a program is a set of handlers with integer priorities that
// communicate through shared globals. The main program is modeled as just
// another (usually lowest-priority) handler.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irqv {

// Source positions are carried for diagnostics only; they never take part in
// structural equality.
struct SourceLoc {
    int line = 0;
    int column = 0;

    friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

enum class VarKind { Global, Local };

struct VarRef {
    std::string name;
    VarKind kind = VarKind::Global;

    bool is_global() const { return kind == VarKind::Global; }
    friend bool operator==(const VarRef&, const VarRef&) = default;
};

// Affine integer expression.
struct Expr {
    enum class Kind { Constant, Variable, Add, Sub, Scale };

    Kind kind = Kind::Constant;
    std::int64_t constant = 0; // literal value, or the factor of a Scale
    VarRef var;                // Variable only
    std::vector<Expr> operands;

    static Expr number(std::int64_t value);
    static Expr variable(VarRef ref);
    static Expr add(Expr lhs, Expr rhs);
    static Expr sub(Expr lhs, Expr rhs);
    static Expr scale(std::int64_t factor, Expr operand);

    friend bool operator==(const Expr& a, const Expr& b);
};

enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Cond {
    Expr lhs;
    RelOp op = RelOp::Eq;
    Expr rhs;

    friend bool operator==(const Cond&, const Cond&) = default;
};

/// Logical negation over the integers (exact: `!(a < b)` is `a >= b`).
Cond negate(const Cond& c);
RelOp negate(RelOp op);
std::string_view to_string(RelOp op);

/// Flat instruction carried by one CFG node. One instruction is one atomic
/// step of execution.
struct Instruction {
    enum class Kind { Skip, Assign, Assume, Assert, Havoc };

    Kind kind = Kind::Skip;
    VarRef target;            // Assign, Havoc
    Expr expr;                // Assign
    Cond cond;                // Assume, Assert
    std::string assertion_id; // Assert

    static Instruction skip();
    static Instruction assign(VarRef target, Expr value);
    static Instruction assume(Cond c);
    static Instruction assertion(Cond c, std::string id);
    static Instruction havoc(VarRef target);

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Structured statement as written in the source.
struct Stmt {
    enum class Kind { Assign, Local, Assume, Assert, Havoc, If, While, Skip };

    Kind kind = Kind::Skip;
    VarRef target;
    Expr expr;
    std::optional<Cond> cond; // If/While: nullopt is the nondeterministic `*`
    std::string assertion_id;
    std::vector<Stmt> then_body; // If then-branch, While body
    std::vector<Stmt> else_body;
    SourceLoc loc;

    friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct Global {
    std::string name;
    std::int64_t init = 0;
    SourceLoc loc;

    friend bool operator==(const Global&, const Global&) = default;
};

struct Handler {
    std::string name;
    int priority = 0; // higher value preempts lower value
    std::vector<Stmt> body;
    SourceLoc loc;

    friend bool operator==(const Handler&, const Handler&) = default;
};

struct Program {
    std::vector<Global> globals;
    std::vector<Handler> handlers;

    bool is_global(std::string_view name) const;
    std::optional<std::size_t> global_index(std::string_view name) const;
    std::optional<std::size_t> handler_index(std::string_view name) const;

    friend bool operator==(const Program&, const Program&) = default;
};

struct Diagnostic {
    std::string code; // e.g. "duplicate-handler", "use-before-init"
    std::string message;
    std::string handler; // empty for program-level diagnostics
    SourceLoc loc;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, SourceLoc loc);

    int line() const { return loc_.line; }
    int column() const { return loc_.column; }
    const std::string& detail() const { return detail_; }

private:
    SourceLoc loc_;
    std::string detail_;
};

/// Parses and validates. Throws ParseError on syntax errors and on the first
/// validation diagnostic.
Program parse_program(std::string_view text);

/// Syntax only: variable kinds are resolved against the declared globals but
/// no well-formedness check is run.
Program parse_program_unchecked(std::string_view text);

std::vector<Diagnostic> validate(const Program& p);

std::string to_string(const Expr& e);
std::string to_string(const Cond& c);
std::string to_string(const Instruction& i);

/// Pretty-printer; `parse_program(print_program(p)) == p` for valid programs.
std::string print_program(const Program& p);

/// Globals read by an expression or condition, in first-occurrence order.
void collect_reads(const Expr& e, std::vector<VarRef>& out);
void collect_reads(const Cond& c, std::vector<VarRef>& out);

/// Variables read by an instruction (globals and locals).
std::vector<VarRef> reads_of(const Instruction& i);

/// Variable written by an instruction, if any.
std::optional<VarRef> write_of(const Instruction& i);

} // namespace irqv
