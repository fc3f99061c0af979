// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/ir.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace irqv {

Expr Expr::number(std::int64_t value) {
    Expr e;
    e.kind = Kind::Constant;
    e.constant = value;
    return e;
}

Expr Expr::variable(VarRef ref) {
    Expr e;
    e.kind = Kind::Variable;
    e.var = std::move(ref);
    return e;
}

Expr Expr::add(Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Add;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
}

Expr Expr::sub(Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Sub;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
}

Expr Expr::scale(std::int64_t factor, Expr operand) {
    Expr e;
    e.kind = Kind::Scale;
    e.constant = factor;
    e.operands.push_back(std::move(operand));
    return e;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) {
        return false;
    }
    switch (a.kind) {
    case Expr::Kind::Constant: return a.constant == b.constant;
    case Expr::Kind::Variable: return a.var == b.var;
    case Expr::Kind::Scale: return a.constant == b.constant && a.operands == b.operands;
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return a.operands == b.operands;
    }
    return false;
}

RelOp negate(RelOp op) {
    switch (op) {
    case RelOp::Eq: return RelOp::Ne;
    case RelOp::Ne: return RelOp::Eq;
    case RelOp::Lt: return RelOp::Ge;
    case RelOp::Le: return RelOp::Gt;
    case RelOp::Gt: return RelOp::Le;
    case RelOp::Ge: return RelOp::Lt;
    }
    return op;
}

Cond negate(const Cond& c) { return Cond{c.lhs, negate(c.op), c.rhs}; }

std::string_view to_string(RelOp op) {
    switch (op) {
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    }
    return "?";
}

Instruction Instruction::skip() { return Instruction{}; }

Instruction Instruction::assign(VarRef target, Expr value) {
    Instruction i;
    i.kind = Kind::Assign;
    i.target = std::move(target);
    i.expr = std::move(value);
    return i;
}

Instruction Instruction::assume(Cond c) {
    Instruction i;
    i.kind = Kind::Assume;
    i.cond = std::move(c);
    return i;
}

Instruction Instruction::assertion(Cond c, std::string id) {
    Instruction i;
    i.kind = Kind::Assert;
    i.cond = std::move(c);
    i.assertion_id = std::move(id);
    return i;
}

Instruction Instruction::havoc(VarRef target) {
    Instruction i;
    i.kind = Kind::Havoc;
    i.target = std::move(target);
    return i;
}

bool Program::is_global(std::string_view name) const { return global_index(name).has_value(); }

std::optional<std::size_t> Program::global_index(std::string_view name) const {
    for (std::size_t i = 0; i < globals.size(); ++i) {
        if (globals[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> Program::handler_index(std::string_view name) const {
    for (std::size_t i = 0; i < handlers.size(); ++i) {
        if (handlers[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

ParseError::ParseError(const std::string& message, SourceLoc loc)
    : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message),
      loc_(loc), detail_(message) {}

// ---------------------------------------------------------------------------
// Printing

namespace {

bool is_additive(const Expr& e) { return e.kind == Expr::Kind::Add || e.kind == Expr::Kind::Sub; }

void print_expr(std::ostream& os, const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Constant: os << e.constant; break;
    case Expr::Kind::Variable: os << e.var.name; break;
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
        print_expr(os, e.operands[0]);
        os << (e.kind == Expr::Kind::Add ? " + " : " - ");
        const Expr& rhs = e.operands[1];
        if (is_additive(rhs)) {
            os << '(';
            print_expr(os, rhs);
            os << ')';
        } else {
            print_expr(os, rhs);
        }
        break;
    }
    case Expr::Kind::Scale: {
        os << e.constant << " * ";
        const Expr& operand = e.operands[0];
        if (operand.kind == Expr::Kind::Constant || operand.kind == Expr::Kind::Variable) {
            print_expr(os, operand);
        } else {
            os << '(';
            print_expr(os, operand);
            os << ')';
        }
        break;
    }
    }
}

void print_cond_or_star(std::ostream& os, const std::optional<Cond>& c) {
    if (c) {
        os << to_string(*c);
    } else {
        os << '*';
    }
}

void print_block(std::ostream& os, const std::vector<Stmt>& body, int depth);

void print_stmt(std::ostream& os, const Stmt& s, int depth) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    os << indent;
    switch (s.kind) {
    case Stmt::Kind::Assign: os << s.target.name << " = " << to_string(s.expr) << ";\n"; break;
    case Stmt::Kind::Local: os << "local " << s.target.name << " = " << to_string(s.expr) << ";\n"; break;
    case Stmt::Kind::Assume: os << "assume(" << to_string(*s.cond) << ");\n"; break;
    case Stmt::Kind::Assert: os << "assert(" << to_string(*s.cond) << ");\n"; break;
    case Stmt::Kind::Havoc: os << "havoc " << s.target.name << ";\n"; break;
    case Stmt::Kind::Skip: os << "skip;\n"; break;
    case Stmt::Kind::If:
        os << "if (";
        print_cond_or_star(os, s.cond);
        os << ") {\n";
        print_block(os, s.then_body, depth + 1);
        if (s.else_body.empty()) {
            os << indent << "}\n";
        } else {
            os << indent << "} else {\n";
            print_block(os, s.else_body, depth + 1);
            os << indent << "}\n";
        }
        break;
    case Stmt::Kind::While:
        os << "while (";
        print_cond_or_star(os, s.cond);
        os << ") {\n";
        print_block(os, s.then_body, depth + 1);
        os << indent << "}\n";
        break;
    }
}

void print_block(std::ostream& os, const std::vector<Stmt>& body, int depth) {
    for (const Stmt& s : body) {
        print_stmt(os, s, depth);
    }
}

} // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print_expr(os, e);
    return os.str();
}

std::string to_string(const Cond& c) { return to_string(c.lhs) + " " + std::string(to_string(c.op)) + " " + to_string(c.rhs); }

std::string to_string(const Instruction& i) {
    switch (i.kind) {
    case Instruction::Kind::Skip: return "skip";
    case Instruction::Kind::Assign: return i.target.name + " = " + to_string(i.expr);
    case Instruction::Kind::Assume: return "assume(" + to_string(i.cond) + ")";
    case Instruction::Kind::Assert: return "assert(" + to_string(i.cond) + ")";
    case Instruction::Kind::Havoc: return "havoc " + i.target.name;
    }
    return "?";
}

std::string print_program(const Program& p) {
    std::ostringstream os;
    for (const Global& g : p.globals) {
        os << "global " << g.name << " = " << g.init << ";\n";
    }
    for (const Handler& h : p.handlers) {
        os << "handler " << h.name << " priority " << h.priority << " {\n";
        print_block(os, h.body, 1);
        os << "}\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Read/write sets

void collect_reads(const Expr& e, std::vector<VarRef>& out) {
    if (e.kind == Expr::Kind::Variable) {
        if (std::find(out.begin(), out.end(), e.var) == out.end()) {
            out.push_back(e.var);
        }
        return;
    }
    for (const Expr& operand : e.operands) {
        collect_reads(operand, out);
    }
}

void collect_reads(const Cond& c, std::vector<VarRef>& out) {
    collect_reads(c.lhs, out);
    collect_reads(c.rhs, out);
}

std::vector<VarRef> reads_of(const Instruction& i) {
    std::vector<VarRef> out;
    switch (i.kind) {
    case Instruction::Kind::Assign: collect_reads(i.expr, out); break;
    case Instruction::Kind::Assume:
    case Instruction::Kind::Assert: collect_reads(i.cond, out); break;
    case Instruction::Kind::Skip:
    case Instruction::Kind::Havoc: break;
    }
    return out;
}

std::optional<VarRef> write_of(const Instruction& i) {
    if (i.kind == Instruction::Kind::Assign || i.kind == Instruction::Kind::Havoc) {
        return i.target;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class HandlerChecker {
public:
    HandlerChecker(const Program& p, const Handler& h, std::set<std::string>& assertion_ids,
                   std::vector<Diagnostic>& out)
        : program_(p), handler_(h), assertion_ids_(assertion_ids), out_(out) {
        collect_declarations(h.body);
    }

    void run() {
        scopes_.emplace_back();
        check_block(handler_.body);
        scopes_.pop_back();
    }

private:
    void collect_declarations(const std::vector<Stmt>& body) {
        for (const Stmt& s : body) {
            if (s.kind == Stmt::Kind::Local) {
                declared_anywhere_.insert(s.target.name);
            }
            collect_declarations(s.then_body);
            collect_declarations(s.else_body);
        }
    }

    void report(std::string code, std::string message, SourceLoc loc) {
        out_.push_back(Diagnostic{std::move(code), std::move(message), handler_.name, loc});
    }

    bool in_scope(const std::string& name) const {
        return std::any_of(scopes_.begin(), scopes_.end(), [&](const auto& scope) { return scope.count(name) > 0; });
    }

    void check_var(const VarRef& v, SourceLoc loc) {
        const bool global = program_.is_global(v.name);
        if (v.is_global()) {
            if (!global) {
                report("undeclared-variable", "use of undeclared variable '" + v.name + "'", loc);
            }
            return;
        }
        if (global) {
            report("varref-kind-mismatch", "'" + v.name + "' is a global but referenced as a local", loc);
            return;
        }
        if (in_scope(v.name)) {
            return;
        }
        if (declared_anywhere_.count(v.name) > 0) {
            report("use-before-init", "local '" + v.name + "' may be used before it is initialized", loc);
        } else {
            report("undeclared-variable", "use of undeclared variable '" + v.name + "'", loc);
        }
    }

    void check_reads(const Expr& e, SourceLoc loc) {
        std::vector<VarRef> reads;
        collect_reads(e, reads);
        for (const VarRef& v : reads) {
            check_var(v, loc);
        }
    }

    void check_reads(const Cond& c, SourceLoc loc) {
        check_reads(c.lhs, loc);
        check_reads(c.rhs, loc);
    }

    void check_block(const std::vector<Stmt>& body) {
        for (const Stmt& s : body) {
            check_stmt(s);
        }
    }

    void check_nested(const std::vector<Stmt>& body) {
        scopes_.emplace_back();
        check_block(body);
        scopes_.pop_back();
    }

    void check_stmt(const Stmt& s) {
        switch (s.kind) {
        case Stmt::Kind::Assign:
            check_reads(s.expr, s.loc);
            check_var(s.target, s.loc);
            break;
        case Stmt::Kind::Local:
            check_reads(s.expr, s.loc);
            if (program_.is_global(s.target.name)) {
                report("local-shadows-global", "local '" + s.target.name + "' shadows a global", s.loc);
            } else if (seen_locals_.count(s.target.name) > 0) {
                report("duplicate-local", "local '" + s.target.name + "' is declared more than once", s.loc);
            }
            seen_locals_.insert(s.target.name);
            scopes_.back().insert(s.target.name);
            break;
        case Stmt::Kind::Havoc: check_var(s.target, s.loc); break;
        case Stmt::Kind::Assume: check_reads(*s.cond, s.loc); break;
        case Stmt::Kind::Assert:
            check_reads(*s.cond, s.loc);
            if (s.assertion_id.empty()) {
                report("missing-assertion-id", "assertion has no identifier", s.loc);
            } else if (!assertion_ids_.insert(s.assertion_id).second) {
                report("duplicate-assertion-id", "assertion id '" + s.assertion_id + "' is not unique", s.loc);
            }
            break;
        case Stmt::Kind::If:
            if (s.cond) {
                check_reads(*s.cond, s.loc);
            }
            check_nested(s.then_body);
            check_nested(s.else_body);
            break;
        case Stmt::Kind::While:
            if (s.cond) {
                check_reads(*s.cond, s.loc);
            }
            check_nested(s.then_body);
            break;
        case Stmt::Kind::Skip: break;
        }
    }

    const Program& program_;
    const Handler& handler_;
    std::set<std::string>& assertion_ids_;
    std::vector<Diagnostic>& out_;
    std::set<std::string> declared_anywhere_;
    std::set<std::string> seen_locals_;
    std::vector<std::set<std::string>> scopes_;
};

} // namespace

std::vector<Diagnostic> validate(const Program& p) {
    std::vector<Diagnostic> out;
    if (p.handlers.empty()) {
        out.push_back(Diagnostic{"no-handlers", "program declares no handler", "", SourceLoc{}});
    }
    std::set<std::string> names;
    for (const Global& g : p.globals) {
        if (!names.insert(g.name).second) {
            out.push_back(Diagnostic{"duplicate-global", "global '" + g.name + "' is declared more than once", "", g.loc});
        }
    }
    names.clear();
    for (const Handler& h : p.handlers) {
        if (!names.insert(h.name).second) {
            out.push_back(
                Diagnostic{"duplicate-handler", "handler '" + h.name + "' is declared more than once", h.name, h.loc});
        }
        if (h.priority < 0) {
            out.push_back(Diagnostic{"negative-priority", "handler '" + h.name + "' has a negative priority", h.name, h.loc});
        }
    }
    std::set<std::string> assertion_ids;
    for (const Handler& h : p.handlers) {
        HandlerChecker(p, h, assertion_ids, out).run();
    }
    return out;
}

} // namespace irqv
