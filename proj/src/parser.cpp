// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <charconv>
#include <limits>

#include "irqv/ir.hpp"

namespace irqv {

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            SourceLoc loc{line_, column_};
            if (pos_ >= src_.size()) {
                out.push_back(Token{Tok::End, "", loc});
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                    advance();
                }
                out.push_back(Token{Tok::Ident, std::string(src_.substr(start, pos_ - start)), loc});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                const std::size_t start = pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    advance();
                }
                out.push_back(Token{Tok::Int, std::string(src_.substr(start, pos_ - start)), loc});
            } else {
                static constexpr std::string_view two_char[] = {"==", "!=", "<=", ">="};
                std::string text(1, c);
                for (std::string_view op : two_char) {
                    if (src_.substr(pos_, 2) == op) {
                        text = std::string(op);
                    }
                }
                if (text.size() == 1 && std::string_view("=;{}()+-*<>").find(c) == std::string_view::npos) {
                    throw ParseError(std::string("unexpected character '") + c + "'", loc);
                }
                for (std::size_t i = 0; i < text.size(); ++i) {
                    advance();
                }
                out.push_back(Token{Tok::Punct, std::move(text), loc});
            }
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            } else if (src_.substr(pos_, 2) == "//") {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
            } else {
                return;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program run() {
        Program p;
        while (!at_end()) {
            if (peek_keyword("global")) {
                p.globals.push_back(parse_global());
            } else if (peek_keyword("handler")) {
                p.handlers.push_back(parse_handler());
            } else {
                fail("expected 'global' or 'handler'");
            }
        }
        return p;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool peek_punct(std::string_view s) const { return peek().kind == Tok::Punct && peek().text == s; }
    bool peek_keyword(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", found " + found, t.loc);
    }

    Token take() { return toks_[pos_++]; }

    void expect_punct(std::string_view s) {
        if (!peek_punct(s)) {
            fail("expected '" + std::string(s) + "'");
        }
        ++pos_;
    }

    void expect_keyword(std::string_view s) {
        if (!peek_keyword(s)) {
            fail("expected '" + std::string(s) + "'");
        }
        ++pos_;
    }

    static bool is_keyword(std::string_view s) {
        static constexpr std::string_view kws[] = {"global", "handler", "priority", "local", "assert", "assume",
                                                   "if",     "else",    "while",    "havoc", "skip"};
        for (std::string_view k : kws) {
            if (k == s) {
                return true;
            }
        }
        return false;
    }

    std::string expect_ident() {
        if (peek().kind != Tok::Ident || is_keyword(peek().text)) {
            fail("expected identifier");
        }
        return take().text;
    }

    std::int64_t expect_int(bool allow_negative) {
        bool negative = false;
        if (allow_negative && peek_punct("-")) {
            ++pos_;
            negative = true;
        }
        if (peek().kind != Tok::Int) {
            fail("expected integer");
        }
        const Token t = take();
        return to_integer(t, negative);
    }

    static std::int64_t to_integer(const Token& t, bool negative) {
        // Parse the magnitude as unsigned so that the minimum int64 value can be written.
        std::uint64_t magnitude = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), magnitude);
        constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
        if (ec != std::errc{} || magnitude > max + (negative ? 1 : 0)) {
            throw ParseError("integer literal out of range", t.loc);
        }
        if (negative) {
            return magnitude == max + 1 ? std::numeric_limits<std::int64_t>::min()
                                        : -static_cast<std::int64_t>(magnitude);
        }
        return static_cast<std::int64_t>(magnitude);
    }

    Global parse_global() {
        Global g;
        g.loc = peek().loc;
        expect_keyword("global");
        g.name = expect_ident();
        expect_punct("=");
        g.init = expect_int(true);
        expect_punct(";");
        return g;
    }

    Handler parse_handler() {
        Handler h;
        h.loc = peek().loc;
        expect_keyword("handler");
        h.name = expect_ident();
        expect_keyword("priority");
        const Token prio = peek();
        const std::int64_t value = expect_int(false);
        if (value > std::numeric_limits<int>::max()) {
            throw ParseError("priority out of range", prio.loc);
        }
        h.priority = static_cast<int>(value);
        handler_name_ = h.name;
        assert_count_ = 0;
        h.body = parse_block();
        return h;
    }

    std::vector<Stmt> parse_block() {
        expect_punct("{");
        std::vector<Stmt> body;
        while (!peek_punct("}")) {
            if (at_end()) {
                fail("expected '}'");
            }
            body.push_back(parse_stmt());
        }
        expect_punct("}");
        return body;
    }

    Stmt parse_stmt() {
        Stmt s;
        s.loc = peek().loc;
        if (peek_keyword("local")) {
            ++pos_;
            s.kind = Stmt::Kind::Local;
            s.target = VarRef{expect_ident(), VarKind::Local};
            expect_punct("=");
            s.expr = parse_expr();
            expect_punct(";");
        } else if (peek_keyword("assert") || peek_keyword("assume")) {
            const bool is_assert = take().text == "assert";
            s.kind = is_assert ? Stmt::Kind::Assert : Stmt::Kind::Assume;
            expect_punct("(");
            s.cond = parse_cond();
            expect_punct(")");
            expect_punct(";");
            if (is_assert) {
                s.assertion_id = handler_name_ + "#" + std::to_string(++assert_count_);
            }
        } else if (peek_keyword("if")) {
            ++pos_;
            s.kind = Stmt::Kind::If;
            s.cond = parse_cond_or_star();
            s.then_body = parse_block();
            if (peek_keyword("else")) {
                ++pos_;
                s.else_body = parse_block();
            }
        } else if (peek_keyword("while")) {
            ++pos_;
            s.kind = Stmt::Kind::While;
            s.cond = parse_cond_or_star();
            s.then_body = parse_block();
        } else if (peek_keyword("havoc")) {
            ++pos_;
            s.kind = Stmt::Kind::Havoc;
            s.target = VarRef{expect_ident(), VarKind::Local};
            expect_punct(";");
        } else if (peek_keyword("skip")) {
            ++pos_;
            s.kind = Stmt::Kind::Skip;
            expect_punct(";");
        } else {
            s.kind = Stmt::Kind::Assign;
            s.target = VarRef{expect_ident(), VarKind::Local};
            expect_punct("=");
            s.expr = parse_expr();
            expect_punct(";");
        }
        return s;
    }

    std::optional<Cond> parse_cond_or_star() {
        expect_punct("(");
        std::optional<Cond> c;
        if (peek_punct("*")) {
            ++pos_;
        } else {
            c = parse_cond();
        }
        expect_punct(")");
        return c;
    }

    Cond parse_cond() {
        Cond c;
        c.lhs = parse_expr();
        static constexpr std::pair<std::string_view, RelOp> ops[] = {
            {"==", RelOp::Eq}, {"!=", RelOp::Ne}, {"<", RelOp::Lt},
            {"<=", RelOp::Le}, {">", RelOp::Gt},  {">=", RelOp::Ge}};
        for (const auto& [text, op] : ops) {
            if (peek_punct(text)) {
                ++pos_;
                c.op = op;
                c.rhs = parse_expr();
                return c;
            }
        }
        fail("expected comparison operator");
    }

    // expr := term (('+' | '-') term)*
    Expr parse_expr() {
        Expr e = parse_term();
        while (peek_punct("+") || peek_punct("-")) {
            const bool plus = take().text == "+";
            Expr rhs = parse_term();
            e = plus ? Expr::add(std::move(e), std::move(rhs)) : Expr::sub(std::move(e), std::move(rhs));
        }
        return e;
    }

    // term := factor ('*' factor)*, where every product has a constant side.
    Expr parse_term() {
        Expr e = parse_factor();
        while (peek_punct("*")) {
            const SourceLoc loc = take().loc;
            Expr rhs = parse_factor();
            if (e.kind == Expr::Kind::Constant) {
                e = Expr::scale(e.constant, std::move(rhs));
            } else if (rhs.kind == Expr::Kind::Constant) {
                e = Expr::scale(rhs.constant, std::move(e));
            } else {
                throw ParseError("non-affine expression: product of two non-constant terms", loc);
            }
        }
        return e;
    }

    Expr parse_factor() {
        if (peek_punct("-")) {
            ++pos_;
            if (peek().kind == Tok::Int) {
                return Expr::number(to_integer(take(), true));
            }
            return Expr::scale(-1, parse_factor());
        }
        if (peek_punct("(")) {
            ++pos_;
            Expr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (peek().kind == Tok::Int) {
            return Expr::number(to_integer(take(), false));
        }
        return Expr::variable(VarRef{expect_ident(), VarKind::Local});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string handler_name_;
    int assert_count_ = 0;
};

void resolve(const Program& p, Expr& e) {
    if (e.kind == Expr::Kind::Variable) {
        e.var.kind = p.is_global(e.var.name) ? VarKind::Global : VarKind::Local;
    }
    for (Expr& operand : e.operands) {
        resolve(p, operand);
    }
}

void resolve(const Program& p, std::vector<Stmt>& body) {
    for (Stmt& s : body) {
        if (s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::Havoc) {
            s.target.kind = p.is_global(s.target.name) ? VarKind::Global : VarKind::Local;
        }
        resolve(p, s.expr);
        if (s.cond) {
            resolve(p, s.cond->lhs);
            resolve(p, s.cond->rhs);
        }
        resolve(p, s.then_body);
        resolve(p, s.else_body);
    }
}

} // namespace

Program parse_program_unchecked(std::string_view text) {
    Program p = Parser(Lexer(text).run()).run();
    for (Handler& h : p.handlers) {
        resolve(p, h.body);
    }
    return p;
}

Program parse_program(std::string_view text) {
    Program p = parse_program_unchecked(text);
    const std::vector<Diagnostic> diags = validate(p);
    if (!diags.empty()) {
        throw ParseError(diags.front().code + ": " + diags.front().message, diags.front().loc);
    }
    return p;
}

} // namespace irqv
