// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/domain.hpp"

#include <limits>
#include <sstream>

namespace irqv {

namespace {

__extension__ using Wide = __int128;

constexpr Wide kMin = std::numeric_limits<std::int64_t>::min();
constexpr Wide kMax = std::numeric_limits<std::int64_t>::max();

std::optional<std::int64_t> round_lower(Wide v) {
    if (v < kMin) {
        return std::nullopt;
    }
    return static_cast<std::int64_t>(v > kMax ? kMax : v);
}

std::optional<std::int64_t> round_upper(Wide v) {
    if (v > kMax) {
        return std::nullopt;
    }
    return static_cast<std::int64_t>(v < kMin ? kMin : v);
}

Wide floor_div(Wide a, Wide b) {
    Wide q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

Wide ceil_div(Wide a, Wide b) {
    Wide q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0))) {
        ++q;
    }
    return q;
}

} // namespace

// ---------------------------------------------------------------------------
// Interval

Interval Interval::bottom() {
    Interval i;
    i.bottom_ = true;
    i.lo_ = 1;
    i.hi_ = 0;
    return i;
}

Interval Interval::range(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) {
    if (lo && hi && *lo > *hi) {
        return bottom();
    }
    return Interval(lo, hi);
}

std::optional<std::int64_t> Interval::singleton() const {
    if (!bottom_ && lo_ && hi_ && *lo_ == *hi_) {
        return lo_;
    }
    return std::nullopt;
}

bool Interval::contains(std::int64_t v) const {
    return !bottom_ && (!lo_ || *lo_ <= v) && (!hi_ || v <= *hi_);
}

bool Interval::leq(const Interval& other) const {
    if (bottom_) {
        return true;
    }
    if (other.bottom_) {
        return false;
    }
    const bool lo_ok = !other.lo_ || (lo_ && *lo_ >= *other.lo_);
    const bool hi_ok = !other.hi_ || (hi_ && *hi_ <= *other.hi_);
    return lo_ok && hi_ok;
}

Interval Interval::join(const Interval& other) const {
    if (bottom_) {
        return other;
    }
    if (other.bottom_) {
        return *this;
    }
    std::optional<std::int64_t> lo;
    std::optional<std::int64_t> hi;
    if (lo_ && other.lo_) {
        lo = std::min(*lo_, *other.lo_);
    }
    if (hi_ && other.hi_) {
        hi = std::max(*hi_, *other.hi_);
    }
    return Interval(lo, hi);
}

Interval Interval::meet(const Interval& other) const {
    if (bottom_ || other.bottom_) {
        return bottom();
    }
    std::optional<std::int64_t> lo = lo_;
    std::optional<std::int64_t> hi = hi_;
    if (other.lo_) {
        lo = lo ? std::max(*lo, *other.lo_) : *other.lo_;
    }
    if (other.hi_) {
        hi = hi ? std::min(*hi, *other.hi_) : *other.hi_;
    }
    return range(lo, hi);
}

Interval Interval::widen(const Interval& newer) const {
    if (bottom_) {
        return newer;
    }
    if (newer.bottom_) {
        return *this;
    }
    std::optional<std::int64_t> lo;
    std::optional<std::int64_t> hi;
    if (lo_ && newer.lo_ && *newer.lo_ >= *lo_) {
        lo = lo_;
    }
    if (hi_ && newer.hi_ && *newer.hi_ <= *hi_) {
        hi = hi_;
    }
    return Interval(lo, hi);
}

Interval Interval::narrow(const Interval& newer) const {
    if (bottom_ || newer.bottom_) {
        return bottom();
    }
    return range(lo_ ? lo_ : newer.lo_, hi_ ? hi_ : newer.hi_);
}

Interval Interval::operator+(const Interval& other) const {
    if (bottom_ || other.bottom_) {
        return bottom();
    }
    std::optional<std::int64_t> lo;
    std::optional<std::int64_t> hi;
    if (lo_ && other.lo_) {
        lo = round_lower(Wide{*lo_} + Wide{*other.lo_});
    }
    if (hi_ && other.hi_) {
        hi = round_upper(Wide{*hi_} + Wide{*other.hi_});
    }
    return range(lo, hi);
}

Interval Interval::operator-(const Interval& other) const { return *this + (-other); }

Interval Interval::scale(std::int64_t factor) const {
    if (bottom_) {
        return bottom();
    }
    if (factor == 0) {
        return constant(0);
    }
    std::optional<std::int64_t> lo;
    std::optional<std::int64_t> hi;
    const Wide f = factor;
    if (factor > 0) {
        if (lo_) {
            lo = round_lower(f * *lo_);
        }
        if (hi_) {
            hi = round_upper(f * *hi_);
        }
    } else {
        if (hi_) {
            lo = round_lower(f * *hi_);
        }
        if (lo_) {
            hi = round_upper(f * *lo_);
        }
    }
    return range(lo, hi);
}

std::string to_string(const Interval& i) {
    if (i.is_bottom()) {
        return "_|_";
    }
    std::ostringstream os;
    os << '[';
    if (i.lower()) {
        os << *i.lower();
    } else {
        os << "-oo";
    }
    os << ", ";
    if (i.upper()) {
        os << *i.upper();
    } else {
        os << "+oo";
    }
    os << ']';
    return os.str();
}

// ---------------------------------------------------------------------------
// AbstractState

AbstractState AbstractState::bottom() {
    AbstractState s;
    s.bottom_ = true;
    return s;
}

Interval AbstractState::get(const std::string& var) const {
    if (bottom_) {
        return Interval::bottom();
    }
    auto it = vars_.find(var);
    return it == vars_.end() ? Interval::top() : it->second;
}

void AbstractState::set(const std::string& var, const Interval& value) {
    if (bottom_) {
        return;
    }
    if (value.is_bottom()) {
        *this = bottom();
    } else if (value.is_top()) {
        vars_.erase(var);
    } else {
        vars_[var] = value;
    }
}

void AbstractState::forget(const std::string& var) {
    if (!bottom_) {
        vars_.erase(var);
    }
}

AbstractState join(const AbstractState& a, const AbstractState& b) {
    if (a.is_bottom()) {
        return b;
    }
    if (b.is_bottom()) {
        return a;
    }
    AbstractState out;
    for (const auto& [var, value] : a.bindings()) {
        auto it = b.bindings().find(var);
        if (it != b.bindings().end()) {
            out.set(var, value.join(it->second));
        }
    }
    return out;
}

AbstractState meet(const AbstractState& a, const AbstractState& b) {
    if (a.is_bottom() || b.is_bottom()) {
        return AbstractState::bottom();
    }
    AbstractState out = a;
    for (const auto& [var, value] : b.bindings()) {
        out.set(var, out.get(var).meet(value));
    }
    return out;
}

bool leq(const AbstractState& a, const AbstractState& b) {
    if (a.is_bottom()) {
        return true;
    }
    if (b.is_bottom()) {
        return false;
    }
    for (const auto& [var, value] : b.bindings()) {
        if (!a.get(var).leq(value)) {
            return false;
        }
    }
    return true;
}

AbstractState widen(const AbstractState& older, const AbstractState& newer) {
    if (older.is_bottom()) {
        return newer;
    }
    if (newer.is_bottom()) {
        return older;
    }
    AbstractState out;
    for (const auto& [var, value] : older.bindings()) {
        auto it = newer.bindings().find(var);
        if (it != newer.bindings().end()) {
            out.set(var, value.widen(it->second));
        }
    }
    return out;
}

AbstractState narrow(const AbstractState& older, const AbstractState& newer) {
    if (older.is_bottom() || newer.is_bottom()) {
        return AbstractState::bottom();
    }
    AbstractState out = older;
    for (const auto& [var, value] : newer.bindings()) {
        out.set(var, older.get(var).narrow(value));
    }
    return out;
}

std::string to_string(const AbstractState& s) {
    if (s.is_bottom()) {
        return "_|_";
    }
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& [var, value] : s.bindings()) {
        os << (first ? "" : ", ") << var << ": " << to_string(value);
        first = false;
    }
    os << '}';
    return os.str();
}

// ---------------------------------------------------------------------------
// Expressions and conditions

namespace {

// sum(coef * var) + constant, with every coefficient within int64.
struct LinearForm {
    std::map<std::string, std::int64_t> coef;
    std::int64_t constant = 0;
};

bool fits(Wide v) { return v >= kMin && v <= kMax; }

std::optional<LinearForm> linearize(const Expr& e, Wide factor) {
    LinearForm out;
    switch (e.kind) {
    case Expr::Kind::Constant: {
        const Wide v = factor * e.constant;
        if (!fits(v)) {
            return std::nullopt;
        }
        out.constant = static_cast<std::int64_t>(v);
        return out;
    }
    case Expr::Kind::Variable:
        if (!fits(factor)) {
            return std::nullopt;
        }
        if (factor != 0) {
            out.coef[e.var.name] = static_cast<std::int64_t>(factor);
        }
        return out;
    case Expr::Kind::Scale: return linearize(e.operands[0], factor * e.constant);
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
        auto lhs = linearize(e.operands[0], factor);
        auto rhs = linearize(e.operands[1], e.kind == Expr::Kind::Add ? factor : -factor);
        if (!lhs || !rhs) {
            return std::nullopt;
        }
        const Wide c = Wide{lhs->constant} + rhs->constant;
        if (!fits(c)) {
            return std::nullopt;
        }
        lhs->constant = static_cast<std::int64_t>(c);
        for (const auto& [var, k] : rhs->coef) {
            const Wide sum = Wide{lhs->coef[var]} + k;
            if (!fits(sum)) {
                return std::nullopt;
            }
            if (sum == 0) {
                lhs->coef.erase(var);
            } else {
                lhs->coef[var] = static_cast<std::int64_t>(sum);
            }
        }
        return lhs;
    }
    }
    return std::nullopt;
}

// lhs - rhs as a linear form.
std::optional<LinearForm> difference(const Cond& c) { return linearize(Expr::sub(c.lhs, c.rhs), 1); }

Interval eval_tree(const Expr& e, const AbstractState& s) {
    switch (e.kind) {
    case Expr::Kind::Constant: return Interval::constant(e.constant);
    case Expr::Kind::Variable: return s.get(e.var.name);
    case Expr::Kind::Add: return eval_tree(e.operands[0], s) + eval_tree(e.operands[1], s);
    case Expr::Kind::Sub: return eval_tree(e.operands[0], s) - eval_tree(e.operands[1], s);
    case Expr::Kind::Scale: return eval_tree(e.operands[0], s).scale(e.constant);
    }
    return Interval::top();
}

Interval eval_form(const LinearForm& f, const AbstractState& s, const std::string* skip = nullptr) {
    Interval sum = Interval::constant(f.constant);
    for (const auto& [var, k] : f.coef) {
        if (skip == nullptr || var != *skip) {
            sum = sum + s.get(var).scale(k);
        }
    }
    return sum;
}

LinearForm negated(const LinearForm& f) {
    // Callers guarantee the form came from linearize, so negation can only
    // overflow for the int64 minimum; such forms are rejected before use.
    LinearForm out;
    out.constant = -f.constant;
    for (const auto& [var, k] : f.coef) {
        out.coef[var] = -k;
    }
    return out;
}

bool negatable(const LinearForm& f) {
    if (f.constant == std::numeric_limits<std::int64_t>::min()) {
        return false;
    }
    for (const auto& [var, k] : f.coef) {
        if (k == std::numeric_limits<std::int64_t>::min()) {
            return false;
        }
    }
    return true;
}

// Refines s by f + offset <= 0.
void refine_le(const LinearForm& f, std::int64_t offset, AbstractState& s) {
    if (s.is_bottom()) {
        return;
    }
    const Interval total = eval_form(f, s) + Interval::constant(offset);
    if (total.lower() && *total.lower() > 0) {
        s = AbstractState::bottom();
        return;
    }
    for (const auto& [var, k] : f.coef) {
        const Interval rest = eval_form(f, s, &var) + Interval::constant(offset);
        if (rest.is_bottom()) {
            s = AbstractState::bottom();
            return;
        }
        if (!rest.lower()) {
            continue;
        }
        // k * var <= -rest.lo
        const Wide bound = -Wide{*rest.lower()};
        Interval limit;
        if (k > 0) {
            limit = Interval::range(std::nullopt, round_upper(floor_div(bound, k)));
        } else {
            limit = Interval::range(round_lower(ceil_div(bound, k)), std::nullopt);
        }
        s.set(var, s.get(var).meet(limit));
        if (s.is_bottom()) {
            return;
        }
    }
}

// Refines s by f != 0.
void refine_ne(const LinearForm& f, AbstractState& s) {
    if (s.is_bottom()) {
        return;
    }
    if (auto v = eval_form(f, s).singleton(); v && *v == 0) {
        s = AbstractState::bottom();
        return;
    }
    for (const auto& [var, k] : f.coef) {
        auto rest = eval_form(f, s, &var).singleton();
        if (!rest) {
            continue;
        }
        // k * var != -rest
        const Wide target = -Wide{*rest};
        if (target % k != 0) {
            continue;
        }
        const Wide excluded = target / k;
        if (!fits(excluded)) {
            continue;
        }
        const auto x = static_cast<std::int64_t>(excluded);
        Interval cur = s.get(var);
        if (cur.lower() && *cur.lower() == x) {
            cur = Interval::range(x == std::numeric_limits<std::int64_t>::max() ? x : x + 1, cur.upper());
        } else if (cur.upper() && *cur.upper() == x) {
            cur = Interval::range(cur.lower(), x == std::numeric_limits<std::int64_t>::min() ? x : x - 1);
        }
        s.set(var, cur);
        if (s.is_bottom()) {
            return;
        }
    }
}

} // namespace

Interval eval(const Expr& e, const AbstractState& s) {
    if (s.is_bottom()) {
        return Interval::bottom();
    }
    if (auto f = linearize(e, 1)) {
        return eval_form(*f, s);
    }
    return eval_tree(e, s);
}

AbstractState assume(const Cond& c, const AbstractState& s) {
    if (s.is_bottom()) {
        return s;
    }
    auto f = difference(c);
    if (!f || !negatable(*f)) {
        // Bounds too large to manipulate exactly: keep the state, which is sound.
        return s;
    }
    AbstractState out = s;
    const LinearForm neg = negated(*f);
    // Two rounds let bounds on one variable tighten another.
    for (int round = 0; round < 2 && !out.is_bottom(); ++round) {
        switch (c.op) {
        case RelOp::Le: refine_le(*f, 0, out); break;
        case RelOp::Lt: refine_le(*f, 1, out); break;
        case RelOp::Ge: refine_le(neg, 0, out); break;
        case RelOp::Gt: refine_le(neg, 1, out); break;
        case RelOp::Eq:
            refine_le(*f, 0, out);
            refine_le(neg, 0, out);
            break;
        case RelOp::Ne: refine_ne(*f, out); break;
        }
    }
    return out;
}

AbstractState transfer(const Instruction& instr, const AbstractState& s) {
    if (s.is_bottom()) {
        return s;
    }
    switch (instr.kind) {
    case Instruction::Kind::Skip:
    case Instruction::Kind::Assert: return s;
    case Instruction::Kind::Assign: {
        AbstractState out = s;
        out.set(instr.target.name, eval(instr.expr, s));
        return out;
    }
    case Instruction::Kind::Assume: return assume(instr.cond, s);
    case Instruction::Kind::Havoc: {
        AbstractState out = s;
        out.forget(instr.target.name);
        return out;
    }
    }
    return s;
}

Verdict check_assert(const Cond& c, const AbstractState& s) {
    if (s.is_bottom()) {
        return Verdict::Proved;
    }
    Interval d;
    if (auto f = difference(c)) {
        d = eval_form(*f, s);
    } else {
        d = eval_tree(c.lhs, s) - eval_tree(c.rhs, s);
    }
    if (d.is_bottom()) {
        return Verdict::Proved;
    }
    const auto lo = d.lower();
    const auto hi = d.upper();
    bool holds = false;
    switch (c.op) {
    case RelOp::Eq: holds = d.singleton() == std::optional<std::int64_t>{0}; break;
    case RelOp::Ne: holds = !d.contains(0); break;
    case RelOp::Lt: holds = hi && *hi < 0; break;
    case RelOp::Le: holds = hi && *hi <= 0; break;
    case RelOp::Gt: holds = lo && *lo > 0; break;
    case RelOp::Ge: holds = lo && *lo >= 0; break;
    }
    return holds ? Verdict::Proved : Verdict::Unknown;
}

} // namespace irqv
