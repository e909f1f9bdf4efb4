#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dde/errors.hpp"
#include "dde/vec.hpp"

namespace dde::expr {

struct ParseError : Error {
    std::size_t position;
    ParseError(std::size_t pos, const std::string& msg)
        : Error("parse error at " + std::to_string(pos) + ": " + msg), position(pos) {}
};

struct EvalError : Error {
    enum class Kind { LogDomain, SqrtDomain, DivByZero, PowDomain, NonFinite };
    Kind kind;
    EvalError(Kind k, const std::string& msg) : Error("eval error: " + msg), kind(k) {}
};

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

/// Immutable AST over numbers, the variables t / x[i] / y[i], arithmetic,
/// and a fixed set of real functions.
struct Node {
    enum class Op { Number, VarT, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };
    Op op;
    double number = 0.0;
    std::size_t index = 0;
    std::string func;
    std::vector<ExprPtr> args;
};

inline ExprPtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Number;
    n->number = v;
    return n;
}
inline ExprPtr make_var(Node::Op op, std::size_t idx = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->index = idx;
    return n;
}
inline ExprPtr make_unary(ExprPtr a) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Neg;
    n->args = {std::move(a)};
    return n;
}
inline ExprPtr make_binary(Node::Op op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
}
inline ExprPtr make_call(std::string fn, std::vector<ExprPtr> args) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Call;
    n->func = std::move(fn);
    n->args = std::move(args);
    return n;
}

namespace detail {

inline int call_arity(std::string_view fn) {
    if (fn == "min" || fn == "max") return 2;
    if (fn == "sin" || fn == "cos" || fn == "exp" || fn == "log" || fn == "tanh" ||
        fn == "sqrt" || fn == "abs" || fn == "sgn")
        return 1;
    return -1;
}

class Parser {
public:
    Parser(std::string_view src, std::size_t n) : src_(src), n_(n) {}

    ExprPtr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(0, "empty expression");
        ExprPtr e = parse_sum();
        skip_ws();
        if (pos_ < src_.size()) throw ParseError(pos_, "unexpected trailing input");
        return e;
    }

private:
    ExprPtr parse_sum() {
        ExprPtr lhs = parse_product();
        for (;;) {
            skip_ws();
            if (consume('+'))
                lhs = make_binary(Node::Op::Add, lhs, parse_product());
            else if (consume('-'))
                lhs = make_binary(Node::Op::Sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    ExprPtr parse_product() {
        ExprPtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (consume('*'))
                lhs = make_binary(Node::Op::Mul, lhs, parse_unary());
            else if (consume('/'))
                lhs = make_binary(Node::Op::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    ExprPtr parse_unary() {
        skip_ws();
        if (consume('-')) return make_unary(parse_unary());
        return parse_power();
    }

    // '^' binds tighter than unary minus and associates to the right; the
    // exponent itself may carry a sign.
    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        skip_ws();
        if (consume('^')) return make_binary(Node::Op::Pow, base, parse_unary());
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "expected an operand");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_sum();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    ExprPtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        const std::string text(src_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw ParseError(start, "malformed number literal");
            return make_number(v);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(start, "malformed number literal");
        }
    }

    ExprPtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        if (name == "t") return make_var(Node::Op::VarT);
        if (name == "x" || name == "y") {
            expect('[');
            const std::size_t idx = parse_index(start);
            expect(']');
            if (idx >= n_)
                throw ParseError(start, name + "[" + std::to_string(idx) +
                                            "] exceeds state dimension " + std::to_string(n_));
            return make_var(name == "x" ? Node::Op::VarX : Node::Op::VarY, idx);
        }
        const int arity = detail::call_arity(name);
        if (arity < 0)
            throw ParseError(start, "unknown identifier '" + name +
                                        "' (allowed: t, x[i], y[i], functions, numbers)");
        expect('(');
        std::vector<ExprPtr> args;
        args.push_back(parse_sum());
        while (true) {
            skip_ws();
            if (consume(',')) {
                args.push_back(parse_sum());
            } else {
                break;
            }
        }
        expect(')');
        if (static_cast<int>(args.size()) != arity)
            throw ParseError(start, name + " expects " + std::to_string(arity) + " argument(s)");
        return make_call(name, std::move(args));
    }

    std::size_t parse_index(std::size_t at) {
        skip_ws();
        std::size_t v = 0;
        bool any = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(src_[pos_] - '0');
            ++pos_;
            any = true;
        }
        if (!any) throw ParseError(at, "expected a variable index");
        return v;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        skip_ws();
        if (!consume(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
    }

    std::string_view src_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Recursive-descent parse with the precedence chain
/// '^' (right) > unary '-' > '*' '/' > '+' '-'.
inline ExprPtr parse(std::string_view src, std::size_t n) {
    return detail::Parser(src, n).run();
}

inline double eval(const ExprPtr& e, double t, const Vec& x, const Vec& y);

namespace detail {
inline double checked(double v, EvalError::Kind kind, const char* what) {
    if (!std::isfinite(v)) throw EvalError(kind, what);
    return v;
}
} // namespace detail

/// Deterministic 64-bit evaluation; domain violations raise EvalError rather
/// than propagating NaN.
inline double eval(const ExprPtr& e, double t, const Vec& x, const Vec& y) {
    using Op = Node::Op;
    switch (e->op) {
        case Op::Number: return e->number;
        case Op::VarT: return t;
        case Op::VarX: return x.at(e->index);
        case Op::VarY: return y.at(e->index);
        case Op::Neg: return -eval(e->args[0], t, x, y);
        case Op::Add: return detail::checked(eval(e->args[0], t, x, y) + eval(e->args[1], t, x, y),
                                             EvalError::Kind::NonFinite, "overflow in '+'");
        case Op::Sub: return detail::checked(eval(e->args[0], t, x, y) - eval(e->args[1], t, x, y),
                                             EvalError::Kind::NonFinite, "overflow in '-'");
        case Op::Mul: return detail::checked(eval(e->args[0], t, x, y) * eval(e->args[1], t, x, y),
                                             EvalError::Kind::NonFinite, "overflow in '*'");
        case Op::Div: {
            const double den = eval(e->args[1], t, x, y);
            if (den == 0.0) throw EvalError(EvalError::Kind::DivByZero, "division by zero");
            return detail::checked(eval(e->args[0], t, x, y) / den, EvalError::Kind::NonFinite,
                                   "overflow in '/'");
        }
        case Op::Pow: {
            const double base = eval(e->args[0], t, x, y);
            const double expo = eval(e->args[1], t, x, y);
            if (base < 0.0 && expo != std::floor(expo))
                throw EvalError(EvalError::Kind::PowDomain,
                                "negative base with non-integer exponent");
            if (base == 0.0 && expo < 0.0)
                throw EvalError(EvalError::Kind::DivByZero, "zero base with negative exponent");
            return detail::checked(std::pow(base, expo), EvalError::Kind::NonFinite,
                                   "overflow in '^'");
        }
        case Op::Call: {
            const double a = eval(e->args[0], t, x, y);
            if (e->func == "sin") return std::sin(a);
            if (e->func == "cos") return std::cos(a);
            if (e->func == "exp")
                return detail::checked(std::exp(a), EvalError::Kind::NonFinite, "overflow in exp");
            if (e->func == "log") {
                if (a <= 0.0) throw EvalError(EvalError::Kind::LogDomain, "log of non-positive value");
                return std::log(a);
            }
            if (e->func == "tanh") return std::tanh(a);
            if (e->func == "sqrt") {
                if (a < 0.0) throw EvalError(EvalError::Kind::SqrtDomain, "sqrt of negative value");
                return std::sqrt(a);
            }
            if (e->func == "abs") return std::abs(a);
            if (e->func == "sgn") return (a > 0.0) ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
            const double b = eval(e->args[1], t, x, y);
            if (e->func == "min") return std::min(a, b);
            return std::max(a, b);  // "max"
        }
    }
    throw Error("eval: corrupt expression node");
}

namespace detail {

inline int precedence(const Node& n) {
    using Op = Node::Op;
    switch (n.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

inline void print(const ExprPtr& e, std::string& out);

inline void print_child(const ExprPtr& child, int min_prec, std::string& out) {
    if (precedence(*child) < min_prec) {
        out += '(';
        print(child, out);
        out += ')';
    } else {
        print(child, out);
    }
}

inline void print(const ExprPtr& e, std::string& out) {
    using Op = Node::Op;
    switch (e->op) {
        case Op::Number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", e->number);
            out += buf;
            return;
        }
        case Op::VarT: out += 't'; return;
        case Op::VarX: out += "x[" + std::to_string(e->index) + "]"; return;
        case Op::VarY: out += "y[" + std::to_string(e->index) + "]"; return;
        case Op::Neg:
            out += '-';
            print_child(e->args[0], 3, out);
            return;
        case Op::Add:
        case Op::Sub:
            print_child(e->args[0], 1, out);
            out += (e->op == Op::Add) ? " + " : " - ";
            print_child(e->args[1], 2, out);
            return;
        case Op::Mul:
        case Op::Div:
            print_child(e->args[0], 2, out);
            out += (e->op == Op::Mul) ? "*" : "/";
            print_child(e->args[1], 3, out);
            return;
        case Op::Pow:
            print_child(e->args[0], 5, out);
            out += '^';
            print_child(e->args[1], 3, out);
            return;
        case Op::Call:
            out += e->func;
            out += '(';
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) out += ", ";
                print(e->args[i], out);
            }
            out += ')';
            return;
    }
}

} // namespace detail

/// Canonical text form; parse(to_string(e)) reproduces the tree.
inline std::string to_string(const ExprPtr& e) {
    std::string out;
    detail::print(e, out);
    return out;
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->op != b->op) return false;
    switch (a->op) {
        case Node::Op::Number: return a->number == b->number;
        case Node::Op::VarT: return true;
        case Node::Op::VarX:
        case Node::Op::VarY: return a->index == b->index;
        case Node::Op::Call:
            if (a->func != b->func) return false;
            [[fallthrough]];
        default: {
            if (a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i)
                if (!equal(a->args[i], b->args[i])) return false;
            return true;
        }
    }
}

/// Whether the tree reads the delayed state y anywhere; delay expressions
/// and ODE right-hand sides must not.
inline bool references_y(const ExprPtr& e) {
    if (e->op == Node::Op::VarY) return true;
    for (const auto& a : e->args)
        if (references_y(a)) return true;
    return false;
}

} // namespace dde::expr
