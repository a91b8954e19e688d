#pragma once

// Closed symbolic expression language in the chart variables x, y.
//
// Grammar (precedence pow > unary minus > mul/div > add/sub, pow right-associative):
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | atom ("^" factor)?
//   atom   := number | "x" | "y" | func "(" expr ")" | "(" expr ")"
//   func   := sin | cos | tan | exp | log | sqrt
//
// Nodes are immutable and shared; construction applies only the trivial
// rewrites 0*e, 1*e, e+0, e-0, e/1, e^0, e^1, -(-e) and constant folding,
// so expression identity stays predictable.

#include <cmath>
#include <cstdio>
#include <cctype>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace arsgeo {

enum class ExprKind {
    Constant, VarX, VarY,
    Neg, Sin, Cos, Tan, Exp, Log, Sqrt,
    Add, Sub, Mul, Div, Pow,
};

enum class Var { X, Y };

class ScalarExpr;

namespace detail {

struct ExprNode {
    ExprKind kind;
    double value = 0.0;                      // Constant only
    std::shared_ptr<const ExprNode> a, b;    // children
};

using NodePtr = std::shared_ptr<const ExprNode>;

inline NodePtr make_node(ExprKind k, double v, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->value = v;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline bool is_const(const NodePtr& n, double v) {
    return n->kind == ExprKind::Constant && n->value == v;
}

inline bool is_unary(ExprKind k) {
    return k == ExprKind::Neg || k == ExprKind::Sin || k == ExprKind::Cos ||
           k == ExprKind::Tan || k == ExprKind::Exp || k == ExprKind::Log ||
           k == ExprKind::Sqrt;
}

inline bool is_integer_value(double v) {
    return std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15;
}

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

class ScalarExpr {
public:
    ScalarExpr() : n_(detail::make_node(ExprKind::Constant, 0.0)) {}

    static ScalarExpr constant(double v) {
        return ScalarExpr(detail::make_node(ExprKind::Constant, v));
    }
    static ScalarExpr variable(Var v) {
        return ScalarExpr(detail::make_node(v == Var::X ? ExprKind::VarX : ExprKind::VarY, 0.0));
    }

    ExprKind kind() const { return n_->kind; }
    double constant_value() const { return n_->value; }
    ScalarExpr child_a() const { return ScalarExpr(n_->a); }
    ScalarExpr child_b() const { return ScalarExpr(n_->b); }

    bool is_constant() const { return n_->kind == ExprKind::Constant; }
    bool is_constant(double v) const { return detail::is_const(n_, v); }

    double eval(double x, double y) const {
        double r = eval_node(n_.get(), x, y);
        if (!std::isfinite(r))
            throw expr_domain_error("expression evaluates to a non-finite value at (" +
                                    detail::fmt_num(x) + ", " + detail::fmt_num(y) + ")");
        return r;
    }

    ScalarExpr diff(Var v) const { return ScalarExpr(diff_node(n_, v)); }

    std::string to_string() const {
        std::string out;
        print_node(n_.get(), 0, out);
        return out;
    }

    friend bool operator==(const ScalarExpr& l, const ScalarExpr& r) {
        return equal_nodes(l.n_.get(), r.n_.get());
    }
    friend bool operator!=(const ScalarExpr& l, const ScalarExpr& r) { return !(l == r); }

    // Smart constructors; the only rewrites applied anywhere.
    friend ScalarExpr operator+(const ScalarExpr& l, const ScalarExpr& r) {
        if (l.is_constant() && r.is_constant()) return constant(l.constant_value() + r.constant_value());
        if (l.is_constant(0.0)) return r;
        if (r.is_constant(0.0)) return l;
        return ScalarExpr(detail::make_node(ExprKind::Add, 0, l.n_, r.n_));
    }
    friend ScalarExpr operator-(const ScalarExpr& l, const ScalarExpr& r) {
        if (l.is_constant() && r.is_constant()) return constant(l.constant_value() - r.constant_value());
        if (r.is_constant(0.0)) return l;
        if (l.is_constant(0.0)) return -r;
        return ScalarExpr(detail::make_node(ExprKind::Sub, 0, l.n_, r.n_));
    }
    friend ScalarExpr operator*(const ScalarExpr& l, const ScalarExpr& r) {
        if (l.is_constant() && r.is_constant()) return constant(l.constant_value() * r.constant_value());
        if (l.is_constant(0.0) || r.is_constant(0.0)) return constant(0.0);
        if (l.is_constant(1.0)) return r;
        if (r.is_constant(1.0)) return l;
        return ScalarExpr(detail::make_node(ExprKind::Mul, 0, l.n_, r.n_));
    }
    friend ScalarExpr operator/(const ScalarExpr& l, const ScalarExpr& r) {
        if (l.is_constant() && r.is_constant() && r.constant_value() != 0.0)
            return constant(l.constant_value() / r.constant_value());
        if (l.is_constant(0.0) && !r.is_constant(0.0)) return constant(0.0);
        if (r.is_constant(1.0)) return l;
        return ScalarExpr(detail::make_node(ExprKind::Div, 0, l.n_, r.n_));
    }
    friend ScalarExpr operator-(const ScalarExpr& e) {
        if (e.is_constant()) return constant(-e.constant_value());
        if (e.kind() == ExprKind::Neg) return ScalarExpr(e.n_->a);
        return ScalarExpr(detail::make_node(ExprKind::Neg, 0, e.n_));
    }

    friend ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent);
    friend ScalarExpr sin(const ScalarExpr& e);
    friend ScalarExpr cos(const ScalarExpr& e);
    friend ScalarExpr tan(const ScalarExpr& e);
    friend ScalarExpr exp(const ScalarExpr& e);
    friend ScalarExpr log(const ScalarExpr& e);
    friend ScalarExpr sqrt(const ScalarExpr& e);

private:
    explicit ScalarExpr(detail::NodePtr n) : n_(std::move(n)) {}

    static ScalarExpr unary(ExprKind k, const ScalarExpr& e) {
        if (e.is_constant()) {
            double v = e.constant_value(), r = 0;
            bool ok = true;
            switch (k) {
                case ExprKind::Sin: r = std::sin(v); break;
                case ExprKind::Cos: r = std::cos(v); break;
                case ExprKind::Tan: r = std::tan(v); break;
                case ExprKind::Exp: r = std::exp(v); break;
                case ExprKind::Log: ok = v > 0; r = ok ? std::log(v) : 0; break;
                case ExprKind::Sqrt: ok = v >= 0; r = ok ? std::sqrt(v) : 0; break;
                default: ok = false; break;
            }
            if (ok && std::isfinite(r)) return constant(r);
        }
        return ScalarExpr(detail::make_node(k, 0, e.n_));
    }

    static double eval_node(const detail::ExprNode* n, double x, double y) {
        using K = ExprKind;
        switch (n->kind) {
            case K::Constant: return n->value;
            case K::VarX: return x;
            case K::VarY: return y;
            case K::Neg: return -eval_node(n->a.get(), x, y);
            case K::Sin: return std::sin(eval_node(n->a.get(), x, y));
            case K::Cos: return std::cos(eval_node(n->a.get(), x, y));
            case K::Tan: return std::tan(eval_node(n->a.get(), x, y));
            case K::Exp: return std::exp(eval_node(n->a.get(), x, y));
            case K::Log: {
                double v = eval_node(n->a.get(), x, y);
                if (v <= 0) throw expr_domain_error("log of non-positive value " + detail::fmt_num(v));
                return std::log(v);
            }
            case K::Sqrt: {
                double v = eval_node(n->a.get(), x, y);
                if (v < 0) throw expr_domain_error("sqrt of negative value " + detail::fmt_num(v));
                return std::sqrt(v);
            }
            case K::Add: return eval_node(n->a.get(), x, y) + eval_node(n->b.get(), x, y);
            case K::Sub: return eval_node(n->a.get(), x, y) - eval_node(n->b.get(), x, y);
            case K::Mul: return eval_node(n->a.get(), x, y) * eval_node(n->b.get(), x, y);
            case K::Div: {
                double num = eval_node(n->a.get(), x, y);
                double den = eval_node(n->b.get(), x, y);
                if (den == 0.0) throw expr_domain_error("division by zero");
                return num / den;
            }
            case K::Pow: {
                double base = eval_node(n->a.get(), x, y);
                double e = eval_node(n->b.get(), x, y);
                if (base < 0 && !detail::is_integer_value(e))
                    throw expr_domain_error("negative base " + detail::fmt_num(base) +
                                            " with non-integer exponent " + detail::fmt_num(e));
                if (base == 0 && e < 0) throw expr_domain_error("zero base with negative exponent");
                return std::pow(base, e);
            }
        }
        throw numeric_error("corrupt expression node");
    }

    static detail::NodePtr diff_node(const detail::NodePtr& n, Var v) {
        using K = ExprKind;
        auto D = [&](const detail::NodePtr& c) { return ScalarExpr(diff_node(c, v)); };
        auto E = [](const detail::NodePtr& c) { return ScalarExpr(c); };
        switch (n->kind) {
            case K::Constant: return constant(0.0).n_;
            case K::VarX: return constant(v == Var::X ? 1.0 : 0.0).n_;
            case K::VarY: return constant(v == Var::Y ? 1.0 : 0.0).n_;
            case K::Neg: return (-D(n->a)).n_;
            case K::Sin: return (cos(E(n->a)) * D(n->a)).n_;
            case K::Cos: return (-(sin(E(n->a)) * D(n->a))).n_;
            // d tan = (1 + tan^2) du
            case K::Tan: {
                ScalarExpr t = tan(E(n->a));
                return ((constant(1.0) + t * t) * D(n->a)).n_;
            }
            case K::Exp: return (exp(E(n->a)) * D(n->a)).n_;
            case K::Log: return (D(n->a) / E(n->a)).n_;
            case K::Sqrt: return (D(n->a) / (constant(2.0) * sqrt(E(n->a)))).n_;
            case K::Add: return (D(n->a) + D(n->b)).n_;
            case K::Sub: return (D(n->a) - D(n->b)).n_;
            case K::Mul: return (D(n->a) * E(n->b) + E(n->a) * D(n->b)).n_;
            case K::Div: return ((D(n->a) * E(n->b) - E(n->a) * D(n->b)) / (E(n->b) * E(n->b))).n_;
            case K::Pow: {
                ScalarExpr u = E(n->a), w = E(n->b);
                if (n->b->kind == K::Constant) {
                    double c = n->b->value;
                    return (constant(c) * pow(u, constant(c - 1.0)) * D(n->a)).n_;
                }
                // u^w * (w' log u + w u'/u), valid on u > 0
                return (pow(u, w) * (D(n->b) * log(u) + w * D(n->a) / u)).n_;
            }
        }
        throw numeric_error("corrupt expression node");
    }

    static bool equal_nodes(const detail::ExprNode* l, const detail::ExprNode* r) {
        if (l == r) return true;
        if (l->kind != r->kind) return false;
        if (l->kind == ExprKind::Constant) return l->value == r->value;
        if (l->a && !equal_nodes(l->a.get(), r->a.get())) return false;
        if (l->b && !equal_nodes(l->b.get(), r->b.get())) return false;
        return true;
    }

    // Precedence levels: add=1, mul=2, unary minus=3, pow=4, atom=5.
    static int level(ExprKind k) {
        using K = ExprKind;
        switch (k) {
            case K::Add: case K::Sub: return 1;
            case K::Mul: case K::Div: return 2;
            case K::Neg: return 3;
            case K::Pow: return 4;
            default: return 5;
        }
    }

    static void print_node(const detail::ExprNode* n, int min_level, std::string& out) {
        using K = ExprKind;
        int lv = level(n->kind);
        bool paren = lv < min_level;
        if (paren) out += '(';
        switch (n->kind) {
            case K::Constant: out += detail::fmt_num(n->value); break;
            case K::VarX: out += 'x'; break;
            case K::VarY: out += 'y'; break;
            case K::Neg: out += '-'; print_node(n->a.get(), 3, out); break;
            case K::Sin: case K::Cos: case K::Tan:
            case K::Exp: case K::Log: case K::Sqrt: {
                const char* name = n->kind == K::Sin ? "sin" : n->kind == K::Cos ? "cos" :
                                   n->kind == K::Tan ? "tan" : n->kind == K::Exp ? "exp" :
                                   n->kind == K::Log ? "log" : "sqrt";
                out += name;
                out += '(';
                print_node(n->a.get(), 0, out);
                out += ')';
                break;
            }
            case K::Add:
                print_node(n->a.get(), 1, out); out += " + "; print_node(n->b.get(), 2, out); break;
            case K::Sub:
                print_node(n->a.get(), 1, out); out += " - "; print_node(n->b.get(), 2, out); break;
            case K::Mul:
                print_node(n->a.get(), 2, out); out += '*'; print_node(n->b.get(), 3, out); break;
            case K::Div:
                print_node(n->a.get(), 2, out); out += '/'; print_node(n->b.get(), 3, out); break;
            case K::Pow:
                // right-associative: left child must bind tighter than pow
                print_node(n->a.get(), 5, out); out += '^'; print_node(n->b.get(), 3, out); break;
        }
        if (paren) out += ')';
    }

    // Function-call printing treats unary functions as atoms; Neg of a function
    // still prints as -sin(x).
    detail::NodePtr n_;

    friend class ExprParser;
};

inline ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent) {
    if (exponent.is_constant(1.0)) return base;
    if (exponent.is_constant(0.0)) return ScalarExpr::constant(1.0);
    if (base.is_constant() && exponent.is_constant()) {
        double b = base.constant_value(), e = exponent.constant_value();
        if (!(b < 0 && !detail::is_integer_value(e)) && !(b == 0 && e < 0)) {
            double r = std::pow(b, e);
            if (std::isfinite(r)) return ScalarExpr::constant(r);
        }
    }
    return ScalarExpr(detail::make_node(ExprKind::Pow, 0, base.n_, exponent.n_));
}
inline ScalarExpr sin(const ScalarExpr& e) { return ScalarExpr::unary(ExprKind::Sin, e); }
inline ScalarExpr cos(const ScalarExpr& e) { return ScalarExpr::unary(ExprKind::Cos, e); }
inline ScalarExpr tan(const ScalarExpr& e) { return ScalarExpr::unary(ExprKind::Tan, e); }
inline ScalarExpr exp(const ScalarExpr& e) { return ScalarExpr::unary(ExprKind::Exp, e); }
inline ScalarExpr log(const ScalarExpr& e) { return ScalarExpr::unary(ExprKind::Log, e); }
inline ScalarExpr sqrt(const ScalarExpr& e) { return ScalarExpr::unary(ExprKind::Sqrt, e); }

// Recursive-descent parser reporting byte offsets on error.
class ExprParser {
public:
    static ScalarExpr parse(const std::string& text) {
        ExprParser p(text);
        ScalarExpr e = p.parse_sum();
        p.skip_ws();
        if (p.pos_ < p.s_.size())
            p.fail("unexpected trailing input", p.pos_);
        return e;
    }

private:
    explicit ExprParser(const std::string& s) : s_(s) {}

    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, size_t at) const {
        throw input_error("syntax error at byte " + std::to_string(at) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    ScalarExpr parse_sum() {
        ScalarExpr e = parse_term();
        for (;;) {
            if (eat('+')) e = e + parse_term();
            else if (eat('-')) e = e - parse_term();
            else return e;
        }
    }

    ScalarExpr parse_term() {
        ScalarExpr e = parse_factor();
        for (;;) {
            if (eat('*')) e = e * parse_factor();
            else if (eat('/')) e = e / parse_factor();
            else return e;
        }
    }

    ScalarExpr parse_factor() {
        if (eat('-')) return -parse_factor();
        ScalarExpr base = parse_atom();
        if (eat('^')) return pow(base, parse_factor());
        return base;
    }

    ScalarExpr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input", pos_);
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        if (c == '(') {
            ++pos_;
            ScalarExpr e = parse_sum();
            if (!eat(')')) fail("expected ')'", pos_);
            return e;
        }
        fail(std::string("unexpected character '") + c + "'", pos_);
    }

    ScalarExpr parse_number() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t mark = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = mark; // 'e' belonged to something else; not a valid exponent
            }
        }
        const std::string tok = s_.substr(start, pos_ - start);
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size() || !std::isfinite(v))
            fail("malformed number '" + tok + "'", start);
        return ScalarExpr::constant(v);
    }

    ScalarExpr parse_ident() {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        if (id == "x") return ScalarExpr::variable(Var::X);
        if (id == "y") return ScalarExpr::variable(Var::Y);
        ExprKind k;
        if (id == "sin") k = ExprKind::Sin;
        else if (id == "cos") k = ExprKind::Cos;
        else if (id == "tan") k = ExprKind::Tan;
        else if (id == "exp") k = ExprKind::Exp;
        else if (id == "log") k = ExprKind::Log;
        else if (id == "sqrt") k = ExprKind::Sqrt;
        else fail("unknown identifier '" + id + "'", start);
        if (!eat('(')) fail("expected '(' after function name", pos_);
        ScalarExpr arg = parse_sum();
        if (!eat(')')) fail("expected ')'", pos_);
        switch (k) {
            case ExprKind::Sin: return sin(arg);
            case ExprKind::Cos: return cos(arg);
            case ExprKind::Tan: return tan(arg);
            case ExprKind::Exp: return exp(arg);
            case ExprKind::Log: return log(arg);
            default: return sqrt(arg);
        }
    }
};

inline ScalarExpr parse_expr(const std::string& text) { return ExprParser::parse(text); }

} // namespace arsgeo
