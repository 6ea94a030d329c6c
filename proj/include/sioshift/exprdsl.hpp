#pragma once
// Coefficient expression language: parser, evaluator, printer and symbolic
// derivative. Grammar (standard infix):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 't' | 'i' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt | atan | abs
//
// The variable is called `t` by default; symbols over the Mellin frequency
// use `x`.

#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace sioshift {

using cplx = std::complex<double>;

enum class Op {
    Number, Imag, Var,
    Add, Sub, Mul, Div, Pow, Neg,
    Sin, Cos, Exp, Log, Sqrt, Atan, Abs
};

inline bool isUnaryFunction(Op op) { return op >= Op::Sin; }
inline bool isBinary(Op op) { return op >= Op::Add && op <= Op::Pow; }

inline const char* functionName(Op op) {
    switch (op) {
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Atan: return "atan";
        case Op::Abs: return "abs";
        default: return "";
    }
}

/// Immutable expression tree. Copies share structure.
class Expr {
    struct Node {
        Op op;
        double value = 0.0;
        std::shared_ptr<const Node> lhs, rhs;
    };

public:
    Expr() : Expr(number(0.0)) {}

    static Expr number(double v) { return Expr(std::make_shared<const Node>(Node{Op::Number, v, {}, {}})); }
    static Expr imag() { return Expr(std::make_shared<const Node>(Node{Op::Imag, 0.0, {}, {}})); }
    static Expr var() { return Expr(std::make_shared<const Node>(Node{Op::Var, 0.0, {}, {}})); }
    static Expr unary(Op op, const Expr& arg) {
        return Expr(std::make_shared<const Node>(Node{op, 0.0, arg.node_, {}}));
    }
    static Expr binary(Op op, const Expr& l, const Expr& r) {
        return Expr(std::make_shared<const Node>(Node{op, 0.0, l.node_, r.node_}));
    }

    Op op() const { return node_->op; }
    double value() const { return node_->value; }
    Expr lhs() const { return Expr(node_->lhs); }
    Expr rhs() const { return Expr(node_->rhs); }
    /// Argument of a unary node (Neg or a function).
    Expr arg() const { return Expr(node_->lhs); }

    bool isNumber() const { return op() == Op::Number; }
    bool isNumber(double v) const { return op() == Op::Number && value() == v; }

    bool dependsOnVar() const {
        switch (op()) {
            case Op::Var: return true;
            case Op::Number:
            case Op::Imag: return false;
            default:
                return (node_->lhs && lhs().dependsOnVar()) || (node_->rhs && rhs().dependsOnVar());
        }
    }

    bool containsImag() const {
        switch (op()) {
            case Op::Imag: return true;
            case Op::Number:
            case Op::Var: return false;
            default:
                return (node_->lhs && lhs().containsImag()) || (node_->rhs && rhs().containsImag());
        }
    }

    bool containsAbs() const {
        if (op() == Op::Abs) return true;
        return (node_->lhs && lhs().containsAbs()) || (node_->rhs && rhs().containsAbs());
    }

    /// Structural equality.
    friend bool operator==(const Expr& a, const Expr& b) {
        if (a.node_ == b.node_) return true;
        if (a.op() != b.op()) return false;
        switch (a.op()) {
            case Op::Number: return a.value() == b.value();
            case Op::Imag:
            case Op::Var: return true;
            default:
                if (isBinary(a.op())) return a.lhs() == b.lhs() && a.rhs() == b.rhs();
                return a.arg() == b.arg();
        }
    }

    std::size_t size() const {
        std::size_t n = 1;
        if (node_->lhs) n += lhs().size();
        if (node_->rhs) n += rhs().size();
        return n;
    }

    /// Evaluates at the given value of the variable. Domain violations throw
    /// DomainError naming the offending subexpression; results are always finite.
    cplx eval(double var) const { return evalNode(var); }

    std::string str(std::string_view varName = "t") const {
        std::string out;
        print(out, varName);
        return out;
    }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static int precedence(const Expr& e) {
        switch (e.op()) {
            case Op::Add:
            case Op::Sub: return 1;
            case Op::Mul:
            case Op::Div: return 2;
            case Op::Neg: return 3;
            case Op::Pow: return 4;
            case Op::Number: return e.value() < 0 || std::signbit(e.value()) ? 3 : 5;
            default: return 5;
        }
    }

    static std::string formatNumber(double v) {
        if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
        char buf[40];
        for (int prec = 1; prec <= 17; ++prec) {
            std::snprintf(buf, sizeof buf, "%.*g", prec, v);
            if (std::strtod(buf, nullptr) == v) break;
        }
        return buf;
    }

    void printChild(std::string& out, const Expr& child, bool parens, std::string_view varName) const {
        if (parens) out += '(';
        child.print(out, varName);
        if (parens) out += ')';
    }

    void print(std::string& out, std::string_view varName) const {
        switch (op()) {
            case Op::Number: out += formatNumber(value()); return;
            case Op::Imag: out += 'i'; return;
            case Op::Var: out += varName; return;
            case Op::Neg:
                out += '-';
                printChild(out, arg(), precedence(arg()) < 3, varName);
                return;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div: {
                const int prec = precedence(*this);
                printChild(out, lhs(), precedence(lhs()) < prec, varName);
                out += op() == Op::Add ? '+' : op() == Op::Sub ? '-' : op() == Op::Mul ? '*' : '/';
                printChild(out, rhs(), precedence(rhs()) <= prec || precedence(rhs()) == 3, varName);
                return;
            }
            case Op::Pow:
                printChild(out, lhs(), precedence(lhs()) <= 4, varName);
                out += '^';
                printChild(out, rhs(), precedence(rhs()) < 3, varName);
                return;
            default:
                out += functionName(op());
                out += '(';
                arg().print(out, varName);
                out += ')';
                return;
        }
    }

    [[noreturn]] void domainFail(const char* what) const { throw DomainError(what, str()); }

    cplx checked(cplx v) const {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) domainFail("non-finite value");
        return v;
    }

    static bool isRealValue(cplx z) { return z.imag() == 0.0; }

    cplx evalNode(double var) const {
        switch (op()) {
            case Op::Number: return value();
            case Op::Imag: return {0.0, 1.0};
            case Op::Var: return var;
            case Op::Neg: return -arg().evalNode(var);
            case Op::Add: return checked(lhs().evalNode(var) + rhs().evalNode(var));
            case Op::Sub: return checked(lhs().evalNode(var) - rhs().evalNode(var));
            case Op::Mul: return checked(lhs().evalNode(var) * rhs().evalNode(var));
            case Op::Div: {
                const cplx num = lhs().evalNode(var);
                const cplx den = rhs().evalNode(var);
                if (den == 0.0) domainFail("division by zero");
                return checked(num / den);
            }
            case Op::Pow: {
                const cplx base = lhs().evalNode(var);
                const cplx ex = rhs().evalNode(var);
                if (isRealValue(base) && isRealValue(ex)) {
                    const double b = base.real(), e = ex.real();
                    if (b == 0.0) {
                        if (e > 0.0) return 0.0;
                        domainFail("zero raised to a non-positive power");
                    }
                    if (b < 0.0 && e != std::floor(e)) domainFail("negative base with non-integer exponent");
                    return checked(std::pow(b, e));
                }
                if (base == 0.0) domainFail("zero raised to a complex power");
                return checked(std::pow(base, ex));
            }
            case Op::Sin: return checked(std::sin(arg().evalNode(var)));
            case Op::Cos: return checked(std::cos(arg().evalNode(var)));
            case Op::Exp: {
                const cplx z = arg().evalNode(var);
                if (isRealValue(z)) return checked(std::exp(z.real()));
                return checked(std::exp(z));
            }
            case Op::Log: {
                const cplx z = arg().evalNode(var);
                if (isRealValue(z)) {
                    if (z.real() <= 0.0) domainFail("log of non-positive argument");
                    return std::log(z.real());
                }
                return checked(std::log(z));
            }
            case Op::Sqrt: {
                const cplx z = arg().evalNode(var);
                if (isRealValue(z)) {
                    if (z.real() < 0.0) domainFail("sqrt of negative argument");
                    return std::sqrt(z.real());
                }
                return checked(std::sqrt(z));
            }
            case Op::Atan: {
                const cplx z = arg().evalNode(var);
                if (isRealValue(z)) return std::atan(z.real());
                if (z.real() == 0.0 && std::abs(z.imag()) == 1.0) domainFail("atan pole");
                return checked(std::atan(z));
            }
            case Op::Abs: return std::abs(arg().evalNode(var));
        }
        return 0.0;
    }

    std::shared_ptr<const Node> node_;
};

// Simplifying constructors used by differentiation and the log-variable
// rewrite. The parser never simplifies, so parse/print round-trips exactly.
namespace build {

inline Expr num(double v) { return Expr::number(v); }

inline Expr add(const Expr& a, const Expr& b) {
    if (a.isNumber(0.0)) return b;
    if (b.isNumber(0.0)) return a;
    if (a.isNumber() && b.isNumber()) return num(a.value() + b.value());
    return Expr::binary(Op::Add, a, b);
}

inline Expr neg(const Expr& a) {
    if (a.isNumber()) return num(-a.value());
    if (a.op() == Op::Neg) return a.arg();
    return Expr::unary(Op::Neg, a);
}

inline Expr sub(const Expr& a, const Expr& b) {
    if (b.isNumber(0.0)) return a;
    if (a.isNumber(0.0)) return neg(b);
    if (a.isNumber() && b.isNumber()) return num(a.value() - b.value());
    return Expr::binary(Op::Sub, a, b);
}

inline Expr mul(const Expr& a, const Expr& b) {
    if (a.isNumber(0.0) || b.isNumber(0.0)) return num(0.0);
    if (a.isNumber(1.0)) return b;
    if (b.isNumber(1.0)) return a;
    if (a.isNumber(-1.0)) return neg(b);
    if (b.isNumber(-1.0)) return neg(a);
    if (a.isNumber() && b.isNumber()) return num(a.value() * b.value());
    return Expr::binary(Op::Mul, a, b);
}

inline Expr div(const Expr& a, const Expr& b) {
    if (a.isNumber(0.0)) return num(0.0);
    if (b.isNumber(1.0)) return a;
    return Expr::binary(Op::Div, a, b);
}

inline Expr pow(const Expr& a, const Expr& b) {
    if (b.isNumber(1.0)) return a;
    if (b.isNumber(0.0)) return num(1.0);
    return Expr::binary(Op::Pow, a, b);
}

inline Expr fn(Op op, const Expr& a) { return Expr::unary(op, a); }

}  // namespace build

namespace detail {

class Parser {
public:
    Parser(std::string_view src, std::string_view varName) : src_(src), var_(varName) {}

    Expr parseAll() {
        skipSpace();
        if (pos_ >= src_.size()) fail("empty expression", {"number", "identifier", "(", "-"});
        Expr e = parseExpr();
        skipSpace();
        if (pos_ != src_.size()) fail("unexpected character", {"operator", "end of input"});
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        std::string what = "syntax error at offset " + std::to_string(pos_) + ": " + msg;
        if (!expected.empty()) {
            what += " (expected";
            for (std::size_t k = 0; k < expected.size(); ++k) what += (k ? ", " : " ") + expected[k];
            what += ")";
        }
        throw ParseError(what, pos_, std::move(expected));
    }

    void skipSpace() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skipSpace();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parseExpr() {
        Expr lhs = parseTerm();
        for (;;) {
            if (accept('+')) lhs = Expr::binary(Op::Add, lhs, parseTerm());
            else if (accept('-')) lhs = Expr::binary(Op::Sub, lhs, parseTerm());
            else return lhs;
        }
    }

    Expr parseTerm() {
        Expr lhs = parseUnary();
        for (;;) {
            if (accept('*')) lhs = Expr::binary(Op::Mul, lhs, parseUnary());
            else if (accept('/')) lhs = Expr::binary(Op::Div, lhs, parseUnary());
            else return lhs;
        }
    }

    Expr parseUnary() {
        if (accept('-')) return Expr::unary(Op::Neg, parseUnary());
        return parsePower();
    }

    Expr parsePower() {
        Expr base = parsePrimary();
        if (accept('^')) return Expr::binary(Op::Pow, base, parseUnary());
        return base;
    }

    Expr parsePrimary() {
        skipSpace();
        if (pos_ >= src_.size()) fail("unexpected end of input", {"number", "identifier", "(", "-"});
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parseExpr();
            if (!accept(')')) fail("unbalanced parenthesis", {")"});
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parseNumber();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parseIdentifier();
        fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "(", "-"});
    }

    Expr parseNumber() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t k = pos_ + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                pos_ = k;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size() || text == ".") {
            pos_ = start;
            fail("malformed number '" + text + "'", {"number"});
        }
        return Expr::number(v);
    }

    Expr parseIdentifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == var_) return Expr::var();
        if (name == "i") return Expr::imag();
        if (name == "pi") return Expr::number(std::numbers::pi);
        static constexpr Op funcs[] = {Op::Sin, Op::Cos, Op::Exp, Op::Log, Op::Sqrt, Op::Atan, Op::Abs};
        for (Op f : funcs) {
            if (name == functionName(f)) {
                if (!accept('(')) fail("function '" + std::string(name) + "' needs an argument", {"("});
                Expr a = parseExpr();
                if (!accept(')')) fail("unbalanced parenthesis", {")"});
                return Expr::unary(f, a);
            }
        }
        throw UnknownIdentifierError(std::string(name), start);
    }

    std::string_view src_;
    std::string_view var_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `source`; throws ParseError (with byte offset and expected tokens)
/// or UnknownIdentifierError.
inline Expr parse(std::string_view source, std::string_view varName = "t") {
    return detail::Parser(source, varName).parseAll();
}

/// Symbolic derivative with respect to the variable. abs is rejected.
inline Expr differentiate(const Expr& e) {
    using namespace build;
    switch (e.op()) {
        case Op::Number:
        case Op::Imag: return num(0.0);
        case Op::Var: return num(1.0);
        case Op::Neg: return neg(differentiate(e.arg()));
        case Op::Add: return add(differentiate(e.lhs()), differentiate(e.rhs()));
        case Op::Sub: return sub(differentiate(e.lhs()), differentiate(e.rhs()));
        case Op::Mul: {
            const Expr u = e.lhs(), v = e.rhs();
            return add(mul(differentiate(u), v), mul(u, differentiate(v)));
        }
        case Op::Div: {
            const Expr u = e.lhs(), v = e.rhs();
            const Expr du = differentiate(u), dv = differentiate(v);
            if (dv.isNumber(0.0)) return div(du, v);
            return div(sub(mul(du, v), mul(u, dv)), pow(v, num(2.0)));
        }
        case Op::Pow: {
            const Expr u = e.lhs(), v = e.rhs();
            if (!v.dependsOnVar()) {
                const Expr vm1 = v.isNumber() ? num(v.value() - 1.0) : sub(v, num(1.0));
                return mul(mul(v, pow(u, vm1)), differentiate(u));
            }
            if (!u.dependsOnVar()) return mul(mul(e, fn(Op::Log, u)), differentiate(v));
            return mul(e, add(mul(differentiate(v), fn(Op::Log, u)), div(mul(v, differentiate(u)), u)));
        }
        case Op::Sin: return mul(fn(Op::Cos, e.arg()), differentiate(e.arg()));
        case Op::Cos: return neg(mul(fn(Op::Sin, e.arg()), differentiate(e.arg())));
        case Op::Exp: return mul(e, differentiate(e.arg()));
        case Op::Log: return div(differentiate(e.arg()), e.arg());
        case Op::Sqrt: return div(differentiate(e.arg()), mul(num(2.0), e));
        case Op::Atan:
            return div(differentiate(e.arg()), add(num(1.0), pow(e.arg(), num(2.0))));
        case Op::Abs: throw NotDifferentiableError("abs is not differentiable: '" + e.str() + "'");
    }
    return num(0.0);
}

/// Rewrites f(t) as g(X) = f(e^X) and folds log(exp(z)) -> z for real z, so
/// that coefficients can be evaluated at log t far beyond double range.
/// Only identities valid for t > 0 are applied.
inline Expr toLogVariable(const Expr& e) {
    using namespace build;
    auto isRealExp = [](const Expr& x) { return x.op() == Op::Exp && !x.arg().containsImag(); };
    switch (e.op()) {
        case Op::Number:
        case Op::Imag: return e;
        case Op::Var: return fn(Op::Exp, Expr::var());
        case Op::Neg: return neg(toLogVariable(e.arg()));
        case Op::Add: return add(toLogVariable(e.lhs()), toLogVariable(e.rhs()));
        case Op::Sub: return sub(toLogVariable(e.lhs()), toLogVariable(e.rhs()));
        case Op::Mul: {
            const Expr a = toLogVariable(e.lhs()), b = toLogVariable(e.rhs());
            if (isRealExp(a) && isRealExp(b)) return fn(Op::Exp, add(a.arg(), b.arg()));
            return mul(a, b);
        }
        case Op::Div: {
            const Expr a = toLogVariable(e.lhs()), b = toLogVariable(e.rhs());
            if (isRealExp(b)) {
                const Expr inv = fn(Op::Exp, neg(b.arg()));
                if (isRealExp(a)) return fn(Op::Exp, sub(a.arg(), b.arg()));
                return mul(a, inv);
            }
            return div(a, b);
        }
        case Op::Pow: {
            const Expr a = toLogVariable(e.lhs()), b = toLogVariable(e.rhs());
            if (isRealExp(a) && !b.containsImag()) return fn(Op::Exp, mul(b, a.arg()));
            return pow(a, b);
        }
        case Op::Sqrt: {
            const Expr a = toLogVariable(e.arg());
            if (isRealExp(a)) return fn(Op::Exp, div(a.arg(), num(2.0)));
            return fn(Op::Sqrt, a);
        }
        case Op::Log: {
            const Expr a = toLogVariable(e.arg());
            if (isRealExp(a)) return a.arg();
            if (a.op() == Op::Mul) {
                const Expr l = a.lhs(), r = a.rhs();
                if (l.isNumber() && l.value() > 0 && isRealExp(r)) return add(num(std::log(l.value())), r.arg());
                if (r.isNumber() && r.value() > 0 && isRealExp(l)) return add(l.arg(), num(std::log(r.value())));
            }
            return fn(Op::Log, a);
        }
        default: return fn(e.op(), toLogVariable(e.arg()));
    }
}

/// Central difference used as the independent derivative oracle.
inline cplx centralDifference(const Expr& e, double t, double h) {
    return (e.eval(t + h) - e.eval(t - h)) / (2.0 * h);
}

}  // namespace sioshift
