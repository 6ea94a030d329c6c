#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sioshift/exprdsl.hpp"

using namespace sioshift;

namespace {

Expr T() { return Expr::var(); }
Expr N(double v) { return Expr::number(v); }
Expr B(Op op, const Expr& l, const Expr& r) { return Expr::binary(op, l, r); }
Expr U(Op op, const Expr& a) { return Expr::unary(op, a); }

}  // namespace

TEST(Parse, Literal) {
    const Expr e = parse("2");
    ASSERT_TRUE(e.isNumber());
    EXPECT_EQ(e.value(), 2.0);
}

TEST(Parse, NestedFunctions) {
    EXPECT_EQ(parse("2+sin(log(log(t)))"), B(Op::Add, N(2), U(Op::Sin, U(Op::Log, U(Op::Log, T())))));
    EXPECT_EQ(parse("atan(log(t))/4"), B(Op::Div, U(Op::Atan, U(Op::Log, T())), N(4)));
}

TEST(Parse, Associativity) {
    EXPECT_EQ(parse("1-2-3"), B(Op::Sub, B(Op::Sub, N(1), N(2)), N(3)));
    EXPECT_EQ(parse("8/4/2"), B(Op::Div, B(Op::Div, N(8), N(4)), N(2)));
    EXPECT_EQ(parse("2^3^2"), B(Op::Pow, N(2), B(Op::Pow, N(3), N(2))));
    EXPECT_EQ(parse("1+2*3"), B(Op::Add, N(1), B(Op::Mul, N(2), N(3))));
    EXPECT_EQ(parse("(1+2)*3"), B(Op::Mul, B(Op::Add, N(1), N(2)), N(3)));
}

TEST(Parse, ImaginaryUnitAndPi) {
    EXPECT_EQ(parse("1+2*i").eval(1.0), cplx(1.0, 2.0));
    EXPECT_DOUBLE_EQ(parse("pi").eval(1.0).real(), std::numbers::pi);
}

TEST(Parse, SyntaxErrorsCarryOffsetAndExpected) {
    try {
        parse("2+*sin(t)");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 2u);
        EXPECT_FALSE(e.expected().empty());
    }
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("sin(t"), ParseError);
    EXPECT_THROW(parse("t)"), ParseError);
    EXPECT_THROW(parse("sin t"), ParseError);
}

TEST(Parse, UnknownIdentifier) {
    try {
        parse("1+foo(t)");
        FAIL();
    } catch (const UnknownIdentifierError& e) {
        EXPECT_EQ(e.name(), "foo");
        EXPECT_EQ(e.offset(), 2u);
    }
    EXPECT_THROW(parse("x"), UnknownIdentifierError);
    EXPECT_NO_THROW(parse("x", "x"));
}

TEST(Eval, Examples) {
    EXPECT_EQ(parse("2").eval(5.0), cplx(2.0));
    EXPECT_NEAR(std::abs(parse("log(t)").eval(std::exp(1.0)) - 1.0), 0.0, 1e-15);
    const double t = std::exp(std::exp(std::numbers::pi / 2));
    EXPECT_NEAR(std::abs(parse("2+sin(log(log(t)))").eval(t) - 3.0), 0.0, 1e-14);
}

TEST(Eval, DomainErrorsNameSubexpression) {
    try {
        parse("2+log(log(t))").eval(0.5);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.subexpression(), "log(log(t))");
    }
    EXPECT_THROW(parse("1/(t-1)").eval(1.0), DomainError);
    EXPECT_THROW(parse("exp(t)").eval(1000.0), DomainError);
}

TEST(Differentiate, Examples) {
    EXPECT_EQ(differentiate(parse("t")).eval(3.0), cplx(1.0));
    const Expr d1 = differentiate(parse("atan(log(t))/4"));
    const Expr d2 = differentiate(parse("sin(log(log(t)))"));
    for (double t : {1.5, 3.0, 10.0, 1e4}) {
        const double l = std::log(t);
        EXPECT_NEAR(d1.eval(t).real(), 1.0 / (4.0 * t * (1.0 + l * l)), 1e-15);
        EXPECT_NEAR(d2.eval(t).real(), std::cos(std::log(l)) / (t * l), 1e-14);
    }
}

TEST(Differentiate, RejectsAbs) { EXPECT_THROW(differentiate(parse("abs(t)")), NotDifferentiableError); }

TEST(LogVariable, EvaluatesFarBeyondDoubleRange) {
    const Expr g = toLogVariable(parse("2+sin(log(log(t)))"));
    EXPECT_NEAR(g.eval(1e6).real(), 2.0 + std::sin(std::log(1e6)), 1e-12);
    const Expr h = toLogVariable(parse("t^2/t"));
    EXPECT_NEAR(std::log(h.eval(3.0).real()), 3.0, 1e-12);
}

// Random trees over a safe domain (t in [1.5, 8]).
class RandomExpr {
public:
    explicit RandomExpr(unsigned seed) : rng_(seed) {}

    Expr make(int depth) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
        switch (pick(rng_)) {
            case 0: return Expr::number(std::uniform_real_distribution<double>(0.25, 3.0)(rng_));
            case 1: return Expr::var();
            case 2: return Expr::binary(Op::Add, make(depth - 1), make(depth - 1));
            case 3: return Expr::binary(Op::Sub, make(depth - 1), make(depth - 1));
            case 4: return Expr::binary(Op::Mul, make(depth - 1), make(depth - 1));
            case 5: return Expr::binary(Op::Div, make(depth - 1), Expr::binary(Op::Add, Expr::number(2.0), positive(depth - 1)));
            case 6: return Expr::unary(Op::Sin, make(depth - 1));
            case 7: return Expr::unary(Op::Atan, make(depth - 1));
            case 8: return Expr::unary(Op::Log, positive(depth - 1));
            default: return Expr::unary(Op::Sqrt, positive(depth - 1));
        }
    }

private:
    /// Bounded away from zero on the domain.
    Expr positive(int depth) { return Expr::binary(Op::Add, Expr::number(1.0), Expr::unary(Op::Exp, Expr::unary(Op::Sin, make(depth)))); }

    std::mt19937 rng_;
};

TEST(Property, PrintParseRoundTrip) {
    RandomExpr gen(11);
    for (int k = 0; k < 300; ++k) {
        const Expr e = gen.make(5);
        const Expr back = parse(e.str());
        EXPECT_EQ(back, e) << e.str();
    }
    for (const char* s : {"-t^2", "(-t)^2", "2^-t", "-(1-t)", "t-(1-t)", "1/(2*t)", "1/2*t", "2^(3^t)", "(2^3)^t"})
        EXPECT_EQ(parse(parse(s).str()), parse(s)) << s;
}

TEST(Property, DerivativeMatchesCentralDifference) {
    RandomExpr gen(7);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> tdist(1.5, 8.0);
    int checked = 0;
    for (int k = 0; checked < 100 && k < 1000; ++k) {
        const Expr e = gen.make(4);
        const Expr d = differentiate(e);
        const double t = tdist(rng);
        cplx exact, fd;
        try {
            exact = d.eval(t);
            fd = centralDifference(e, t, 1e-6 * t);
        } catch (const DomainError&) {
            continue;
        }
        EXPECT_LE(std::abs(exact - fd), 1e-5 * (1.0 + std::abs(exact))) << e.str() << " at " << t;
        ++checked;
    }
    EXPECT_EQ(checked, 100);
}

TEST(Property, ParserFuzzNeverCrashes) {
    const std::string alphabet = "t0123456789.+-*/^() sinco expltqrab i";
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1), len(0, 24);
    int accepted = 0;
    for (int k = 0; k < 20000; ++k) {
        std::string s;
        for (std::size_t n = len(rng); n > 0; --n) s += alphabet[ch(rng)];
        try {
            const Expr e = parse(s);
            ++accepted;
            (void)parse(e.str());
        } catch (const ParseError&) {
        }
    }
    EXPECT_GT(accepted, 0);
}
