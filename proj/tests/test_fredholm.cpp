#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sioshift/fredholm.hpp"
#include "sioshift/selftest.hpp"

using namespace sioshift;

namespace {

const double kMargin = 2.0 - std::exp(-0.5);
const double kHalfRoot = std::exp(0.5);

FiberPoint fiber(cplx a, cplx b, cplx c, cplx d, double omega) {
    FiberPoint fp;
    fp.values = {a, b, c, d, omega};
    fp.exact = true;
    return fp;
}

ShiftedSIO constantSIO(cplx a, cplx b, cplx c, cplx d, double omega, double p = 2.0) {
    return ShiftedSIO(SOFunction::constant(a), SOFunction::constant(b), SOFunction::constant(c),
                      SOFunction::constant(d), SOSShift(SOFunction::constant(omega)), p);
}

/// Branch expected from the closed-form plus/minus margins.
InvertibilityVerdict analyticBranch(cplx a, cplx b, double omega, double p) {
    const double m = std::abs(a) - std::abs(b) * std::exp(-omega / p);
    if (m > 0.0 && std::abs(a) > 0.0) return InvertibilityVerdict::FirstBranch;
    if (m < 0.0 && std::abs(b) > 0.0) return InvertibilityVerdict::SecondBranch;
    return InvertibilityVerdict::NotInvertible;
}

}  // namespace

TEST(SymbolN, Examples) {
    for (double x : {-30.0, -1.0, 0.0, 0.4, 7.0}) EXPECT_NEAR(std::abs(symbolN(fiber(1, 0, 1, 0, 1), 2.0, x) - 1.0), 0.0, 1e-15);
    const auto fp = fiber(2, 1, 2, 1, 1);
    for (double x : {-5.0, -0.3, 0.0, 1.0, 3.0}) {
        const cplx expect = 2.0 - std::exp(cplx(0.0, x)) * std::exp(-0.5);
        EXPECT_NEAR(std::abs(symbolN(fp, 2.0, x) - expect), 0.0, 1e-14);
        EXPECT_GE(std::abs(symbolN(fp, 2.0, x)), kMargin - 1e-14);
    }
    EXPECT_NEAR(std::abs(symbolN(fiber(1, kHalfRoot, 1, kHalfRoot, 1), 2.0, 0.0)), 0.0, 1e-15);
}

TEST(SymbolN, ComplexContinuationAgreesOnRealLine) {
    const auto fp = fiber(cplx(1, 2), 0.5, 3, cplx(0, 1), 0.7);
    for (double p : {1.5, 2.0, 4.0})
        for (double x : {-3.0, -0.2, 0.0, 0.9, 5.0})
            EXPECT_NEAR(std::abs(symbolNComplex(fp, p, x) - symbolN(fp, p, x)), 0.0, 1e-12);
}

TEST(SymbolN, HalvesTendToPlusAndMinusData) {
    const auto fp = fiber(3, 0, cplx(0, -1), 0, 1);
    EXPECT_NEAR(std::abs(symbolN(fp, 2.0, 20.0) - 3.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(symbolN(fp, 2.0, -20.0) - cplx(0, -1)), 0.0, 1e-12);
}

TEST(TailBound, Examples) {
    const auto t0 = symbolTailBound(fiber(1.5, 0, cplx(0, 2), 0, 1), 2.0, 8.0);
    EXPECT_EQ(t0.circlePlus, 1.5);
    EXPECT_EQ(t0.circleMinus, 2.0);
    EXPECT_LT(t0.correction, 1e-20);

    const auto t1 = symbolTailBound(fiber(2, 1, 2, 1, 1), 2.0, 8.0);
    EXPECT_NEAR(t1.circlePlus, kMargin, 1e-15);
    EXPECT_NEAR(t1.circlePlus, 1.3935, 1e-4);

    const auto t2 = symbolTailBound(fiber(1, 1, 2, 0, 0), 2.0, 4.0);
    EXPECT_EQ(t2.circlePlus, 0.0);
    EXPECT_LT(t2.plus, 0.0);

    EXPECT_THROW(symbolTailBound(fiber(1, 0, 1, 0, 1), 2.0, 1.0), Error);
}

TEST(TailBound, BoundsSymbolBeyondX) {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 0; n < 30; ++n) {
        const auto fp = fiber({u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, u(rng));
        const auto t = symbolTailBound(fp, 2.0, 2.0);
        for (double x = 2.0; x < 40.0; x += 0.01) {
            EXPECT_GE(std::abs(symbolN(fp, 2.0, x)), t.plus - 1e-12);
            EXPECT_GE(std::abs(symbolN(fp, 2.0, -x)), t.minus - 1e-12);
        }
    }
}

TEST(ConditionII, Examples) {
    const auto r1 = checkConditionII(2.0, {fiber(1, 0, 1, 0, 1)});
    EXPECT_NEAR(r1.margin, 1.0, 1e-12);
    EXPECT_EQ(r1.result, Tri::Pass);

    const auto r2 = checkConditionII(2.0, {fiber(2, 1, 2, 1, 1)});
    EXPECT_NEAR(r2.margin, kMargin, 1e-9);
    EXPECT_EQ(r2.result, Tri::Pass);

    const auto r3 = checkConditionII(2.0, {fiber(1, kHalfRoot, 1, kHalfRoot, 1)});
    EXPECT_NEAR(r3.margin, 0.0, 1e-9);
    EXPECT_NEAR(r3.witness.x, 0.0, 1e-6);
    EXPECT_EQ(r3.result, Tri::Fail);

    EXPECT_THROW(checkConditionII(2.0, {}), Error);
}

TEST(ConditionII, WitnessReproducible) {
    const std::vector<FiberPoint> fps{fiber(2, 1, 2, 1, 1), fiber(1, cplx(0, 1.2), 2, 0.5, -0.4)};
    const auto r = checkConditionII(2.0, fps);
    if (!r.witness.inTail) {
        EXPECT_NEAR(std::abs(symbolN(fps[r.witness.fiber], 2.0, r.witness.x)), r.margin, 1e-15);
    }
    for (const auto& m : r.perFiber) EXPECT_LE(m.certified, m.witness.value + 1e-15);
}

TEST(ConditionII, LipschitzBoundHolds) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 0; n < 20; ++n) {
        const auto fp = fiber({u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, u(rng));
        const double p = 1.5 + std::abs(u(rng));
        const double lip = symbolLipschitz(fp, p);
        for (double x = -8.0; x < 8.0; x += 0.013) {
            const double dx = 1e-3;
            EXPECT_LE(std::abs(symbolN(fp, p, x + dx) - symbolN(fp, p, x)), lip * dx * (1.0 + 1e-9));
        }
    }
}

TEST(FredholmCheck, Examples) {
    const auto v1 = fredholmCheck(constantSIO(2, 1, 2, 1, 1));
    EXPECT_EQ(v1.overall, Overall::Fredholm);
    EXPECT_EQ(v1.plus.verdict, InvertibilityVerdict::FirstBranch);
    EXPECT_NEAR(v1.plus.lowerInf.value, 1.3935, 1e-4);
    EXPECT_NEAR(v1.condition2.margin, 1.3935, 1e-4);

    const auto v2 = fredholmCheck(constantSIO(1, kHalfRoot, 1, kHalfRoot, 1));
    EXPECT_EQ(v2.overall, Overall::NotFredholm);
    EXPECT_NEAR(v2.condition2.witness.x, 0.0, 1e-6);

    const auto v3 = fredholmCheck(constantSIO(1, 0, 1, 0, 1));
    EXPECT_EQ(v3.overall, Overall::Fredholm);
    EXPECT_NEAR(v3.condition2.margin, 1.0, 1e-12);
}

TEST(FredholmCheck, RejectsInvalidInstances) {
    EXPECT_THROW(ShiftedSIO(SOFunction::parse("sin(log(t))"), SOFunction::constant(0), SOFunction::constant(1),
                            SOFunction::constant(0), SOSShift(SOFunction::constant(1)), 2.0),
                 InvalidInstanceError);
    EXPECT_THROW(constantSIO(1, 0, 1, 0, 1, 0.9), Error);
}

TEST(FredholmCheck, SlowlyOscillatingInstance) {
    const ShiftedSIO op(SOFunction::parse("2+sin(log(log(t)))", Domain{std::exp(1.0), kInf}), SOFunction::constant(1),
                        SOFunction::constant(2), SOFunction::constant(1), SOSShift(SOFunction::constant(1)), 2.0);
    const auto v = fredholmCheck(op);
    EXPECT_EQ(v.overall, Overall::Fredholm);
    EXPECT_FALSE(v.condition2.exactFibers);
    EXPECT_GT(v.fibersInf.size(), 10u);
}

TEST(Sap, Examples) {
    const SapSymbol one{[](double) { return cplx(1.0); }, {{1.0, 0.0}}, {{1.0, 0.0}}, 0.0, 2.0 * kPi};
    const auto r1 = sapInvertible(one);
    EXPECT_TRUE(r1.invertible);
    EXPECT_NEAR(r1.margin, 1.0, 1e-15);

    const auto r2 = sapInvertible(sapSymbolOf(fiber(2, 1, 2, 1, 1), 2.0));
    EXPECT_TRUE(r2.invertible);
    EXPECT_NEAR(r2.margin, kMargin, 1e-9);

    const auto r3 = sapInvertible(sapSymbolOf(fiber(1, kHalfRoot, 1, kHalfRoot, 1), 2.0));
    EXPECT_FALSE(r3.invertible);
    EXPECT_NEAR(r3.margin, 0.0, 1e-9);
}

TEST(Sap, APInfimum) {
    EXPECT_EQ(apInfimum({}).value, 0.0);
    EXPECT_EQ(apInfimum({{cplx(0, 2), 3.0}}).value, 2.0);
    EXPECT_NEAR(apInfimum({{2.0, 0.0}, {-1.0, 1.0}}).value, 1.0, 1e-15);
    EXPECT_NEAR(apInfimum({{1.0, 0.0}, {1.0, 0.0}}).value, 2.0, 1e-15);
    const auto three = apInfimum({{3.0, 0.0}, {1.0, 1.0}, {1.0, std::sqrt(2.0)}});
    EXPECT_FALSE(three.exact);
    EXPECT_NEAR(three.value, 1.0, 1e-3);
}

TEST(Property, ConditionOneMatchesTailSign) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> mag(0.1, 3.0), ph(-kPi, kPi), om(-2.0, 2.0), pd(1.3, 4.0);
    int checked = 0;
    for (int n = 0; n < 50; ++n) {
        const cplx a = std::polar(mag(rng), ph(rng)), b = std::polar(mag(rng), ph(rng));
        const cplx c = std::polar(mag(rng), ph(rng)), d = std::polar(mag(rng), ph(rng));
        double w = om(rng);
        if (std::abs(w) < 0.05) w = 0.5;
        const double p = pd(rng);
        const auto v = fredholmCheck(constantSIO(a, b, c, d, w, p));
        EXPECT_EQ(v.plus.verdict, analyticBranch(a, b, w, p));
        EXPECT_EQ(v.minus.verdict, analyticBranch(c, d, w, p));
        const auto t = symbolTailBound(fiber(a, b, c, d, w), p, 8.0);
        EXPECT_NEAR(t.circlePlus, std::abs(std::abs(a) - std::abs(b) * std::exp(-w / p)), 1e-12);
        ++checked;
    }
    EXPECT_EQ(checked, 50);
}

TEST(Property, ConjugationSimilarity) {
    const LogGrid g = LogGrid::symmetric(16.0, 14);
    struct Case {
        cplx a, b, c, d;
        double omega;
    };
    for (const Case& k : {Case{2, 1, 2, 1, 1}, Case{1, cplx(0.5, 0.5), 3, 1, std::log(2.0)}, Case{cplx(0, 1), 2, 1, 0, 0.7}}) {
        const auto fp = fiber(k.a, k.b, k.c, k.d, k.omega);
        const auto u = logGaussian(g, 0.2, 1.0, 0.5);
        const auto direct = applySIO(SIOCoefficients::constant(2.0, k.a, k.b, k.c, k.d, k.omega), u);
        const auto viaSymbol = coApply(MellinSymbol::callable([&](double x) { return symbolN(fp, 2.0, x); }), u);
        EXPECT_LT((direct - viaSymbol).normP(2.0) / u.normP(2.0), 1e-5);
    }
}

TEST(Property, RefinementNeverFlipsDefiniteVerdicts) {
    std::vector<ShiftedSIO> ops{constantSIO(2, 1, 2, 1, 1), constantSIO(1, kHalfRoot, 1, kHalfRoot, 1),
                                constantSIO(1, 3, 1, 3, 1),
                                ShiftedSIO(SOFunction::parse("2+sin(log(log(t)))", Domain{std::exp(1.0), kInf}),
                                           SOFunction::constant(1), SOFunction::constant(2), SOFunction::constant(1),
                                           SOSShift(SOFunction::constant(1)), 2.0)};
    FredholmConfig fine;
    fine.funcops.fiber.samples *= 2;
    fine.condition2.delta /= 2.0;
    for (const auto& op : ops) {
        const auto coarse = fredholmCheck(op).overall, refined = fredholmCheck(op, fine).overall;
        if (coarse != Overall::Inconclusive && refined != Overall::Inconclusive) {
            EXPECT_EQ(coarse, refined);
        }
    }
}
