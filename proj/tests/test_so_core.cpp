#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sioshift/so_core.hpp"

using namespace sioshift;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

/// Diameter of {sin(u) : u in [lo, hi]} from the range of sin on the interval.
double sinRangeDiameter(double lo, double hi) {
    double mx = std::max(std::sin(lo), std::sin(hi)), mn = std::min(std::sin(lo), std::sin(hi));
    const double pi = std::acos(-1.0);
    for (double k = std::ceil((lo - pi / 2) / (2 * pi)); pi / 2 + 2 * pi * k <= hi; ++k) mx = 1.0;
    for (double k = std::ceil((lo + pi / 2) / (2 * pi)); -pi / 2 + 2 * pi * k <= hi; ++k) mn = -1.0;
    return mx - mn;
}

SOFunction sinLogLog() { return SOFunction::parse("2+sin(log(log(t)))", Domain{std::exp(1.0), kInf}); }

}  // namespace

TEST(OscillationModulus, ConstantIsZero) {
    const auto f = SOFunction::constant(7.0);
    for (double r : {1e-5, 1.0, 1e8}) EXPECT_EQ(oscillationModulus(f, 0.5, r), 0.0);
}

TEST(OscillationModulus, SinLogPlateaus) {
    const auto f = SOFunction::parse("sin(log(t))");
    const double m = oscillationModulusLog(f, 0.5, 10.0);
    EXPECT_NEAR(m, sinRangeDiameter(10.0 - std::log(2.0), 10.0), 1e-4);
    EXPECT_NEAR(oscillationModulusLog(f, 0.5, 1000.0), sinRangeDiameter(1000.0 - std::log(2.0), 1000.0), 1e-4);
    EXPECT_GT(oscillationModulusLog(f, 0.5, 1000.0), 0.1);
}

TEST(OscillationModulus, SinLogLogShrinks) {
    const auto f = SOFunction::parse("sin(log(log(t)))", Domain{std::exp(1.0), kInf});
    for (double logR : {10.0, 100.0, std::exp(10.0)}) {
        const double oracle = sinRangeDiameter(std::log(logR - std::log(2.0)), std::log(logR));
        EXPECT_NEAR(oscillationModulusLog(f, 0.5, logR), oracle, 1e-6);
    }
    EXPECT_LT(oscillationModulusLog(f, 0.5, 100.0), oscillationModulusLog(f, 0.5, 10.0));
    EXPECT_LE(oscillationModulusLog(f, 0.5, std::exp(10.0)), std::log(2.0) / std::exp(10.0) * 1.001);
}

TEST(OscillationModulus, DomainErrors) {
    const auto f = sinLogLog();
    EXPECT_THROW(oscillationModulus(f, 0.5, 1.0), DomainError);
    EXPECT_THROW(oscillationModulus(f, 1.5, 100.0), Error);
}

TEST(VerifySO, Examples) {
    const auto c = verifySO(SOFunction::constant(3.0));
    EXPECT_TRUE(c.accepted);
    for (const auto& e : c.endpoints)
        for (const auto& s : e.trace) EXPECT_EQ(s.modulus, 0.0);

    const auto osc = verifySO(SOFunction::parse("sin(log(t))"));
    EXPECT_FALSE(osc.accepted);
    EXPECT_FALSE(osc.at(Endpoint::Zero).accepted);
    EXPECT_FALSE(osc.at(Endpoint::Infinity).accepted);

    const auto sl = verifySO(sinLogLog());
    EXPECT_TRUE(sl.at(Endpoint::Infinity).accepted);
    EXPECT_FALSE(sl.at(Endpoint::Infinity).constantExtension);
    EXPECT_TRUE(sl.at(Endpoint::Zero).constantExtension);
}

TEST(VerifySO, NeedsEightGridPoints) {
    const std::vector<double> g{1, 2, 3};
    EXPECT_THROW(verifySOAt(sinLogLog(), Endpoint::Infinity, 0.5, g, 1e-2), Error);
}

TEST(VerifySO, DeclaredLimitContradictedByOscillation) {
    const auto f = SOFunction::parse("sin(log(t))").withLimit(Endpoint::Infinity, 0.0);
    EXPECT_FALSE(verifySO(f).at(Endpoint::Infinity).accepted);
}

TEST(FiberPoints, ConstantsGiveOnePointPerEndpoint) {
    const auto a = SOFunction::constant(2.0), b = SOFunction::constant(1.0), w = SOFunction::constant(1.0);
    for (Endpoint s : {Endpoint::Zero, Endpoint::Infinity}) {
        const auto fps = estimateFiberPoints({&a, &b, &a, &b, &w}, s);
        ASSERT_EQ(fps.size(), 1u);
        EXPECT_EQ(fps[0].a(), cplx(2.0));
        EXPECT_EQ(fps[0].b(), cplx(1.0));
        EXPECT_EQ(fps[0].omega(), 1.0);
        EXPECT_TRUE(fps[0].exact);
        EXPECT_EQ(fps[0].endpoint, s);
    }
}

TEST(FiberPoints, SinLogLogFillsInterval) {
    const auto a = sinLogLog(), one = SOFunction::constant(1.0);
    const FiberConfig cfg;
    const auto fps = estimateFiberPoints({&a, &one, &one, &one, &one}, Endpoint::Infinity, cfg);
    double lo = kInf, hi = -kInf;
    for (const auto& fp : fps) {
        lo = std::min(lo, fp.a().real());
        hi = std::max(hi, fp.a().real());
        EXPECT_LE(fp.clusterRadius, cfg.epsCluster);
        EXPECT_FALSE(fp.exact);
    }
    EXPECT_NEAR(lo, 1.0, 0.05);
    EXPECT_NEAR(hi, 3.0, 0.05);
}

TEST(FiberPoints, DeclaredLimitGivesSingleCluster) {
    const auto a = SOFunction::parse("3+1/log(t+2)").withLimit(Endpoint::Infinity, 3.0);
    const auto one = SOFunction::constant(1.0);
    const auto fps = estimateFiberPoints({&a, &one, &one, &one, &one}, Endpoint::Infinity);
    ASSERT_EQ(fps.size(), 1u);
    EXPECT_NEAR(std::abs(fps[0].a() - 3.0), 0.0, 1e-2);
}

TEST(FiberPoints, RejectsNonSO) {
    const auto a = SOFunction::parse("sin(log(t))"), one = SOFunction::constant(1.0);
    EXPECT_THROW(estimateFiberPoints({&a, &one, &one, &one, &one}, Endpoint::Infinity), NotSlowlyOscillatingError);
}

TEST(FiberPoints, RejectsImaginaryShiftExponent) {
    const auto one = SOFunction::constant(1.0), w = SOFunction::constant(cplx(1.0, 1.0));
    EXPECT_THROW(estimateFiberPoints({&one, &one, &one, &one, &w}, Endpoint::Infinity), Error);
}

TEST(Property, FiberValuesInsideSampledHull) {
    const auto a = sinLogLog();
    const auto b = SOFunction::parse("1+cos(log(log(t)))/2", Domain{std::exp(1.0), kInf});
    const auto one = SOFunction::constant(1.0);
    const FiberConfig cfg;
    const auto fps = estimateFiberPoints({&a, &b, &one, &one, &one}, Endpoint::Infinity, cfg);
    double aLo = kInf, aHi = -kInf, bLo = kInf, bHi = -kInf;
    for (int n = cfg.tailStart(); n <= cfg.samples; ++n) {
        const double X = cfg.sigma * n;
        aLo = std::min(aLo, a.atLog(X).real());
        aHi = std::max(aHi, a.atLog(X).real());
        bLo = std::min(bLo, b.atLog(X).real());
        bHi = std::max(bHi, b.atLog(X).real());
    }
    for (const auto& fp : fps) {
        EXPECT_GE(fp.a().real(), aLo);
        EXPECT_LE(fp.a().real(), aHi);
        EXPECT_GE(fp.b().real(), bLo);
        EXPECT_LE(fp.b().real(), bHi);
        for (double X : fp.sourceSequence) {
            std::array<cplx, 5> v{a.atLog(X), b.atLog(X), 1.0, 1.0, 1.0};
            EXPECT_LE(tupleDistance(v, fp.values), fp.clusterRadius + 1e-15);
        }
    }
}

TEST(Property, ModulusScaleInequality) {
    for (const char* src : {"sin(log(log(t)))", "atan(log(t))", "cos(sqrt(log(t)))"}) {
        const auto f = SOFunction::parse(src, Domain{std::exp(1.0), kInf});
        for (double logR : {3.0, 10.0, 50.0, 400.0}) {
            const double l = 0.5;
            const double whole = oscillationModulusLog(f, l * l, logR);
            const double parts = oscillationModulusLog(f, l, logR) + oscillationModulusLog(f, l, logR + std::log(l));
            EXPECT_LE(whole, parts * (1.0 + 1e-3) + 1e-12) << src << " " << logR;
        }
    }
}
