#pragma once
// Fredholm test for N = (aI - bW)P+ + (cI - dW)P- on L^p(R+): invertibility of
// aI - bW and cI - dW, and non-vanishing of the fiber symbols
//   n(x) = [a - b e^{i omega (x + i/p)}] (1 + coth pi(x + i/p))/2
//        + [c - d e^{i omega (x + i/p)}] (1 - coth pi(x + i/p))/2.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "funcops.hpp"
#include "mellin.hpp"
#include "operators.hpp"
#include "shifts.hpp"
#include "so_core.hpp"

namespace sioshift {

class ShiftedSIO {
public:
    ShiftedSIO(SOFunction a, SOFunction b, SOFunction c, SOFunction d, SOSShift shift, double p,
               const FiberConfig& fc = {})
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), shift_(std::move(shift)), p_(p) {
        conjugateExponent(p);
        static constexpr const char* names[] = {"a", "b", "c", "d"};
        const SOFunction* fs[] = {&a_, &b_, &c_, &d_};
        for (int k = 0; k < 4; ++k)
            if (!verifySO(*fs[k], fc).accepted)
                throw InvalidInstanceError(std::string("coefficient ") + names[k] + " = '" + fs[k]->expr().str() +
                                           "' is not slowly oscillating");
    }

    const SOFunction& a() const { return a_; }
    const SOFunction& b() const { return b_; }
    const SOFunction& c() const { return c_; }
    const SOFunction& d() const { return d_; }
    const SOSShift& shift() const { return shift_; }
    double p() const { return p_; }

    CoefficientTuple tuple() const { return {&a_, &b_, &c_, &d_, &shift_.omega()}; }

    BinomialOp plusOperator(const FiberConfig& fc = {}) const { return BinomialOp(a_, b_, shift_, p_, fc); }
    BinomialOp minusOperator(const FiberConfig& fc = {}) const { return BinomialOp(c_, d_, shift_, p_, fc); }

    /// Coefficients in x = log t for the grid realisation of N.
    SIOCoefficients coefficients() const {
        return {p_,
                [f = a_](double x) { return f.atLog(x); },
                [f = b_](double x) { return f.atLog(x); },
                [f = c_](double x) { return f.atLog(x); },
                [f = d_](double x) { return f.atLog(x); },
                [s = shift_](double x) { return s.omegaAtLog(x); },
                shift_.bounds().supAbsOmega};
    }

private:
    SOFunction a_, b_, c_, d_;
    SOSShift shift_;
    double p_;
};

/// n at the fiber point, real x.
inline cplx symbolN(const FiberPoint& fp, double p, double x) {
    const cplx h = symbolPlusHalf(p, x);
    const cplx e = std::exp(cplx(-fp.omega() / p, fp.omega() * x));
    return (fp.a() - fp.b() * e) * h + (fp.c() - fp.d() * e) * (1.0 - h);
}

/// n at complex x (analytic continuation, used for Gauss-Newton polishing).
inline cplx symbolNComplex(const FiberPoint& fp, double p, cplx x) {
    const cplx w = kPi * (x + cplx(0.0, 1.0 / p));
    const cplx h = w.real() >= 0.0 ? 1.0 / (1.0 - std::exp(-2.0 * w)) : -std::exp(2.0 * w) / (1.0 - std::exp(2.0 * w));
    const cplx e = std::exp(cplx(0.0, fp.omega()) * (x + cplx(0.0, 1.0 / p)));
    return (fp.a() - fp.b() * e) * h + (fp.c() - fp.d() * e) * (1.0 - h);
}

struct TailBound {
    double plus = 0.0;   ///< lower bound of |n| on [X, inf)
    double minus = 0.0;  ///< lower bound of |n| on (-inf, -X]
    double circlePlus = 0.0, circleMinus = 0.0;  ///< inf over the limiting circle or point
    double correction = 0.0;
};

/// inf |r0 + r1 e^{i w x}| over x >= X: a circle when w != 0, a point when w = 0.
inline double apCircleInf(cplx r0, cplx r1, double w) {
    return w != 0.0 ? std::abs(std::abs(r0) - std::abs(r1)) : std::abs(r0 + r1);
}

inline TailBound symbolTailBound(const FiberPoint& fp, double p, double X) {
    if (X < 2.0) throw Error("tail bound needs X >= 2");
    const double damp = std::exp(-fp.omega() / p);
    TailBound t;
    t.circlePlus = apCircleInf(fp.a(), -fp.b() * damp, fp.omega());
    t.circleMinus = apCircleInf(fp.c(), -fp.d() * damp, fp.omega());
    const double C =
        2.0 * (std::abs(fp.a()) + std::abs(fp.b()) * damp + std::abs(fp.c()) + std::abs(fp.d()) * damp);
    t.correction = C * std::exp(-2.0 * kPi * X);
    t.plus = t.circlePlus - t.correction;
    t.minus = t.circleMinus - t.correction;
    return t;
}

/// Lipschitz constant of n on the real line.
inline double symbolLipschitz(const FiberPoint& fp, double p) {
    const double s = std::sin(kPi / p);
    const double H = 0.5 * (1.0 + 1.0 / s);
    const double dH = kPi / (2.0 * s * s);
    const double damp = std::exp(-fp.omega() / p);
    const double sum = std::abs(fp.a()) + std::abs(fp.c()) + (std::abs(fp.b()) + std::abs(fp.d())) * damp;
    return dH * sum + H * (std::abs(fp.b()) + std::abs(fp.d())) * std::abs(fp.omega()) * damp;
}

/// Scale of the symbol's data, for exact-zero thresholds.
inline double symbolScale(const FiberPoint& fp, double p) {
    const double damp = std::exp(-fp.omega() / p);
    return std::abs(fp.a()) + std::abs(fp.c()) + (std::abs(fp.b()) + std::abs(fp.d())) * damp;
}

struct ConditionIIConfig {
    double X = 8.0;
    double delta = 1.0 / 256.0;
    int refineMinima = 8;  ///< local grid minima refined per fiber
    DecisionConfig decision{};
};

struct SymbolWitness {
    std::size_t fiber = 0;
    double x = 0.0;
    double value = std::numeric_limits<double>::infinity();
    bool inTail = false;
};

struct FiberSymbolMinimum {
    SymbolWitness witness;
    double gridMin = 0.0;
    double lipschitz = 0.0;
    double delta = 0.0;
    TailBound tail;
    double certified = 0.0;  ///< min(gridMin - Lip delta / 2, tail bounds)
};

struct ConditionIIReport {
    Tri result = Tri::Unknown;
    double margin = 0.0;     ///< smallest refined |n| (or tail circle) over all fibers
    double certified = 0.0;  ///< guaranteed lower bound on the sampled fibers
    SymbolWitness witness;
    bool exactFibers = true;
    std::vector<FiberSymbolMinimum> perFiber;
};

namespace detail {

/// Brent on |n|^2 followed by Gauss-Newton, so exact zeros reach rounding level.
inline std::pair<double, double> refineSymbolMin(const FiberPoint& fp, double p, double lo, double hi) {
    auto f2 = [&](double x) { return std::norm(symbolN(fp, p, x)); };
    auto r = boost::math::tools::brent_find_minima(f2, lo, hi, 52);
    double x = r.first, v = std::abs(symbolN(fp, p, x));
    for (int it = 0; it < 8 && v > 0.0; ++it) {
        const double dh = 1e-6;
        const cplx d = (symbolNComplex(fp, p, x + dh) - symbolNComplex(fp, p, x - dh)) / (2.0 * dh);
        const double den = std::norm(d);
        if (den == 0.0) break;
        const double xn = std::clamp(x - std::real(symbolN(fp, p, x) * std::conj(d)) / den, lo, hi);
        const double vn = std::abs(symbolN(fp, p, xn));
        if (!(vn < v)) break;
        x = xn;
        v = vn;
    }
    return {x, v};
}

}  // namespace detail

inline FiberSymbolMinimum symbolMinimum(const FiberPoint& fp, double p, const ConditionIIConfig& cfg) {
    FiberSymbolMinimum m;
    m.lipschitz = symbolLipschitz(fp, p);
    m.delta = cfg.delta;
    std::vector<double> v;
    std::size_t n = 0;
    auto sampleGrid = [&] {
        n = static_cast<std::size_t>(std::ceil(2.0 * cfg.X / m.delta)) + 1;
        v.resize(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = std::abs(symbolN(fp, p, -cfg.X + m.delta * static_cast<double>(j)));
        m.gridMin = *std::min_element(v.begin(), v.end());
    };
    sampleGrid();
    // The coarse grid suffices once it certifies the margin; otherwise refine
    // until the discretisation error is below tol / 10.
    if (m.gridMin - m.lipschitz * m.delta / 2.0 <= cfg.decision.tol) {
        while (m.lipschitz * m.delta / 2.0 >= cfg.decision.tol / 10.0 && 2.0 * cfg.X / m.delta < (1 << 22))
            m.delta /= 2.0;
        if (m.delta != cfg.delta) sampleGrid();
    }

    // Local minima, smallest first.
    std::vector<std::size_t> mins;
    for (std::size_t j = 0; j < n; ++j)
        if ((j == 0 || v[j] <= v[j - 1]) && (j + 1 == n || v[j] <= v[j + 1])) mins.push_back(j);
    std::sort(mins.begin(), mins.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    if (mins.size() > static_cast<std::size_t>(cfg.refineMinima)) mins.resize(static_cast<std::size_t>(cfg.refineMinima));
    m.witness.value = std::numeric_limits<double>::infinity();
    for (std::size_t j : mins) {
        const double x = -cfg.X + m.delta * static_cast<double>(j);
        const double lo = std::max(-cfg.X, x - m.delta), hi = std::min(cfg.X, x + m.delta);
        auto [xr, vr] = detail::refineSymbolMin(fp, p, lo, hi);
        if (v[j] < vr) {
            xr = x;
            vr = v[j];
        }
        if (vr < m.witness.value) m.witness = {0, xr, vr, false};
    }

    m.tail = symbolTailBound(fp, p, cfg.X);
    if (m.tail.circlePlus < m.witness.value) m.witness = {0, cfg.X, m.tail.circlePlus, true};
    if (m.tail.circleMinus < m.witness.value) m.witness = {0, -cfg.X, m.tail.circleMinus, true};
    m.certified = std::min({m.gridMin - m.lipschitz * m.delta / 2.0, m.tail.plus, m.tail.minus});
    return m;
}

/// Condition (ii) over the sampled fiber points.
inline ConditionIIReport checkConditionII(double p, const std::vector<FiberPoint>& fibers,
                                          const ConditionIIConfig& cfg = {}) {
    ConditionIIReport r;
    r.margin = std::numeric_limits<double>::infinity();
    r.certified = std::numeric_limits<double>::infinity();
    bool definiteZero = false;
    for (std::size_t i = 0; i < fibers.size(); ++i) {
        const auto& fp = fibers[i];
        if (!fp.exact) r.exactFibers = false;
        auto m = symbolMinimum(fp, p, cfg);
        m.witness.fiber = i;
        if (m.witness.value < r.margin) {
            r.margin = m.witness.value;
            r.witness = m.witness;
        }
        r.certified = std::min(r.certified, m.certified);
        if (fp.exact && m.witness.value <= cfg.decision.exactTol * std::max(1.0, symbolScale(fp, p))) definiteZero = true;
        r.perFiber.push_back(m);
    }
    if (fibers.empty()) throw Error("condition (ii) needs fiber points");
    if (r.certified > cfg.decision.tol)
        r.result = Tri::Pass;
    else if (definiteZero)
        r.result = Tri::Fail;
    else
        r.result = Tri::Unknown;
    return r;
}

enum class Overall { Fredholm, NotFredholm, Inconclusive };

inline const char* toString(Overall o) {
    switch (o) {
        case Overall::Fredholm: return "fredholm";
        case Overall::NotFredholm: return "not-fredholm";
        case Overall::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct FredholmConfig {
    FuncOpsConfig funcops{};
    ConditionIIConfig condition2{};
};

struct FredholmVerdict {
    Overall overall = Overall::Inconclusive;
    InvertibilityReport plus, minus;
    ConditionIIReport condition2;
    std::vector<FiberPoint> fibersZero, fibersInf;
    std::vector<std::string> warnings;

    /// Fiber by global index: zero-endpoint fibers first.
    const FiberPoint& fiber(std::size_t i) const {
        return i < fibersZero.size() ? fibersZero[i] : fibersInf[i - fibersZero.size()];
    }
};

inline FredholmVerdict fredholmCheck(const ShiftedSIO& op, const FredholmConfig& cfg = {}) {
    FredholmVerdict v;
    try {
        v.fibersZero = estimateFiberPoints(op.tuple(), Endpoint::Zero, cfg.funcops.fiber);
        v.fibersInf = estimateFiberPoints(op.tuple(), Endpoint::Infinity, cfg.funcops.fiber);
    } catch (const NotSlowlyOscillatingError& e) {
        throw InvalidInstanceError(e.what());
    }
    v.plus = checkInvertibility(op.plusOperator(cfg.funcops.fiber), cfg.funcops, &v.fibersZero, &v.fibersInf);
    v.minus = checkInvertibility(op.minusOperator(cfg.funcops.fiber), cfg.funcops, &v.fibersZero, &v.fibersInf);
    std::vector<FiberPoint> all = v.fibersZero;
    all.insert(all.end(), v.fibersInf.begin(), v.fibersInf.end());
    v.condition2 = checkConditionII(op.p(), all, cfg.condition2);

    if (op.shift().bounds().interiorFixedPoint) v.warnings.push_back("shift has a sampled interior fixed point");
    if (!v.condition2.exactFibers)
        v.warnings.push_back("fiber coverage is sampled (" + std::to_string(all.size()) + " fiber points)");
    for (const auto* r : {&v.plus, &v.minus})
        for (const auto& w : r->warnings) v.warnings.push_back(w);

    const bool invertible = isInvertible(v.plus.verdict) && isInvertible(v.minus.verdict);
    const bool notInvertible = v.plus.verdict == InvertibilityVerdict::NotInvertible ||
                               v.minus.verdict == InvertibilityVerdict::NotInvertible;
    if (invertible && v.condition2.result == Tri::Pass)
        v.overall = Overall::Fredholm;
    else if (notInvertible || v.condition2.result == Tri::Fail)
        v.overall = Overall::NotFredholm;
    else
        v.overall = Overall::Inconclusive;
    return v;
}

// ---------------------------------------------------------------------------
// Semi-almost-periodic symbols

/// Continuous middle part with almost periodic polynomials as limits at
/// +-infinity; |sym(x) - tail(x)| <= tailConstant e^{-tailRate |x|} there.
struct SapSymbol {
    std::function<cplx(double)> middle;
    std::vector<APTerm> plusTail, minusTail;
    double tailConstant = 0.0;
    double tailRate = 2.0 * kPi;
};

inline SapSymbol sapSymbolOf(const FiberPoint& fp, double p) {
    const double damp = std::exp(-fp.omega() / p);
    return {[fp, p](double x) { return symbolN(fp, p, x); },
            {{fp.a(), 0.0}, {-fp.b() * damp, fp.omega()}},
            {{fp.c(), 0.0}, {-fp.d() * damp, fp.omega()}},
            2.0 * symbolScale(fp, p),
            2.0 * kPi};
}

struct APInf {
    double value = 0.0;
    bool exact = true;
};

/// inf over x of |sum r e^{i lambda x}|: closed form for up to two distinct
/// frequencies, dense sampling otherwise.
inline APInf apInfimum(const std::vector<APTerm>& terms) {
    std::vector<APTerm> merged;
    for (const auto& t : terms) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const APTerm& m) { return m.freq == t.freq; });
        if (it != merged.end())
            it->coeff += t.coeff;
        else
            merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(), [](const APTerm& t) { return t.coeff == cplx{}; }),
                 merged.end());
    if (merged.empty()) return {0.0, true};
    if (merged.size() == 1) return {std::abs(merged[0].coeff), true};
    if (merged.size() == 2) return {std::abs(std::abs(merged[0].coeff) - std::abs(merged[1].coeff)), true};
    double minFreq = std::numeric_limits<double>::infinity();
    for (const auto& t : merged)
        if (t.freq != 0.0) minFreq = std::min(minFreq, std::abs(t.freq));
    double best = std::numeric_limits<double>::infinity();
    const double span = 2.0 * kPi / minFreq * 64.0;
    for (int k = 0; k <= 200000; ++k) {
        const double x = span * k / 200000.0;
        cplx acc{};
        for (const auto& t : merged) acc += t.coeff * std::exp(cplx(0.0, t.freq * x));
        best = std::min(best, std::abs(acc));
    }
    return {best, false};
}

struct SapResult {
    bool invertible = false;
    double margin = 0.0;
    double witnessX = 0.0;
};

/// inf over R of |sym|: grid minimum on [-X, X] and the tail infima.
inline SapResult sapInvertible(const SapSymbol& sym, double X = 8.0, double delta = 1.0 / 256.0,
                               const DecisionConfig& dc = {}) {
    SapResult r;
    r.margin = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * X / delta)) + 1;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = -X + delta * static_cast<double>(j);
        const double v = std::abs(sym.middle(x));
        if (v < r.margin) {
            r.margin = v;
            r.witnessX = x;
        }
    }
    {
        const double lo = r.witnessX - delta, hi = r.witnessX + delta;
        auto b = boost::math::tools::brent_find_minima([&](double x) { return std::norm(sym.middle(x)); }, lo, hi, 52);
        const double v = std::sqrt(b.second);
        if (v < r.margin) {
            r.margin = v;
            r.witnessX = b.first;
        }
    }
    const double corr = sym.tailConstant * std::exp(-sym.tailRate * X);
    const double tp = apInfimum(sym.plusTail).value - corr, tm = apInfimum(sym.minusTail).value - corr;
    if (tp < r.margin) {
        r.margin = std::max(tp, 0.0);
        r.witnessX = X;
    }
    if (tm < r.margin) {
        r.margin = std::max(tm, 0.0);
        r.witnessX = -X;
    }
    r.invertible = r.margin > dc.tol;
    return r;
}

}  // namespace sioshift
