#pragma once
// Binomial functional operators A = aI - bW_alpha on L^p(R+): the tail
// quantities L_*, L^*, the two-branch invertibility decision and the
// truncated Neumann series for A^{-1}.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "loggrid.hpp"
#include "shifts.hpp"
#include "so_core.hpp"

namespace sioshift {

struct DecisionConfig {
    double tol = 1e-3;
    double exactTol = 1e-12;  ///< relative threshold for margins built from exact data
};

enum class Tri { Pass, Fail, Unknown };

/// Three-valued test of "v > 0". Sampled margins need |v| > tol either way;
/// exact margins fail definitively once v <= exactTol * scale.
inline Tri decidePositive(double v, bool exact, double scale, const DecisionConfig& cfg) {
    if (v > cfg.tol) return Tri::Pass;
    if (exact) return v <= cfg.exactTol * std::max(1.0, scale) ? Tri::Fail : Tri::Unknown;
    return v < -cfg.tol ? Tri::Fail : Tri::Unknown;
}

inline Tri allOf(std::initializer_list<Tri> ts) {
    bool unknown = false;
    for (Tri t : ts) {
        if (t == Tri::Fail) return Tri::Fail;
        if (t == Tri::Unknown) unknown = true;
    }
    return unknown ? Tri::Unknown : Tri::Pass;
}

struct FuncOpsConfig {
    FiberConfig fiber{};
    DecisionConfig decision{};
    int probeCount = 10001;
    int contractionProbeCount = 2001;
    int maxContractionSteps = 64;
    int maxTerms = 10000;
};

class BinomialOp {
public:
    BinomialOp(SOFunction a, SOFunction b, SOSShift shift, double p, const FiberConfig& fc = {})
        : a_(std::move(a)), b_(std::move(b)), shift_(std::move(shift)), p_(p) {
        if (!(p > 1.0) || !std::isfinite(p)) throw Error("p must lie in (1, inf)");
        for (const SOFunction* f : {&a_, &b_})
            if (!verifySO(*f, fc).accepted)
                throw NotSlowlyOscillatingError("'" + f->expr().str() + "' is not slowly oscillating");
    }

    const SOFunction& a() const { return a_; }
    const SOFunction& b() const { return b_; }
    const SOSShift& shift() const { return shift_; }
    double p() const { return p_; }

    /// |a| - |b| alpha'^{-1/p} at t = e^X.
    double g(double X) const {
        return std::abs(a_.atLog(X)) - std::abs(b_.atLog(X)) * std::pow(shift_.alphaPrimeAtLog(X), -1.0 / p_);
    }

    /// (aI - bW) f on samples f(e^x); shifted lookups outside the grid read zero.
    LogGridFunction apply(const LogGridFunction& f) const {
        LogGridFunction out(f.grid());
        for (std::size_t j = 0; j < f.size(); ++j) {
            const double x = f.grid().x(j);
            out[j] = a_.atLog(x) * f[j] - b_.atLog(x) * f.interpolate(shift_.logAlpha(x), OutOfGrid::Zero);
        }
        return out;
    }

private:
    SOFunction a_, b_;
    SOSShift shift_;
    double p_;
};

enum class LMode { LimInf, LimSup };

struct LStarEstimate {
    double value = 0.0;
    double witnessLogT = 0.0;
    bool exact = false;
    bool stabilized = true;
    std::optional<double> fiberValue;  ///< extremum over fiber points of |a| - |b| e^{-omega/p}
};

/// liminf / limsup of |a| - |b| alpha'^{-1/p} toward s, over the fiber tail
/// window, with the extremal sample refined by Brent's method.
inline LStarEstimate lStar(const BinomialOp& op, Endpoint s, LMode mode, const FuncOpsConfig& cfg = {},
                           const std::vector<FiberPoint>* fibers = nullptr) {
    LStarEstimate est;
    const double sign = mode == LMode::LimInf ? 1.0 : -1.0;
    const auto la = op.a().exactLimit(s), lb = op.b().exactLimit(s), lw = op.shift().omega().exactLimit(s);
    if (fibers && !fibers->empty()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& fp : *fibers) {
            const double v = std::abs(fp.a()) - std::abs(fp.b()) * std::exp(-fp.omega() / op.p());
            best = std::min(best, sign * v);
        }
        est.fiberValue = sign * best;
    }
    if (la && lb && lw) {
        est.exact = true;
        est.value = std::abs(*la) - std::abs(*lb) * std::exp(-lw->real() / op.p());
        est.witnessLogT = direction(s) * cfg.fiber.maxLog();
        return est;
    }
    const FiberConfig& fc = cfg.fiber;
    const double dir = direction(s);
    std::vector<double> X, v;
    for (int n = fc.tailStart(); n <= fc.samples; ++n) {
        X.push_back(dir * fc.sigma * n);
        v.push_back(sign * op.g(X.back()));
    }
    std::size_t k = 0;
    double runMin = std::numeric_limits<double>::infinity();
    double runMinAtLastQuarter = 0.0;
    const std::size_t quarter = v.size() - v.size() / 4;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < runMin) {
            runMin = v[i];
            k = i;
        }
        if (i + 1 == quarter) runMinAtLastQuarter = runMin;
    }
    est.stabilized = runMinAtLastQuarter - runMin <= cfg.decision.tol;
    double best = v[k], bestX = X[k];
    const double lo = std::min(X[k > 0 ? k - 1 : k], X[k + 1 < X.size() ? k + 1 : k]);
    const double hi = std::max(X[k > 0 ? k - 1 : k], X[k + 1 < X.size() ? k + 1 : k]);
    if (hi > lo) {
        auto r = boost::math::tools::brent_find_minima([&](double x) { return sign * op.g(x); }, lo, hi, 50);
        if (r.second < best) {
            best = r.second;
            bestX = r.first;
        }
    }
    est.value = sign * best;
    est.witnessLogT = bestX;
    return est;
}

struct InfEstimate {
    double value = 0.0;
    double witnessLogT = 0.0;
    bool exact = false;
};

/// inf over the probe grid |log t| <= maxLog of |f|, refined by Brent.
inline InfEstimate infAbs(const SOFunction& f, const FuncOpsConfig& cfg = {}) {
    if (f.isConstant()) return {std::abs(f.atLog(0.0)), 0.0, true};
    const int n = cfg.probeCount;
    const double R = cfg.fiber.maxLog();
    auto X = [&](int k) { return -R + 2.0 * R * k / (n - 1); };
    int best = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const double v = std::abs(f.atLog(X(k)));
        if (v < bv) {
            bv = v;
            best = k;
        }
    }
    const double lo = X(std::max(best - 1, 0)), hi = X(std::min(best + 1, n - 1));
    auto r = boost::math::tools::brent_find_minima([&](double x) { return std::abs(f.atLog(x)); }, lo, hi, 50);
    if (r.second < bv) return {r.second, r.first, false};
    return {bv, X(best), false};
}

enum class InvertibilityVerdict { FirstBranch, SecondBranch, NotInvertible, Inconclusive };

inline const char* toString(InvertibilityVerdict v) {
    switch (v) {
        case InvertibilityVerdict::FirstBranch: return "invertible-first-branch";
        case InvertibilityVerdict::SecondBranch: return "invertible-second-branch";
        case InvertibilityVerdict::NotInvertible: return "not-invertible";
        case InvertibilityVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

inline bool isInvertible(InvertibilityVerdict v) {
    return v == InvertibilityVerdict::FirstBranch || v == InvertibilityVerdict::SecondBranch;
}

/// ||T^n|| <= scale * factor^{floor(n / steps)} for the iterated operator.
struct ContractionBound {
    double factor = 0.0;
    int steps = 1;
    double scale = 1.0;
};

struct InvertibilityReport {
    InvertibilityVerdict verdict = InvertibilityVerdict::Inconclusive;
    InfEstimate infAbsA, infAbsB;
    LStarEstimate lowerZero, lowerInf, upperZero, upperInf;
    Tri firstBranch = Tri::Unknown, secondBranch = Tri::Unknown;
    std::optional<ContractionBound> contraction;
    std::vector<std::string> warnings;
};

namespace detail {

/// Smallest k with sup over the probe grid of prod_{j<k} m(alpha_j(X)) < 1.
template <class M>
std::optional<ContractionBound> contractionAlongOrbits(const SOSShift& sh, M&& m, const FuncOpsConfig& cfg) {
    const int n = cfg.contractionProbeCount;
    const double R = cfg.fiber.maxLog();
    std::vector<double> X(static_cast<std::size_t>(n)), prod(static_cast<std::size_t>(n), 1.0);
    for (int k = 0; k < n; ++k) X[static_cast<std::size_t>(k)] = -R + 2.0 * R * k / (n - 1);
    double scale = 1.0;
    for (int steps = 1; steps <= cfg.maxContractionSteps; ++steps) {
        double sup = 0.0;
        for (std::size_t k = 0; k < X.size(); ++k) {
            prod[k] *= m(X[k]);
            X[k] = sh.logAlpha(X[k]);
            sup = std::max(sup, prod[k]);
        }
        if (sup < 1.0) return ContractionBound{sup, steps, scale};
        scale = std::max(scale, sup);
    }
    return std::nullopt;
}

}  // namespace detail

/// Two-branch invertibility test for aI - bW_alpha.
inline InvertibilityReport checkInvertibility(const BinomialOp& op, const FuncOpsConfig& cfg = {},
                                              const std::vector<FiberPoint>* fibersZero = nullptr,
                                              const std::vector<FiberPoint>* fibersInf = nullptr) {
    InvertibilityReport r;
    const auto& dc = cfg.decision;
    r.infAbsA = infAbs(op.a(), cfg);
    r.infAbsB = infAbs(op.b(), cfg);
    r.lowerZero = lStar(op, Endpoint::Zero, LMode::LimInf, cfg, fibersZero);
    r.lowerInf = lStar(op, Endpoint::Infinity, LMode::LimInf, cfg, fibersInf);
    r.upperZero = lStar(op, Endpoint::Zero, LMode::LimSup, cfg, fibersZero);
    r.upperInf = lStar(op, Endpoint::Infinity, LMode::LimSup, cfg, fibersInf);

    auto scaleAt = [&](Endpoint s) {
        double sc = 0.0;
        for (const SOFunction* f : {&op.a(), &op.b()})
            if (auto l = f->exactLimit(s)) sc += std::abs(*l);
        return sc;
    };
    auto decideL = [&](const LStarEstimate& e, double sgn, Endpoint s, const char* name) {
        if (!e.stabilized) {
            r.warnings.push_back(std::string(name) + " tail not stabilized");
            return Tri::Unknown;
        }
        return decidePositive(sgn * e.value, e.exact, scaleAt(s), dc);
    };
    r.firstBranch = allOf({decidePositive(r.infAbsA.value, r.infAbsA.exact, r.infAbsA.value, dc),
                           decideL(r.lowerZero, 1.0, Endpoint::Zero, "L_*(0)"),
                           decideL(r.lowerInf, 1.0, Endpoint::Infinity, "L_*(inf)")});
    r.secondBranch = allOf({decidePositive(r.infAbsB.value, r.infAbsB.exact, r.infAbsB.value, dc),
                            decideL(r.upperZero, -1.0, Endpoint::Zero, "L^*(0)"),
                            decideL(r.upperInf, -1.0, Endpoint::Infinity, "L^*(inf)")});
    if (r.firstBranch == Tri::Pass && r.secondBranch == Tri::Pass)
        throw Error("both invertibility branches hold; margins are inconsistent");

    const double p = op.p();
    const auto& sh = op.shift();
    if (r.firstBranch == Tri::Pass) {
        r.contraction = detail::contractionAlongOrbits(
            sh,
            [&](double X) {
                return std::abs(op.b().atLog(X) / op.a().atLog(X)) * std::pow(sh.alphaPrimeAtLog(X), -1.0 / p);
            },
            cfg);
        r.verdict = InvertibilityVerdict::FirstBranch;
    } else if (r.secondBranch == Tri::Pass) {
        r.contraction = detail::contractionAlongOrbits(
            sh,
            [&](double X) {
                return std::abs(op.a().atLog(X) / op.b().atLog(X)) * std::pow(sh.alphaPrimeAtLog(X), 1.0 / p);
            },
            cfg);
        r.verdict = InvertibilityVerdict::SecondBranch;
    } else if (r.firstBranch == Tri::Fail && r.secondBranch == Tri::Fail) {
        r.verdict = InvertibilityVerdict::NotInvertible;
    } else {
        r.verdict = InvertibilityVerdict::Inconclusive;
    }
    if (isInvertible(r.verdict) && !r.contraction) {
        r.warnings.push_back("no contraction within " + std::to_string(cfg.maxContractionSteps) + " steps");
        r.verdict = InvertibilityVerdict::Inconclusive;
    }
    return r;
}

struct NeumannResult {
    LogGridFunction value;
    int terms = 0;
    double tailBound = 0.0;
};

/// A^{-1} f by the branch's Neumann series, truncated once the tail bound
/// scale * k * factor^{floor(N/k)} ||y_0|| / (1 - factor) is within budget.
inline NeumannResult applyNeumannInverse(const BinomialOp& op, const InvertibilityReport& rep,
                                         const LogGridFunction& f, double errBudget, const FuncOpsConfig& cfg = {}) {
    if (!isInvertible(rep.verdict) || !rep.contraction) throw NotInvertibleError("operator is not known to be invertible");
    const auto& g = f.grid();
    const double p = op.p();
    const bool first = rep.verdict == InvertibilityVerdict::FirstBranch;
    const auto& sh = op.shift();
    const std::size_t n = f.size();

    std::vector<double> target(n);
    std::vector<cplx> mult(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = g.x(j);
        if (first) {
            target[j] = sh.logAlpha(x);
            mult[j] = op.b().atLog(x) / op.a().atLog(x);
        } else {
            target[j] = sh.logBeta(x);
            mult[j] = op.a().atLog(target[j]) / op.b().atLog(target[j]);
        }
    }

    // y_0 = a^{-1} f, or -W^{-1} b^{-1} f for the second branch.
    LogGridFunction y(g);
    for (std::size_t j = 0; j < n; ++j) y[j] = f[j] / (first ? op.a() : op.b()).atLog(g.x(j));
    if (!first) {
        LogGridFunction fb = y;
        for (std::size_t j = 0; j < n; ++j) y[j] = -fb.interpolate(target[j], OutOfGrid::Zero);
    }

    const auto& c = *rep.contraction;
    const double y0 = y.normPHalfLine(p);
    int N = 0;
    auto tail = [&](int m) {
        return c.scale * c.steps * std::pow(c.factor, std::floor(static_cast<double>(m) / c.steps)) * y0 /
               (1.0 - c.factor);
    };
    while (tail(N) > errBudget) {
        if (++N > cfg.maxTerms) throw BudgetError("Neumann series needs more than " + std::to_string(cfg.maxTerms) + " terms");
    }

    const double edgeTol = 1e-2 * errBudget;
    LogGridFunction sum = y;
    for (int term = 1; term < N; ++term) {
        LogGridFunction next(g);
        for (std::size_t j = 0; j < n; ++j) next[j] = mult[j] * y.interpolate(target[j], OutOfGrid::Zero);
        auto edgeMass = [&](bool left) {
            double m = 0.0;
            for (std::size_t k = 0; k < 8 && k < n; ++k) {
                const std::size_t j = left ? k : n - 1 - k;
                m = std::max(m, std::abs(next[j]) * std::exp(g.x(j) / p));
            }
            return m;
        };
        if (edgeMass(true) > edgeTol || edgeMass(false) > edgeTol)
            throw GridExhaustedError("Neumann iterate " + std::to_string(term) + " reaches the grid edge");
        y = std::move(next);
        sum += y;
    }
    return {std::move(sum), N, tail(N)};
}

}  // namespace sioshift
