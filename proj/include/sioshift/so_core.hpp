#pragma once
// Slowly oscillating functions on R+ and sampled joint partial limits at the
// endpoints 0 and infinity.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exprdsl.hpp"

namespace sioshift {

enum class Endpoint { Zero, Infinity };

inline const char* toString(Endpoint s) { return s == Endpoint::Zero ? "0" : "inf"; }
inline double direction(Endpoint s) { return s == Endpoint::Zero ? -1.0 : 1.0; }

struct Domain {
    double tMin = 0.0;
    double tMax = std::numeric_limits<double>::infinity();
};

/// Bounded continuous function on R+ given by an expression. Outside the
/// declared domain it is continued by its boundary value.
class SOFunction {
public:
    SOFunction(Expr expr, Domain domain = {}, std::optional<cplx> limitAtZero = {},
               std::optional<cplx> limitAtInfinity = {})
        : expr_(std::move(expr)),
          logExpr_(toLogVariable(expr_)),
          domain_(domain),
          limitZero_(limitAtZero),
          limitInf_(limitAtInfinity) {
        if (!(domain_.tMin >= 0.0 && domain_.tMin < domain_.tMax))
            throw Error("invalid domain for '" + expr_.str() + "'");
        logMin_ = domain_.tMin > 0.0 ? std::log(domain_.tMin) : -std::numeric_limits<double>::infinity();
        logMax_ = std::isinf(domain_.tMax) ? std::numeric_limits<double>::infinity() : std::log(domain_.tMax);
        if (!expr_.containsAbs()) {
            derivative_ = differentiate(expr_);
            logDerivative_ = differentiate(logExpr_);
        }
    }

    static SOFunction parse(std::string_view src, Domain domain = {}) {
        return SOFunction(sioshift::parse(src), domain);
    }

    static SOFunction constant(cplx v) {
        Expr e = build::num(v.real());
        if (v.imag() != 0.0) e = build::add(e, build::mul(build::num(v.imag()), Expr::imag()));
        return SOFunction(e);
    }

    const Expr& expr() const { return expr_; }
    const Expr& logExpr() const { return logExpr_; }
    const std::optional<Expr>& derivative() const { return derivative_; }
    const Domain& domain() const { return domain_; }
    double logMin() const { return logMin_; }
    double logMax() const { return logMax_; }

    bool isConstant() const { return !expr_.dependsOnVar(); }

    /// f(t) for t inside the declared domain.
    cplx operator()(double t) const {
        if (!(t > 0.0) || t < domain_.tMin || t > domain_.tMax)
            throw DomainError("t=" + std::to_string(t) + " outside declared domain", expr_.str());
        return expr_.eval(t);
    }

    /// f(e^X), continued by the boundary value outside the domain.
    cplx atLog(double X) const { return logExpr_.eval(std::clamp(X, logMin_, logMax_)); }

    /// t f'(t) at t = e^X (zero outside the domain, where f is constant).
    cplx tDerivativeAtLog(double X) const {
        if (!logDerivative_) throw NotDifferentiableError("'" + expr_.str() + "' has no derivative");
        if (X < logMin_ || X > logMax_) return 0.0;
        return logDerivative_->eval(X);
    }

    bool endpointInDomain(Endpoint s) const {
        return s == Endpoint::Zero ? std::isinf(logMin_) : std::isinf(logMax_);
    }

    /// Declared limit, or the value itself for constants, or the boundary
    /// value when the endpoint lies outside the domain.
    std::optional<cplx> exactLimit(Endpoint s) const {
        const auto& lim = s == Endpoint::Zero ? limitZero_ : limitInf_;
        if (lim) return lim;
        if (isConstant()) return expr_.eval(1.0);
        if (!endpointInDomain(s)) return atLog(s == Endpoint::Zero ? logMin_ : logMax_);
        return std::nullopt;
    }

    std::optional<cplx> declaredLimit(Endpoint s) const { return s == Endpoint::Zero ? limitZero_ : limitInf_; }

    SOFunction withLimit(Endpoint s, cplx v) const {
        SOFunction f = *this;
        (s == Endpoint::Zero ? f.limitZero_ : f.limitInf_) = v;
        return f;
    }

private:
    Expr expr_;
    Expr logExpr_;
    std::optional<Expr> derivative_;
    std::optional<Expr> logDerivative_;
    Domain domain_;
    double logMin_ = 0.0, logMax_ = 0.0;
    std::optional<cplx> limitZero_, limitInf_;
};

/// Diameter of a finite set of complex numbers.
inline double diameter(std::span<const cplx> values) {
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j) d = std::max(d, std::abs(values[i] - values[j]));
    return d;
}

inline constexpr int kModulusSamples = 256;

/// sup over t, tau in [lambda r, r] of |f(t) - f(tau)|, with r = e^logR,
/// taken as the diameter of 256 log-spaced samples. The interval must lie in
/// the declared domain.
inline double oscillationModulusLog(const SOFunction& f, double lambda, double logR) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error("lambda must lie in (0,1)");
    const double lo = logR + std::log(lambda);
    if (lo < f.logMin() || logR > f.logMax())
        throw DomainError("[lambda r, r] leaves the declared domain", f.expr().str());
    std::vector<cplx> v(kModulusSamples);
    for (int k = 0; k < kModulusSamples; ++k) {
        const double X = lo + (logR - lo) * k / (kModulusSamples - 1);
        v[static_cast<std::size_t>(k)] = f.logExpr().eval(X);
    }
    return diameter(v);
}

inline double oscillationModulus(const SOFunction& f, double lambda, double r) {
    if (!(r > 0.0)) throw Error("r must be positive");
    return oscillationModulusLog(f, lambda, std::log(r));
}

struct FiberConfig {
    double sigma = 0.7;        ///< step of log t_n
    int samples = 4096;        ///< N
    double tailFraction = 1.0 / 32.0;  ///< tail is n in [N * tailFraction, N]
    double epsCluster = 1e-2;
    double lambda = 0.5;
    double soTol = 1e-2;
    int rGridPoints = 16;

    double maxLog() const { return sigma * samples; }
    int tailStart() const { return std::max(1, static_cast<int>(std::ceil(samples * tailFraction))); }
};

struct ModulusSample {
    double logR;
    double modulus;
};

struct EndpointSOReport {
    Endpoint endpoint;
    bool accepted = false;
    bool constantExtension = false;  ///< endpoint outside the domain
    std::vector<ModulusSample> trace;
};

struct SOReport {
    bool accepted = false;
    std::array<EndpointSOReport, 2> endpoints;
    const EndpointSOReport& at(Endpoint s) const { return endpoints[s == Endpoint::Zero ? 0 : 1]; }
};

/// log r_k = dir * (k+1) * maxLog / K, k = 0..K-1.
inline std::vector<double> defaultRGrid(Endpoint s, const FiberConfig& cfg) {
    std::vector<double> g(static_cast<std::size_t>(cfg.rGridPoints));
    for (int k = 0; k < cfg.rGridPoints; ++k)
        g[static_cast<std::size_t>(k)] = direction(s) * (k + 1) * cfg.maxLog() / cfg.rGridPoints;
    return g;
}

/// Accepts an endpoint when the modulus at the last grid point is below tol
/// and the second half of the trace never exceeds the first half's maximum by
/// more than 10%.
inline EndpointSOReport verifySOAt(const SOFunction& f, Endpoint s, double lambda, std::span<const double> logRGrid,
                                   double tol) {
    if (logRGrid.size() < 8) throw Error("verifySO needs at least 8 grid points per endpoint");
    EndpointSOReport rep{s, false, false, {}};
    if (f.isConstant() || f.declaredLimit(s) || !f.endpointInDomain(s)) {
        // Constant near the endpoint (or asserted limit): modulus is zero there.
        rep.constantExtension = !f.endpointInDomain(s);
        for (double lr : logRGrid) {
            double m = 0.0;
            if (!f.isConstant() && f.endpointInDomain(s) && lr + std::log(lambda) >= f.logMin() && lr <= f.logMax()) {
                try {
                    m = oscillationModulusLog(f, lambda, lr);
                } catch (const DomainError&) {
                    break;
                }
            }
            rep.trace.push_back({lr, m});
        }
        if (f.declaredLimit(s) && !rep.trace.empty() && rep.trace.back().modulus >= tol) {
            rep.accepted = false;
            return rep;
        }
        rep.accepted = true;
        return rep;
    }
    for (double lr : logRGrid) {
        // Toward 0 the interval [lambda r, r] must stay inside the domain.
        rep.trace.push_back({lr, oscillationModulusLog(f, lambda, lr)});
    }
    const std::size_t half = rep.trace.size() / 2;
    double firstMax = 0.0, secondMax = 0.0;
    for (std::size_t k = 0; k < rep.trace.size(); ++k)
        (k < half ? firstMax : secondMax) = std::max(k < half ? firstMax : secondMax, rep.trace[k].modulus);
    rep.accepted = rep.trace.back().modulus < tol && secondMax <= 1.1 * firstMax + 1e-12;
    return rep;
}

inline SOReport verifySO(const SOFunction& f, const FiberConfig& cfg = {}) {
    SOReport r;
    for (Endpoint s : {Endpoint::Zero, Endpoint::Infinity}) {
        const auto grid = defaultRGrid(s, cfg);
        r.endpoints[s == Endpoint::Zero ? 0 : 1] = verifySOAt(f, s, cfg.lambda, grid, cfg.soTol);
    }
    r.accepted = r.endpoints[0].accepted && r.endpoints[1].accepted;
    return r;
}

/// Computable shadow of a point xi of the fiber over 0 or infinity:
/// (a(xi), b(xi), c(xi), d(xi), omega(xi)).
struct FiberPoint {
    Endpoint endpoint = Endpoint::Infinity;
    std::array<cplx, 5> values{};
    std::vector<double> sourceSequence;  ///< log t_n of the members, increasing in n
    double clusterRadius = 0.0;
    bool exact = false;  ///< all five values are exact limits

    cplx a() const { return values[0]; }
    cplx b() const { return values[1]; }
    cplx c() const { return values[2]; }
    cplx d() const { return values[3]; }
    double omega() const { return values[4].real(); }
};

inline double tupleDistance(const std::array<cplx, 5>& u, const std::array<cplx, 5>& v) {
    double d = 0.0;
    for (std::size_t k = 0; k < 5; ++k) d = std::max(d, std::abs(u[k] - v[k]));
    return d;
}

using CoefficientTuple = std::array<const SOFunction*, 5>;

/// Samples the five functions along log t_n = dir*sigma*n over the tail
/// window, clusters the tuples greedily with radius epsCluster and returns one
/// fiber point per cluster (values = minimax medoid of the members).
inline std::vector<FiberPoint> estimateFiberPoints(const CoefficientTuple& fns, Endpoint s,
                                                   const FiberConfig& cfg = {}) {
    static constexpr const char* names[] = {"a", "b", "c", "d", "omega"};
    bool allExact = true;
    for (std::size_t k = 0; k < 5; ++k) {
        const auto grid = defaultRGrid(s, cfg);
        const auto rep = verifySOAt(*fns[k], s, cfg.lambda, grid, cfg.soTol);
        if (!rep.accepted)
            throw NotSlowlyOscillatingError(std::string("coefficient ") + names[k] + " = '" + fns[k]->expr().str() +
                                            "' is not slowly oscillating at " + toString(s));
        if (!fns[k]->exactLimit(s)) allExact = false;
    }

    const int n0 = cfg.tailStart();
    const double dir = direction(s);
    std::vector<double> logT;
    for (int n = n0; n <= cfg.samples; ++n) logT.push_back(dir * cfg.sigma * n);

    auto tupleAt = [&](double X) {
        std::array<cplx, 5> v{};
        for (std::size_t k = 0; k < 5; ++k) {
            const auto lim = fns[k]->exactLimit(s);
            v[k] = lim ? *lim : fns[k]->atLog(X);
        }
        if (std::abs(v[4].imag()) > 1e-12) throw Error("omega must be real-valued");
        v[4] = v[4].real();
        return v;
    };

    if (allExact) {
        FiberPoint fp;
        fp.endpoint = s;
        fp.values = tupleAt(logT.back());
        fp.sourceSequence = logT;
        fp.exact = true;
        return {fp};
    }

    std::vector<std::array<cplx, 5>> tuples;
    tuples.reserve(logT.size());
    for (double X : logT) tuples.push_back(tupleAt(X));

    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> reps;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        bool placed = false;
        for (std::size_t c = 0; c < reps.size(); ++c) {
            if (tupleDistance(tuples[i], tuples[reps[c]]) <= cfg.epsCluster) {
                members[c].push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) {
            reps.push_back(i);
            members.push_back({i});
        }
    }

    std::vector<FiberPoint> out;
    out.reserve(reps.size());
    for (std::size_t c = 0; c < reps.size(); ++c) {
        const auto& mem = members[c];
        std::size_t best = reps[c];
        double bestRadius = std::numeric_limits<double>::infinity();
        for (std::size_t i : mem) {
            double r = 0.0;
            for (std::size_t j : mem) {
                r = std::max(r, tupleDistance(tuples[i], tuples[j]));
                if (r >= bestRadius) break;
            }
            if (r < bestRadius) {
                bestRadius = r;
                best = i;
            }
        }
        FiberPoint fp;
        fp.endpoint = s;
        fp.values = tuples[best];
        fp.clusterRadius = bestRadius;
        for (std::size_t i : mem) fp.sourceSequence.push_back(logT[i]);
        out.push_back(std::move(fp));
    }
    return out;
}

}  // namespace sioshift
