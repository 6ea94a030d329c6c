#pragma once
// Slowly oscillating shifts alpha(t) = t exp(omega(t)). Everything is computed
// in the log variable X = log t, where alpha acts as X -> X + omega(e^X).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "loggrid.hpp"
#include "so_core.hpp"

namespace sioshift {

struct ShiftConfig {
    int probeCount = 10001;
    double probeMaxLog = 0.7 * 4096;  ///< probe grid covers |log t| <= probeMaxLog
    int maxIterate = 64;
    double endpointTol = 1e-2;  ///< |t omega'(t)| at the outermost probes
    FiberConfig so{};
};

/// Bounds cached from the probe grid at construction.
struct ShiftBounds {
    double infOnePlusTOmegaPrime = 0.0;
    double supAbsOmega = 0.0;
    double infAlphaPrime = 0.0;
    double supAlphaPrime = 0.0;
    double supAbsLogAlphaPrime = 0.0;
    double tOmegaPrimeNearZero = 0.0;
    double tOmegaPrimeNearInfinity = 0.0;
    /// omega vanishes somewhere on the probe grid: alpha has a sampled
    /// interior fixed point.
    bool interiorFixedPoint = false;
};

class SOSShift {
public:
    explicit SOSShift(SOFunction omega, ShiftConfig cfg = {}) : omega_(std::move(omega)), cfg_(cfg) {
        if (omega_.expr().containsImag()) throw InvalidShiftError("omega must be real-valued");
        if (!omega_.derivative()) throw InvalidShiftError("omega must be differentiable");
        const auto so = verifySO(omega_, cfg_.so);
        if (!so.accepted) throw InvalidShiftError("omega = '" + omega_.expr().str() + "' is not slowly oscillating");
        computeBounds();
    }

    static SOSShift multiplicative(double k, ShiftConfig cfg = {}) {
        if (!(k > 0.0)) throw InvalidShiftError("multiplicative shift needs k > 0");
        return SOSShift(SOFunction(build::num(std::log(k))), cfg);
    }

    const SOFunction& omega() const { return omega_; }
    const ShiftBounds& bounds() const { return bounds_; }
    const ShiftConfig& config() const { return cfg_; }
    bool isMultiplicative() const { return omega_.isConstant(); }

    double omegaAtLog(double X) const { return omega_.atLog(X).real(); }
    double tOmegaPrimeAtLog(double X) const { return omega_.tDerivativeAtLog(X).real(); }

    double logAlpha(double X) const { return X + omegaAtLog(X); }

    double alpha(double t) const { return fromLog(logAlpha(toLog(t))); }

    double alphaPrimeAtLog(double X) const {
        const double v = (1.0 + tOmegaPrimeAtLog(X)) * std::exp(omegaAtLog(X));
        if (!(v > 0.0)) throw InvalidShiftError("alpha' is not positive at log t = " + std::to_string(X));
        return v;
    }

    double alphaPrime(double t) const { return alphaPrimeAtLog(toLog(t)); }

    /// Inverse shift in the log variable: solves Z + omega(e^Z) = Y by
    /// bracketed Newton with bisection fallback to |dZ| <= 1e-12.
    double logBeta(double Y) const {
        if (!std::isfinite(Y)) throw BracketNotFoundError("non-finite argument to beta");
        const double M = bounds_.supAbsOmega + 1.0;
        double lo = Y - M, hi = Y + M;
        auto phi = [&](double Z) { return logAlpha(Z) - Y; };
        double flo = phi(lo), fhi = phi(hi);
        for (int k = 0; k < 60 && (flo > 0.0 || fhi < 0.0); ++k) {
            if (flo > 0.0) flo = phi(lo -= M * (1 << std::min(k, 20)));
            if (fhi < 0.0) fhi = phi(hi += M * (1 << std::min(k, 20)));
        }
        if (flo > 0.0 || fhi < 0.0) throw BracketNotFoundError("no bracket for beta at log t = " + std::to_string(Y));
        double z = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double f = phi(z);
            if (f == 0.0) return z;
            if (f < 0.0) lo = z;
            else hi = z;
            const double df = 1.0 + tOmegaPrimeAtLog(z);
            double next = z - f / df;
            if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
            const double tol = 1e-12 + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next);
            if (std::abs(next - z) <= tol || hi - lo <= tol) return next;
            z = next;
        }
        return z;
    }

    double beta(double t) const { return fromLog(logBeta(toLog(t))); }

    /// alpha_n in the log variable; alpha_0 = identity, negative n uses beta.
    double logIterate(int n, double X) const {
        if (std::abs(n) > cfg_.maxIterate)
            throw Error("iterate order " + std::to_string(n) + " exceeds the configured maximum");
        for (int k = 0; k < std::abs(n); ++k) X = n > 0 ? logAlpha(X) : logBeta(X);
        return X;
    }

    double iterate(int n, double t) const { return fromLog(logIterate(n, toLog(t))); }

private:
    static double toLog(double t) {
        if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("shift argument must be positive", "t");
        return std::log(t);
    }

    static double fromLog(double X) {
        if (X > std::log(std::numeric_limits<double>::max()) || X < std::log(std::numeric_limits<double>::min()))
            throw OverflowError("shift value exp(" + std::to_string(X) + ") is not representable");
        return std::exp(X);
    }

    void computeBounds() {
        const int n = cfg_.probeCount;
        const double R = cfg_.probeMaxLog;
        bounds_.infOnePlusTOmegaPrime = std::numeric_limits<double>::infinity();
        bounds_.infAlphaPrime = std::numeric_limits<double>::infinity();
        double prevSign = 0.0;
        double prevLogAlpha = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            const double X = -R + 2.0 * R * k / (n - 1);
            const double w = omegaAtLog(X);
            const double tw = tOmegaPrimeAtLog(X);
            const double onePlus = 1.0 + tw;
            bounds_.infOnePlusTOmegaPrime = std::min(bounds_.infOnePlusTOmegaPrime, onePlus);
            bounds_.supAbsOmega = std::max(bounds_.supAbsOmega, std::abs(w));
            if (onePlus > 0.0) {
                const double ap = onePlus * std::exp(w);
                bounds_.infAlphaPrime = std::min(bounds_.infAlphaPrime, ap);
                bounds_.supAlphaPrime = std::max(bounds_.supAlphaPrime, ap);
                bounds_.supAbsLogAlphaPrime = std::max(bounds_.supAbsLogAlphaPrime, std::abs(std::log(ap)));
            }
            const double sign = w > 0 ? 1.0 : w < 0 ? -1.0 : 0.0;
            if (sign == 0.0 || (prevSign != 0.0 && sign != prevSign)) bounds_.interiorFixedPoint = true;
            prevSign = sign;
            const double la = X + w;
            if (!(la > prevLogAlpha)) throw InvalidShiftError("alpha is not increasing on the probe grid");
            prevLogAlpha = la;
            if (k == 0) bounds_.tOmegaPrimeNearZero = tw;
            if (k == n - 1) bounds_.tOmegaPrimeNearInfinity = tw;
        }
        if (!(bounds_.infOnePlusTOmegaPrime > 0.0))
            throw InvalidShiftError("inf (1 + t omega'(t)) is not positive on the probe grid");
        if (!std::isfinite(bounds_.supAbsLogAlphaPrime)) throw InvalidShiftError("log alpha' is unbounded");
        if (std::abs(bounds_.tOmegaPrimeNearZero) >= cfg_.endpointTol ||
            std::abs(bounds_.tOmegaPrimeNearInfinity) >= cfg_.endpointTol)
            throw InvalidShiftError("t omega'(t) does not vanish at the endpoints");
    }

    SOFunction omega_;
    ShiftConfig cfg_;
    ShiftBounds bounds_;
};

/// (W_alpha f)(t) = f(alpha(t)) for samples f(e^x), by cubic interpolation in x.
inline LogGridFunction applyShiftOperator(const SOSShift& sh, const LogGridFunction& f,
                                          OutOfGrid policy = OutOfGrid::Throw) {
    LogGridFunction out(f.grid());
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = f.interpolate(sh.logAlpha(f.grid().x(j)), policy);
    return out;
}

/// alpha'(xi) = exp(omega(xi)).
inline double fiberShiftDerivative(const FiberPoint& fp) { return std::exp(fp.omega()); }

}  // namespace sioshift
