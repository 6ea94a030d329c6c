#pragma once
// S, R, P+- and the full operator (a - bW)P+ + (c - dW)P- acting on the Phi
// picture u(x) = e^{x/p} f(e^x).

#include <cmath>
#include <functional>

#include "mellin.hpp"

namespace sioshift {

enum class SRoute { Symbol, Direct };

inline LogGridFunction applyS(const LogGridFunction& u, double p, SRoute route, std::size_t extra = 0) {
    if (route == SRoute::Symbol) return coApply(spSymbol(p), u, extra);
    return applySDirect(u, p, u.grid().extended(extra));
}

inline LogGridFunction applyR(const LogGridFunction& u, double p, SRoute route, std::size_t extra = 0) {
    if (route == SRoute::Symbol) return coApply(rpSymbol(p), u, extra);
    return applyRDirect(u, p, u.grid().extended(extra));
}

/// (I + sign S) u / 2 on the grid extended by `extra` points.
inline LogGridFunction applyP(int sign, const LogGridFunction& u, double p, SRoute route, std::size_t extra = 0) {
    LogGridFunction s = applyS(u, p, route, extra);
    s *= static_cast<double>(sign);
    s += u.resampledOn(s.grid());
    s *= 0.5;
    return s;
}

inline LogGridFunction applyPPlus(const LogGridFunction& u, double p, SRoute route, std::size_t extra = 0) {
    return applyP(+1, u, p, route, extra);
}

inline LogGridFunction applyPMinus(const LogGridFunction& u, double p, SRoute route, std::size_t extra = 0) {
    return applyP(-1, u, p, route, extra);
}

/// Coefficients of (a - bW)P+ + (c - dW)P- as functions of x = log t.
struct SIOCoefficients {
    double p = 2.0;
    std::function<cplx(double)> a, b, c, d;
    std::function<double(double)> omega;
    double supAbsOmega = 0.0;

    static SIOCoefficients constant(double p, cplx a, cplx b, cplx c, cplx d, double omega) {
        return {p,
                [a](double) { return a; },
                [b](double) { return b; },
                [c](double) { return c; },
                [d](double) { return d; },
                [omega](double) { return omega; },
                std::abs(omega)};
    }
};

/// Phi W Phi^{-1} v at the points of `grid`: e^{-omega(x)/p} v(x + omega(x)).
inline cplx weightedShiftAt(const LogGridFunction& v, double x, double omega, double p) {
    return std::exp(-omega / p) * v.interpolate(x + omega, OutOfGrid::Zero);
}

/// Phi N Phi^{-1} u; P+-u are computed on a grid wide enough for the shift.
inline LogGridFunction applySIO(const SIOCoefficients& k, const LogGridFunction& u, SRoute route = SRoute::Symbol) {
    const double h = u.grid().step;
    const auto extra = static_cast<std::size_t>(std::ceil(k.supAbsOmega / h)) + 4;
    const LogGridFunction plus = applyPPlus(u, k.p, route, extra);
    const LogGridFunction minus = applyPMinus(u, k.p, route, extra);
    LogGridFunction out(u.grid());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = u.grid().x(j);
        const double w = k.omega(x);
        const std::size_t je = j + extra;
        out[j] = k.a(x) * plus[je] - k.b(x) * weightedShiftAt(plus, x, w, k.p) + k.c(x) * minus[je] -
                 k.d(x) * weightedShiftAt(minus, x, w, k.p);
    }
    return out;
}

}  // namespace sioshift
