#pragma once
// Limit-operator experiments: dilations V_x f(t) = f(t/x), modulations
// E_x f(t) = t^{ix} f(t), conjugation traces along fiber sequences, a compact
// test operator, and finite-section singular values.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fredholm.hpp"
#include "mellin.hpp"
#include "operators.hpp"

namespace sioshift {

using GridOperator = std::function<LogGridFunction(const LogGridFunction&)>;

/// V_x on samples f(e^y): the same samples on the grid moved by log x.
inline LogGridFunction applyDilation(double logX, const LogGridFunction& f) { return f.relabelled(logX); }

/// E_mu on samples f(e^y): multiply by e^{i mu y}.
inline LogGridFunction applyModulation(double mu, const LogGridFunction& f) {
    LogGridFunction out = f;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= std::exp(cplx(0.0, mu * out.grid().x(j)));
    return out;
}

struct PseudoisometryFamily {
    enum class Kind { Dilation, Modulation };
    Kind kind = Kind::Dilation;
    std::vector<double> parameters;  ///< log h_n for dilations, mu_n for modulations

    PseudoisometryFamily(Kind k, std::vector<double> params) : kind(k), parameters(std::move(params)) {
        if (parameters.size() < 2) return;
        const bool up = parameters.back() > parameters.front();
        for (std::size_t i = 1; i < parameters.size(); ++i)
            if ((parameters[i] > parameters[i - 1]) != up || parameters[i] == parameters[i - 1])
                throw Error("pseudoisometry parameters must be strictly monotone");
    }

    /// ||U|| for U acting on L^p(R+): x^{1/p} for V_x, 1 for E_mu.
    double norm(std::size_t n, double p) const {
        return kind == Kind::Dilation ? std::exp(parameters[n] / p) : 1.0;
    }
    double inverseNorm(std::size_t n, double p) const {
        return kind == Kind::Dilation ? std::exp(-parameters[n] / p) : 1.0;
    }
};

/// sup over t in [1/2, 2] of |g(h t) - g(h)|, h = e^logH.
inline double dilationDeviation(const SOFunction& g, double logH, int samples = 257) {
    const cplx g0 = g.atLog(logH);
    double m = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double y = std::log(2.0) * (2.0 * k / (samples - 1) - 1.0);
        m = std::max(m, std::abs(g.atLog(logH + y) - g0));
    }
    return m;
}

struct TraceRow {
    int n = 0;
    double parameter = 0.0;
    int testFn = 0;
    double discrepancy = 0.0;
};

/// ||V_h^{-1} A V_h u - L u|| / ||u|| in the Phi picture for each log h and
/// test function. `op` must accept functions on offset grids.
inline std::vector<TraceRow> conjugationTrace(const GridOperator& op, const GridOperator& limit,
                                              const std::vector<double>& logH,
                                              const std::vector<LogGridFunction>& testFns, double p) {
    std::vector<TraceRow> rows;
    for (std::size_t t = 0; t < testFns.size(); ++t) {
        const auto& u = testFns[t];
        const LogGridFunction lim = limit(u);
        const double nu = u.normP(p);
        for (std::size_t n = 0; n < logH.size(); ++n) {
            const LogGridFunction back = op(u.relabelled(logH[n])).relabelled(-logH[n]);
            rows.push_back({static_cast<int>(n), logH[n], static_cast<int>(t),
                            (LogGridFunction(u.grid(), {back.samples().begin(), back.samples().end()}) - lim).normP(p) / nu});
        }
    }
    return rows;
}

inline double snapToGrid(double x, double step) { return std::round(x / step) * step; }

struct DilationExperiment {
    std::vector<double> logH;  ///< snapped source sequence
    std::vector<TraceRow> rows;
    double maxValueMove = 0.0;  ///< max tuple movement caused by snapping
    bool resnapWarning = false; ///< movement exceeded eps_cluster / 2
};

/// Dilation trace of N toward the limit operator at a fiber point.
inline DilationExperiment dilationLimitExperiment(const ShiftedSIO& op, const FiberPoint& fp,
                                                  const std::vector<std::size_t>& indices,
                                                  const std::vector<LogGridFunction>& testFns,
                                                  double epsCluster = 1e-2, SRoute route = SRoute::Symbol) {
    if (testFns.empty()) throw Error("no test functions");
    const double step = testFns.front().grid().step;
    DilationExperiment ex;
    const auto tuple = op.tuple();
    for (std::size_t i : indices) {
        if (i >= fp.sourceSequence.size()) throw GridExhaustedError("index beyond the fiber source sequence");
        const double orig = fp.sourceSequence[i];
        const double snapped = snapToGrid(orig, step);
        for (const SOFunction* f : tuple)
            ex.maxValueMove = std::max(ex.maxValueMove, std::abs(f->atLog(snapped) - f->atLog(orig)));
        ex.logH.push_back(snapped);
    }
    ex.resnapWarning = ex.maxValueMove > epsCluster / 2.0;
    const SIOCoefficients full = op.coefficients();
    const SIOCoefficients lim =
        SIOCoefficients::constant(op.p(), fp.a(), fp.b(), fp.c(), fp.d(), fp.omega());
    ex.rows = conjugationTrace([&](const LogGridFunction& u) { return applySIO(full, u, route); },
                               [&](const LogGridFunction& u) { return applySIO(lim, u, route); }, ex.logH, testFns,
                               op.p());
    return ex;
}

/// Rank-3 operator K u = sum_k phi_k <psi_k, u> with log-Gaussian factors
/// (Phi picture, inner product over dx).
struct CompactTestOperator {
    struct Term {
        double centerOut, widthOut, centerIn, widthIn;
        cplx weight;
    };
    std::vector<Term> terms{{0.0, 1.0, 0.5, 0.8, 1.0}, {1.5, 0.7, -1.0, 1.2, cplx(0.0, 0.6)}, {-2.0, 1.1, 2.0, 0.9, -0.4}};

    static double gauss(double x, double c, double w) { return std::exp(-(x - c) * (x - c) / (2.0 * w * w)); }

    LogGridFunction apply(const LogGridFunction& u) const {
        LogGridFunction out(u.grid());
        for (const auto& t : terms) {
            cplx ip{};
            for (std::size_t j = 0; j < u.size(); ++j) ip += gauss(u.grid().x(j), t.centerIn, t.widthIn) * u[j];
            ip *= u.grid().step * t.weight;
            for (std::size_t j = 0; j < u.size(); ++j) out[j] += ip * gauss(u.grid().x(j), t.centerOut, t.widthOut);
        }
        return out;
    }
};

/// ||V_h^{-1} K V_h u|| / ||u|| per log h; the limit is zero.
inline std::vector<TraceRow> compactLimitTrace(const CompactTestOperator& K, const std::vector<double>& logH,
                                               const std::vector<LogGridFunction>& testFns, double p) {
    return conjugationTrace([&](const LogGridFunction& u) { return K.apply(u); },
                            [](const LogGridFunction& u) { return LogGridFunction(u.grid()); }, logH, testFns, p);
}

/// Smallest xi_c with |u^(xi)| <= tol max|u^| for all |xi| > xi_c; throws if
/// that exceeds `maxFraction` of the Nyquist frequency.
inline double bandLimit(const LogGridFunction& u, double tol = 1e-12, double maxFraction = 0.5) {
    std::vector<cplx> buf(u.samples().begin(), u.samples().end());
    fft(buf);
    double peak = 0.0;
    for (const auto& v : buf) peak = std::max(peak, std::abs(v));
    double xc = 0.0;
    for (std::size_t k = 0; k < buf.size(); ++k)
        if (std::abs(buf[k]) > tol * peak) xc = std::max(xc, std::abs(fftFrequency(k, buf.size(), u.grid().step)));
    const double nyq = kPi / u.grid().step;
    if (xc > maxFraction * nyq) throw Error("test function is not band-limited on this grid");
    return xc;
}

struct ModulationRow {
    double mu = 0.0;
    int testFn = 0;
    double discrepancy = 0.0;  ///< ||E_mu^{-1} S E_mu u - sign(mu) u|| / ||u||
    double symbolDeviation = 0.0;  ///< sup_{|x| <= band} |s_p(x + mu) - sign(mu)|
    double symbolSlope = 0.0;      ///< sup_{|x| <= band} |s_p'(x + mu)|
    double band = 0.0;
};

/// E_mu^{-1} S E_mu against +-I for band-limited test functions (Phi picture).
inline std::vector<ModulationRow> modulationLimitExperiment(double p, const std::vector<double>& muList,
                                                            const std::vector<LogGridFunction>& testFns,
                                                            SRoute route = SRoute::Direct) {
    std::vector<ModulationRow> rows;
    for (std::size_t t = 0; t < testFns.size(); ++t) {
        const auto& u = testFns[t];
        const double band = bandLimit(u);
        const double nu = u.normP(p);
        for (double mu : muList) {
            const double sgn = mu >= 0.0 ? 1.0 : -1.0;
            LogGridFunction w = applyModulation(-mu, applyS(applyModulation(mu, u), p, route));
            w -= sgn * u;
            ModulationRow r{mu, static_cast<int>(t), w.normP(p) / nu, 0.0, 0.0, band};
            for (int k = 0; k <= 512; ++k) {
                const double x = band * (2.0 * k / 512.0 - 1.0) + mu;
                r.symbolDeviation = std::max(r.symbolDeviation, std::abs(symbolSP(p, x) - sgn));
                const cplx c = cschStable(kPi * cplx(x, 1.0 / p));
                r.symbolSlope = std::max(r.symbolSlope, kPi * std::abs(c * c));
            }
            rows.push_back(r);
        }
    }
    return rows;
}

/// Matrix of `op` restricted to `grid` (columns are images of unit samples).
inline Eigen::MatrixXcd materialize(const GridOperator& op, const LogGrid& grid, std::size_t maxSize = 4096) {
    if (grid.count > maxSize) throw Error("finite section larger than " + std::to_string(maxSize));
    const auto n = static_cast<Eigen::Index>(grid.count);
    Eigen::MatrixXcd M(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        LogGridFunction e(grid);
        e[static_cast<std::size_t>(j)] = 1.0;
        const LogGridFunction col = op(e);
        for (Eigen::Index i = 0; i < n; ++i) M(i, j) = col[static_cast<std::size_t>(i)];
    }
    return M;
}

inline Eigen::VectorXd singularValues(const Eigen::MatrixXcd& M) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
    return svd.singularValues();
}

struct FiniteSectionResult {
    std::size_t size = 0;
    double sigmaMin = 0.0;
    double sigmaMax = 0.0;
};

/// Smallest and largest singular values of the truncations of `op` (p = 2).
inline std::vector<FiniteSectionResult> finiteSectionProbe(const GridOperator& op, const std::vector<LogGrid>& grids) {
    std::vector<FiniteSectionResult> out;
    for (const auto& g : grids) {
        const Eigen::VectorXd s = singularValues(materialize(op, g));
        out.push_back({g.count, s.minCoeff(), s.maxCoeff()});
    }
    return out;
}

/// Grid of `size` points with step h centred at 0, aligned to multiples of h.
inline LogGrid sectionGrid(std::size_t size, double h) {
    return LogGrid{-static_cast<double>(size / 2) * h, h, size};
}

}  // namespace sioshift
