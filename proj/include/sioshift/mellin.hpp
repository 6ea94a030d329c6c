#pragma once
// Mellin analysis on log grids. Functions on R+ are stored as samples of
// f(e^x); Mellin convolutions act on the Phi picture u(x) = e^{x/p} f(e^x),
// where Co(a) multiplies the Fourier transform  u^(xi) = int u(x) e^{-i xi x} dx
// by a(xi).

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "exprdsl.hpp"
#include "fft.hpp"
#include "loggrid.hpp"

namespace sioshift {

inline constexpr double kPi = std::numbers::pi;

inline double conjugateExponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw Error("p must lie in (1, inf)");
    return p / (p - 1.0);
}

// ---------------------------------------------------------------------------
// Symbols

/// coth(w), stable for large |Re w|.
inline cplx cothStable(cplx w) {
    if (w.real() >= 0.0) {
        const cplx e = std::exp(-2.0 * w);
        return (1.0 + e) / (1.0 - e);
    }
    const cplx e = std::exp(2.0 * w);
    return -(1.0 + e) / (1.0 - e);
}

inline cplx cschStable(cplx w) {
    if (w.real() >= 0.0) {
        const cplx e = std::exp(-w);
        return 2.0 * e / (1.0 - e * e);
    }
    const cplx e = std::exp(w);
    return -2.0 * e / (1.0 - e * e);
}

/// coth(pi (x + i/p)).
inline cplx symbolSP(double p, double x) {
    conjugateExponent(p);
    return cothStable(kPi * cplx(x, 1.0 / p));
}

/// 1 / sinh(pi (x + i/p)).
inline cplx symbolRP(double p, double x) {
    conjugateExponent(p);
    return cschStable(kPi * cplx(x, 1.0 / p));
}

/// (1 + s_p(x)) / 2 = 1 / (1 - e^{-2 pi (x + i/p)}), stable on both sides.
inline cplx symbolPlusHalf(double p, double x) {
    const cplx w = kPi * cplx(x, 1.0 / p);
    if (x >= 0.0) return 1.0 / (1.0 - std::exp(-2.0 * w));
    const cplx e = std::exp(2.0 * w);
    return -e / (1.0 - e);
}

struct APTerm {
    cplx coeff;
    double freq;
};

/// Symbol of a Mellin convolution: closed form in x, samples on a uniform x
/// grid (cubic interpolation, constant continuation), an almost periodic
/// polynomial sum r e^{i lambda x}, or an arbitrary callable.
class MellinSymbol {
public:
    enum class Kind { ClosedForm, Sampled, APPolynomial, Callable };

    static MellinSymbol closedForm(Expr e) {
        MellinSymbol s;
        s.kind_ = Kind::ClosedForm;
        s.expr_ = std::move(e);
        return s;
    }

    static MellinSymbol sampled(LogGridFunction samples) {
        MellinSymbol s;
        s.kind_ = Kind::Sampled;
        s.samples_ = std::move(samples);
        return s;
    }

    static MellinSymbol apPolynomial(std::vector<APTerm> terms) {
        MellinSymbol s;
        s.kind_ = Kind::APPolynomial;
        s.terms_ = std::move(terms);
        return s;
    }

    static MellinSymbol callable(std::function<cplx(double)> fn) {
        MellinSymbol s;
        s.kind_ = Kind::Callable;
        s.fn_ = std::move(fn);
        return s;
    }

    Kind kind() const { return kind_; }
    const std::vector<APTerm>& terms() const { return terms_; }

    cplx operator()(double x) const {
        switch (kind_) {
            case Kind::ClosedForm: return expr_->eval(x);
            case Kind::Sampled: {
                const auto& g = samples_.grid();
                return samples_.interpolate(std::clamp(x, g.front(), g.back()));
            }
            case Kind::APPolynomial: {
                cplx acc{};
                for (const auto& t : terms_) acc += t.coeff * std::exp(cplx(0.0, t.freq * x));
                return acc;
            }
            case Kind::Callable: return fn_(x);
        }
        return {};
    }

    friend MellinSymbol operator*(const MellinSymbol& l, const MellinSymbol& r) {
        if (l.kind_ == Kind::APPolynomial && r.kind_ == Kind::APPolynomial) {
            std::vector<APTerm> t;
            for (const auto& a : l.terms_)
                for (const auto& b : r.terms_) t.push_back({a.coeff * b.coeff, a.freq + b.freq});
            return apPolynomial(std::move(t));
        }
        return callable([l, r](double x) { return l(x) * r(x); });
    }

private:
    Kind kind_ = Kind::Callable;
    std::optional<Expr> expr_;
    LogGridFunction samples_;
    std::vector<APTerm> terms_;
    std::function<cplx(double)> fn_;
};

inline MellinSymbol spSymbol(double p) {
    conjugateExponent(p);
    return MellinSymbol::callable([p](double x) { return symbolSP(p, x); });
}

inline MellinSymbol rpSymbol(double p) {
    conjugateExponent(p);
    return MellinSymbol::callable([p](double x) { return symbolRP(p, x); });
}

/// Symbol of Phi W_k Phi^{-1} for the shift t -> k t: e^{i (x + i/p) log k}.
inline MellinSymbol symbolMK(double k, double p) {
    conjugateExponent(p);
    if (!(k > 0.0)) throw Error("k must be positive");
    return MellinSymbol::apPolynomial({{std::pow(k, -1.0 / p), std::log(k)}});
}

// ---------------------------------------------------------------------------
// Transform pair

struct MellinSamples {
    LogGrid source;
    std::vector<double> freq;
    std::vector<cplx> values;
};

/// (Mf)(xi) = int f(e^x) e^{-i xi x} dx at the DFT frequencies of the grid.
inline MellinSamples mellinTransform(const LogGridFunction& f, double decayTol = 1e-8) {
    const double peak = f.maxAbs();
    const std::size_t n = f.size();
    if (peak > 0.0 && std::max(std::abs(f[0]), std::abs(f[n - 1])) > decayTol * peak)
        throw NonDecayingError("function does not decay at the grid ends");
    const auto& g = f.grid();
    std::vector<cplx> buf(f.samples().begin(), f.samples().end());
    fft(buf);
    MellinSamples out{g, std::vector<double>(n), std::move(buf)};
    for (std::size_t k = 0; k < n; ++k) {
        out.freq[k] = fftFrequency(k, n, g.step);
        out.values[k] *= g.step * std::exp(cplx(0.0, -out.freq[k] * g.origin));
    }
    return out;
}

/// (M^{-1} g)(e^x) = (1/2pi) int g(xi) e^{i xi x} d xi on the source grid.
inline LogGridFunction inverseMellin(const MellinSamples& m) {
    const auto& g = m.source;
    const std::size_t n = m.values.size();
    std::vector<cplx> buf(n);
    for (std::size_t k = 0; k < n; ++k) buf[k] = m.values[k] * std::exp(cplx(0.0, m.freq[k] * g.origin)) / g.step;
    fft(buf, true);
    for (auto& v : buf) v /= static_cast<double>(n);
    return LogGridFunction(g, std::move(buf));
}

/// L^2 norm of a transform with respect to d xi.
inline double mellinNorm2(const MellinSamples& m) {
    double acc = 0.0;
    for (const auto& v : m.values) acc += std::norm(v);
    const double dxi = 2.0 * kPi / (static_cast<double>(m.values.size()) * m.source.step);
    return std::sqrt(acc * dxi);
}

// ---------------------------------------------------------------------------
// Mellin convolutions

struct CoApplyDiagnostics {
    double nyquistMagnitude = 0.0;  ///< |a u^| at the highest frequency, relative to its max
};

inline std::size_t nextPow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

/// Co(a) u, output on u's grid extended by `extra` points per side. The input
/// is zero-padded to at least `pad` times the output length.
inline LogGridFunction coApply(const MellinSymbol& a, const LogGridFunction& u, std::size_t extra = 0,
                               std::size_t pad = 4, CoApplyDiagnostics* diag = nullptr) {
    const LogGrid outGrid = u.grid().extended(extra);
    const std::size_t outN = outGrid.count;
    const std::size_t M = nextPow2(pad * outN);
    const std::size_t gap = (M - outN) / 2;
    std::vector<cplx> buf(M, cplx{});
    std::copy(u.samples().begin(), u.samples().end(), buf.begin() + static_cast<long>(gap + extra));
    fft(buf);
    double peak = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        buf[k] *= a(fftFrequency(k, M, u.grid().step));
        peak = std::max(peak, std::abs(buf[k]));
    }
    if (diag) diag->nyquistMagnitude = peak > 0.0 ? std::abs(buf[M / 2]) / peak : 0.0;
    fft(buf, true);
    LogGridFunction out(outGrid);
    for (std::size_t j = 0; j < outN; ++j) out[j] = buf[gap + j] / static_cast<double>(M);
    return out;
}

// ---------------------------------------------------------------------------
// Direct quadrature of S and R in the Phi picture

/// Kernel of Phi S Phi^{-1}: (1/(pi i)) e^{z/q} / (e^z - 1), z = y - x.
inline cplx kernelS(double z, double p) {
    const double q = conjugateExponent(p);
    const double v = z > 0.0 ? std::exp(-z / p) / -std::expm1(-z) : std::exp(z / q) / std::expm1(z);
    return cplx(0.0, -v / kPi);
}

/// Kernel of Phi R Phi^{-1}: (1/(pi i)) e^{z/q} / (e^z + 1).
inline cplx kernelR(double z, double p) {
    const double q = conjugateExponent(p);
    const double v = z > 0.0 ? std::exp(-z / p) / (1.0 + std::exp(-z)) : std::exp(z / q) / (1.0 + std::exp(z));
    return cplx(0.0, -v / kPi);
}

namespace detail {

/// int_B^inf e^{-gamma z} / (1 - e^{-z}) dz for B > 0.
inline double kernelTail(double B, double gamma) {
    if (B >= 1.0) {
        double acc = 0.0;
        for (int n = 0; n < 10000; ++n) {
            const double term = std::exp(-B * (n + gamma)) / (n + gamma);
            acc += term;
            if (term < 1e-18 * acc) break;
        }
        return acc;
    }
    auto smooth = [gamma](double z) { return std::exp(-gamma * z) / -std::expm1(-z) - 1.0 / z; };
    const double mid = boost::math::quadrature::gauss<double, 30>::integrate(smooth, B, 1.0);
    return kernelTail(1.0, gamma) + mid - std::log(B);
}

inline constexpr double kFd8[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};

/// Central difference of order up to 8, reduced near the ends.
inline cplx derivativeAt(std::span<const cplx> u, std::size_t j, double h) {
    const std::size_t n = u.size();
    const std::size_t room = std::min(j, n - 1 - j);
    if (room >= 4) {
        cplx acc{};
        for (int k = -4; k <= 4; ++k) acc += kFd8[k + 4] * u[j + static_cast<std::size_t>(k + 4) - 4];
        return acc / h;
    }
    if (room >= 2) return (-u[j + 2] + 8.0 * u[j + 1] - 8.0 * u[j - 1] + u[j - 2]) / (12.0 * h);
    if (room == 1) return (u[j + 1] - u[j - 1]) / (2.0 * h);
    if (n < 2) return {};
    return j == 0 ? (u[1] - u[0]) / h : (u[n - 1] - u[n - 2]) / h;
}

template <class Kernel>
std::vector<cplx> kernelTable(const LogGrid& in, const LogGrid& out, long off, Kernel&& k) {
    // d = i - j - off ranges over [-(nOut-1) - off, nIn - 1 - off].
    const long lo = -static_cast<long>(out.count - 1) - off;
    const long hi = static_cast<long>(in.count - 1) - off;
    std::vector<cplx> t(static_cast<std::size_t>(hi - lo + 1));
    for (long d = lo; d <= hi; ++d) t[static_cast<std::size_t>(d - lo)] = d == 0 ? cplx{} : k(d * in.step);
    return t;
}

}  // namespace detail

/// PV int_A^B of the S kernel, A < 0 < B.
inline cplx pvKernelIntegral(double A, double B, double p) {
    const double q = conjugateExponent(p);
    const cplx total(0.0, 1.0 / std::tan(kPi / q));
    const cplx inv(0.0, -1.0 / kPi);  // 1/(pi i)
    return total - inv * detail::kernelTail(B, 1.0 / p) + inv * detail::kernelTail(-A, 1.0 / q);
}

/// Phi S Phi^{-1} u by trapezoid quadrature with singularity subtraction.
/// `outGrid` must be aligned with u's grid; output points outside u's range
/// use the plain trapezoid sum.
inline LogGridFunction applySDirect(const LogGridFunction& u, double p, const LogGrid& outGrid) {
    const LogGrid& in = u.grid();
    const long off = in.alignedOffset(outGrid);
    const double h = in.step;
    const auto table = detail::kernelTable(in, outGrid, off, [p](double z) { return kernelS(z, p); });
    const long lo = -static_cast<long>(outGrid.count - 1) - off;
    const long nIn = static_cast<long>(in.count);
    const auto s = u.samples();
    LogGridFunction out(outGrid);
    for (std::size_t j = 0; j < outGrid.count; ++j) {
        const long jj = static_cast<long>(j) + off;
        const cplx* kt = table.data() - lo - static_cast<long>(j) - off;  // kt[i] = k((i - jj) h)
        cplx acc{};
        if (jj >= 0 && jj < nIn) {
            const cplx uj = s[static_cast<std::size_t>(jj)];
            for (long i = 0; i < nIn; ++i) {
                if (i == jj) continue;
                const double w = (i == 0 || i == nIn - 1) ? 0.5 : 1.0;
                acc += w * (s[static_cast<std::size_t>(i)] - uj) * kt[i];
            }
            acc *= h;
            const double wj = (jj == 0 || jj == nIn - 1) ? 0.5 : 1.0;
            acc += wj * h * detail::derivativeAt(s, static_cast<std::size_t>(jj), h) * cplx(0.0, -1.0 / kPi);
            const double A = std::min(-static_cast<double>(jj) * h, -0.5 * h);
            const double B = std::max(static_cast<double>(nIn - 1 - jj) * h, 0.5 * h);
            acc += uj * pvKernelIntegral(A, B, p);
        } else {
            for (long i = 0; i < nIn; ++i) {
                const double w = (i == 0 || i == nIn - 1) ? 0.5 : 1.0;
                acc += w * s[static_cast<std::size_t>(i)] * kt[i];
            }
            acc *= h;
        }
        out[j] = acc;
    }
    return out;
}

inline LogGridFunction applySDirect(const LogGridFunction& u, double p) { return applySDirect(u, p, u.grid()); }

/// Phi R Phi^{-1} u by the trapezoid rule (the kernel is smooth).
inline LogGridFunction applyRDirect(const LogGridFunction& u, double p, const LogGrid& outGrid) {
    const LogGrid& in = u.grid();
    const long off = in.alignedOffset(outGrid);
    const double h = in.step;
    auto table = detail::kernelTable(in, outGrid, off, [p](double z) { return kernelR(z, p); });
    const long lo = -static_cast<long>(outGrid.count - 1) - off;
    table[static_cast<std::size_t>(-lo)] = kernelR(0.0, p);
    const long nIn = static_cast<long>(in.count);
    const auto s = u.samples();
    LogGridFunction out(outGrid);
    for (std::size_t j = 0; j < outGrid.count; ++j) {
        const cplx* kt = table.data() - lo - static_cast<long>(j) - off;
        cplx acc{};
        for (long i = 0; i < nIn; ++i) {
            const double w = (i == 0 || i == nIn - 1) ? 0.5 : 1.0;
            acc += w * s[static_cast<std::size_t>(i)] * kt[i];
        }
        out[j] = acc * h;
    }
    return out;
}

inline LogGridFunction applyRDirect(const LogGridFunction& u, double p) { return applyRDirect(u, p, u.grid()); }

// ---------------------------------------------------------------------------
// Step functions with closed-form norms

/// Piecewise constant f = values[k] on [breaks[k], breaks[k+1]).
struct StepFunction {
    std::vector<double> breaks;
    std::vector<cplx> values;

    StepFunction(std::vector<double> b, std::vector<cplx> v) : breaks(std::move(b)), values(std::move(v)) {
        if (breaks.size() != values.size() + 1) throw Error("step function needs one more break than values");
        for (std::size_t k = 0; k + 1 < breaks.size(); ++k)
            if (!(breaks[k] > 0.0 && breaks[k] < breaks[k + 1])) throw Error("step breaks must increase in (0, inf)");
    }

    static StepFunction indicator(double lo, double hi) { return StepFunction({lo, hi}, {1.0}); }

    cplx operator()(double t) const {
        for (std::size_t k = 0; k < values.size(); ++k)
            if (t >= breaks[k] && t < breaks[k + 1]) return values[k];
        return {};
    }

    /// ||f||_{L^p(R+, dt)}.
    double normP(double p) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) acc += std::pow(std::abs(values[k]), p) * (breaks[k + 1] - breaks[k]);
        return std::pow(acc, 1.0 / p);
    }

    /// ||Phi f||_{L^p(R+, dt/t)} integrated in x = log t: int |v|^p e^x dx.
    double phiNormP(double p) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double x0 = std::log(breaks[k]), x1 = std::log(breaks[k + 1]);
            acc += std::pow(std::abs(values[k]), p) * std::exp(x0) * std::expm1(x1 - x0);
        }
        return std::pow(acc, 1.0 / p);
    }

    /// (V_x f)(t) = f(t / x).
    StepFunction dilated(double x) const {
        std::vector<double> b = breaks;
        for (double& v : b) v *= x;
        return StepFunction(std::move(b), values);
    }
};

// ---------------------------------------------------------------------------
// Total variation and the Stechkin bound

struct VariationOptions {
    double lo = -50.0;  ///< support hint
    double hi = 50.0;
    double relTol = 1e-10;
};

/// int |a'(x)| dx over the support hint by adaptive Gauss-Kronrod.
inline double totalVariation(const Expr& a, VariationOptions opt = {}) {
    if (!a.dependsOnVar()) return 0.0;
    const Expr da = differentiate(a);
    auto integrand = [&](double x) { return std::abs(da.eval(x)); };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, opt.lo, opt.hi, 20,
                                                                                     opt.relTol, &err);
    if (!std::isfinite(v) || err > 1e-6 * (1.0 + v)) throw Error("total variation integral did not converge");
    return v;
}

/// Pichorides' value of the norm of the real-line Hilbert transform on L^p.
inline double hilbertNormConstant(double p) {
    const double q = conjugateExponent(p);
    if (p == 2.0) return 1.0;
    return 1.0 / std::tan(kPi / (2.0 * std::max(p, q)));
}

/// ||a||_{M_p} <= ||S_R||_p (sup|a| + V(a)).
inline double stechkinBound(const Expr& a, double p, VariationOptions opt = {},
                            std::optional<double> normConstant = std::nullopt) {
    const double c = normConstant ? *normConstant : hilbertNormConstant(p);
    double sup = 0.0;
    constexpr int n = 8192;
    for (int k = 0; k <= n; ++k) sup = std::max(sup, std::abs(a.eval(opt.lo + (opt.hi - opt.lo) * k / n)));
    return c * (sup + totalVariation(a, opt));
}

}  // namespace sioshift
