#pragma once
// Built-in oracle suite behind `sioshift selftest`.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fredholm.hpp"
#include "funcops.hpp"
#include "limitops.hpp"
#include "mellin.hpp"
#include "operators.hpp"

namespace sioshift {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// exp(-(x - center)^2 / (2 width^2)) e^{i kappa x}, normalised in L^p.
inline LogGridFunction logGaussian(const LogGrid& g, double center, double width, double kappa = 0.0, double p = 2.0) {
    auto u = LogGridFunction::sample(g, [&](double x) {
        return std::exp(-(x - center) * (x - center) / (2.0 * width * width)) * std::exp(cplx(0.0, kappa * x));
    });
    u *= 1.0 / u.normP(p);
    return u;
}

struct SelftestCheck {
    std::string id;  ///< module/invariant
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct SelftestOptions {
    std::function<cplx(double, double)> sp = symbolSP;  ///< (p, x) -> s_p(x)
};

namespace detail {

inline void record(std::vector<SelftestCheck>& out, std::string id, double value, double threshold) {
    out.push_back({std::move(id), value, threshold, std::isfinite(value) && value <= threshold});
}

template <class F>
void guarded(std::vector<SelftestCheck>& out, const std::string& id, F&& body) {
    try {
        body();
    } catch (const std::exception&) {
        out.push_back({id, std::numeric_limits<double>::infinity(), 0.0, false});
    }
}

}  // namespace detail

inline std::vector<SelftestCheck> runSelftest(const SelftestOptions& opt = {}) {
    using detail::guarded;
    using detail::record;
    std::vector<SelftestCheck> out;
    const double p = 2.0;
    const LogGrid g;
    const auto sp = MellinSymbol::callable([f = opt.sp, p](double x) { return f(p, x); });

    guarded(out, "mellin/round-trip", [&] {
        double worst = 0.0;
        for (double c : {-1.0, 0.0, 2.0}) {
            const auto u = logGaussian(g, c, 0.9, 1.5);
            worst = std::max(worst, (inverseMellin(mellinTransform(u)) - u).maxAbs() / u.maxAbs());
        }
        record(out, "mellin/round-trip", worst, 1e-12);
    });

    guarded(out, "mellin/parseval", [&] {
        const auto u = logGaussian(g, 0.5, 1.2, -0.7);
        const double lhs = mellinNorm2(mellinTransform(u)) / std::sqrt(2.0 * kPi);
        record(out, "mellin/parseval", std::abs(lhs - u.normP(2.0)) / u.normP(2.0), 1e-12);
    });

    guarded(out, "mellin/symbol-identity", [&] {
        double worst = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double x = -20.0 + 0.1 * k;
            const cplx s = opt.sp(p, x), r = symbolRP(p, x);
            worst = std::max(worst, std::abs(s * s - r * r - 1.0));
        }
        record(out, "mellin/symbol-identity", worst, 1e-12);
    });

    guarded(out, "mellin/operator-identity", [&] {
        const auto u = logGaussian(g, 0.3, 1.0, 0.4);
        const std::size_t ex = g.count;
        const auto s2 = coApply(sp, coApply(sp, u, ex)).resampledOn(g);
        const auto r2 = coApply(rpSymbol(p), coApply(rpSymbol(p), u, ex)).resampledOn(g);
        record(out, "mellin/operator-identity", (s2 - r2 - u).normP(p) / u.normP(p), 1e-5);
    });

    guarded(out, "mellin/cauchy-similarity", [&] {
        const auto u = logGaussian(g, 0.5, 1.0, 0.3);
        const auto viaSymbol = coApply(sp, u).decimated(8);
        const auto ud = u.decimated(8);
        const auto direct = applySDirect(ud, p);
        record(out, "mellin/cauchy-similarity", (direct - viaSymbol).normP(p) / ud.normP(p), 1e-5);
    });

    guarded(out, "mellin/dilation-symbol", [&] {
        auto bump = [](double x) { return cplx(std::exp(-x * x / 2.0), 0.0); };
        const auto u = LogGridFunction::sample(g, bump);
        double worst = 0.0;
        for (double k : {0.5, 2.0, std::exp(1.0)}) {
            const auto exact = LogGridFunction::sample(
                g, [&](double x) { return std::pow(k, -1.0 / p) * bump(x + std::log(k)); });
            worst = std::max(worst, (coApply(symbolMK(k, p), u) - exact).normP(p) / u.normP(p));
        }
        record(out, "mellin/dilation-symbol", worst, 1e-8);
    });

    guarded(out, "funcops/neumann-residual", [&] {
        const LogGrid ng = LogGrid::symmetric(48.0, 12);
        double worst = 0.0;
        for (auto [a, b] : {std::pair{2.0, 1.0}, {1.0, 3.0}}) {
            const BinomialOp op(SOFunction::constant(a), SOFunction::constant(b), SOSShift::multiplicative(std::exp(1.0)), p);
            const auto rep = checkInvertibility(op);
            const auto f = logGaussian(ng, 0.0, 1.0);
            const auto inv = applyNeumannInverse(op, rep, f, 1e-6);
            worst = std::max(worst, (op.apply(inv.value) - f).normPHalfLine(p));
        }
        record(out, "funcops/neumann-residual", worst, 2e-6);
    });

    guarded(out, "fredholm/bundled-verdicts", [&] {
        auto constant = [&](double a, double b) {
            return ShiftedSIO(SOFunction::constant(a), SOFunction::constant(b), SOFunction::constant(a),
                              SOFunction::constant(b), SOSShift::multiplicative(std::exp(1.0)), p);
        };
        const bool ok = fredholmCheck(constant(2.0, 1.0)).overall == Overall::Fredholm &&
                        fredholmCheck(constant(1.0, std::exp(0.5))).overall == Overall::NotFredholm &&
                        fredholmCheck(constant(1.0, 0.0)).overall == Overall::Fredholm;
        record(out, "fredholm/bundled-verdicts", ok ? 0.0 : 1.0, 0.0);
    });

    guarded(out, "so_core/fiber-range", [&] {
        const SOFunction a = SOFunction::parse("2+sin(log(log(t)))", Domain{std::exp(1.0), kInf});
        const SOFunction one = SOFunction::constant(1.0);
        const auto fps = estimateFiberPoints({&a, &one, &one, &one, &one}, Endpoint::Infinity);
        double lo = kInf, hi = -kInf;
        for (const auto& fp : fps) {
            lo = std::min(lo, fp.a().real());
            hi = std::max(hi, fp.a().real());
        }
        const double miss = std::max({lo - 1.05, 2.95 - hi, 0.95 - lo, hi - 3.05, 0.0});
        record(out, "so_core/fiber-range", miss, 0.0);
    });

    guarded(out, "limitops/compact-trace", [&] {
        const CompactTestOperator K;
        const auto rows = compactLimitTrace(K, {12.0}, {logGaussian(g, 0.0, 1.0), logGaussian(g, 1.0, 0.7, 0.5)}, p);
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.discrepancy);
        record(out, "limitops/compact-trace", worst, 1e-3);
    });

    guarded(out, "limitops/modulation-trace", [&] {
        const LogGrid gd = g.decimated(8);
        const auto rows = modulationLimitExperiment(p, {20.0, -20.0}, {logGaussian(gd, 0.0, 0.7), logGaussian(gd, 0.0, 1.0)});
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.discrepancy);
        record(out, "limitops/modulation-trace", worst, 1e-4);
    });

    guarded(out, "limitops/dilation-trace", [&] {
        const Domain dom{std::exp(1.0), kInf};
        const ShiftedSIO op(SOFunction::parse("2+sin(log(log(t)))", dom), SOFunction::constant(1.0),
                            SOFunction::constant(2.0), SOFunction::constant(1.0), SOSShift::multiplicative(std::exp(1.0)),
                            p);
        const auto fps = estimateFiberPoints(op.tuple(), Endpoint::Infinity);
        const auto& fp = *std::max_element(fps.begin(), fps.end(),
                                           [](const auto& x, const auto& y) { return x.a().real() < y.a().real(); });
        const std::size_t m = fp.sourceSequence.size();
        std::vector<std::size_t> idx;
        for (std::size_t k = 12; k < 16; ++k) idx.push_back(k * (m - 1) / 15);
        const auto ex = dilationLimitExperiment(op, fp, idx, {logGaussian(g, 0.0, 1.0), logGaussian(g, 1.5, 1.0, 0.3)});
        double worst = 0.0;
        for (const auto& r : ex.rows) worst = std::max(worst, r.discrepancy);
        record(out, "limitops/dilation-trace", worst, 1e-2);
    });

    return out;
}

}  // namespace sioshift
