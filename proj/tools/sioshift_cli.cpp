// sioshift: batch front end.
//
// Exit codes: 0 fredholm / pass, 1 not-fredholm / fail, 2 inconclusive,
// 3 input, parse, domain or I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sioshift/config.hpp"
#include "sioshift/fredholm.hpp"
#include "sioshift/limitops.hpp"
#include "sioshift/report.hpp"
#include "sioshift/selftest.hpp"

using namespace sioshift;

namespace {

constexpr int kExitInputError = 3;

struct IOError : Error {
    using Error::Error;
};

/// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw IOError("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close() {
        stream().flush();
        if (!stream()) throw IOError("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<Endpoint> parseEndpoint(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s == "0" || s == "zero") return Endpoint::Zero;
    if (s == "inf" || s == "infinity") return Endpoint::Infinity;
    throw ConfigError("--endpoint must be 0 or inf");
}

int exitFor(Overall o) {
    switch (o) {
        case Overall::Fredholm: return 0;
        case Overall::NotFredholm: return 1;
        case Overall::Inconclusive: return 2;
    }
    return 2;
}

struct Options {
    std::string config, out, endpoint;
    int fiber = -1;
    bool injectFault = false;
};

int cmdCheck(const Options& o) {
    const auto cfg = loadConfig(o.config);
    const auto v = fredholmCheck(makeInstance(cfg), cfg.fredholmConfig());
    Json j = toJson(v);
    j["config"] = toJson(cfg);
    Output out(o.out);
    out.stream() << j.dump(2) << '\n';
    out.close();
    return exitFor(v.overall);
}

int cmdSymbolDump(const Options& o) {
    const auto cfg = loadConfig(o.config);
    const auto v = fredholmCheck(makeInstance(cfg), cfg.fredholmConfig());
    const auto only = parseEndpoint(o.endpoint);
    const double X = cfg.numerics.X, delta = cfg.numerics.delta;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * X / delta)) + 1;
    Output out(o.out);
    auto& os = out.stream();
    os << "fiberId,x,re,im,abs\n";
    const std::size_t total = v.fibersZero.size() + v.fibersInf.size();
    for (std::size_t i = 0; i < total; ++i) {
        const FiberPoint& fp = v.fiber(i);
        const std::size_t local = i < v.fibersZero.size() ? i : i - v.fibersZero.size();
        if (only && fp.endpoint != *only) continue;
        if (o.fiber >= 0 && local != static_cast<std::size_t>(o.fiber)) continue;
        const std::string id = fiberId(v, i);
        for (std::size_t k = 0; k < n; ++k) {
            const double x = -X + delta * static_cast<double>(k);
            const cplx s = symbolN(fp, cfg.p, x);
            os << id << ',' << num(x) << ',' << num(s.real()) << ',' << num(s.imag()) << ',' << num(std::abs(s)) << '\n';
        }
    }
    out.close();
    return 0;
}

int cmdVerifySO(const Options& o) {
    const auto cfg = loadConfig(o.config);
    const Domain dom{detail::constantReal(cfg.tMin, "instance.t_min"), detail::constantReal(cfg.tMax, "instance.t_max")};
    Json j = Json::object();
    bool all = true;
    for (auto [name, src] : {std::pair{"a", &cfg.a}, {"b", &cfg.b}, {"c", &cfg.c}, {"d", &cfg.d}, {"omega", &cfg.omega}}) {
        std::optional<cplx> z, i;
        if (auto it = cfg.limits.find(std::string(name) + "_zero"); it != cfg.limits.end())
            z = detail::constantComplex(it->second, it->first);
        if (auto it = cfg.limits.find(std::string(name) + "_inf"); it != cfg.limits.end())
            i = detail::constantComplex(it->second, it->first);
        const auto rep = verifySO(SOFunction(parse(*src), dom, z, i), cfg.fiberConfig());
        all = all && rep.accepted;
        j[name] = toJson(rep);
    }
    Output out(o.out);
    out.stream() << j.dump(2) << '\n';
    out.close();
    return all ? 0 : 1;
}

int cmdInvertibility(const Options& o) {
    const auto cfg = loadConfig(o.config);
    const auto op = makeInstance(cfg);
    const auto fc = cfg.fredholmConfig().funcops;
    const auto fz = estimateFiberPoints(op.tuple(), Endpoint::Zero, fc.fiber);
    const auto fi = estimateFiberPoints(op.tuple(), Endpoint::Infinity, fc.fiber);
    const auto plus = checkInvertibility(op.plusOperator(fc.fiber), fc, &fz, &fi);
    const auto minus = checkInvertibility(op.minusOperator(fc.fiber), fc, &fz, &fi);
    Json j{{"plus", toJson(plus)}, {"minus", toJson(minus)}, {"config", toJson(cfg)}};
    Output out(o.out);
    out.stream() << j.dump(2) << '\n';
    out.close();
    if (isInvertible(plus.verdict) && isInvertible(minus.verdict)) return 0;
    if (plus.verdict == InvertibilityVerdict::NotInvertible || minus.verdict == InvertibilityVerdict::NotInvertible)
        return 1;
    return 2;
}

int cmdLimitopTest(const Options& o) {
    const auto cfg = loadConfig(o.config);
    const auto op = makeInstance(cfg);
    const Endpoint s = parseEndpoint(o.endpoint).value_or(Endpoint::Infinity);
    const auto fibers = estimateFiberPoints(op.tuple(), s, cfg.fiberConfig());
    std::size_t which = 0;
    if (o.fiber >= 0)
        which = static_cast<std::size_t>(o.fiber);
    else
        for (std::size_t k = 1; k < fibers.size(); ++k)
            if (fibers[k].sourceSequence.size() > fibers[which].sourceSequence.size()) which = k;
    if (which >= fibers.size())
        throw ConfigError("--fiber " + std::to_string(which) + " out of range (" + std::to_string(fibers.size()) +
                          " fibers)");
    const FiberPoint& fp = fibers[which];
    const std::size_t m = fp.sourceSequence.size();
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < 16; ++k) idx.push_back(k * (m - 1) / 15);
    const LogGrid g = cfg.grid();
    const std::vector<LogGridFunction> tests{logGaussian(g, 0.0, 1.0, 0.0, cfg.p), logGaussian(g, 1.5, 0.8, 0.5, cfg.p),
                                             logGaussian(g, -1.0, 1.3, -0.3, cfg.p)};
    const auto ex = dilationLimitExperiment(op, fp, idx, tests, cfg.numerics.epsCluster);
    Output out(o.out);
    auto& os = out.stream();
    os << "n,parameter,testFnId,discrepancyNorm\n";
    double finalQuarter = 0.0;
    for (const auto& r : ex.rows) {
        os << r.n << ',' << num(r.parameter) << ',' << r.testFn << ',' << num(r.discrepancy) << '\n';
        if (r.n >= 12) finalQuarter = std::max(finalQuarter, r.discrepancy);
    }
    out.close();
    if (ex.resnapWarning) std::cerr << "warning: snapping moved the coefficient tuple by " << ex.maxValueMove << '\n';
    return finalQuarter <= cfg.numerics.limitTol ? 0 : 1;
}

int cmdSelftest(const Options& o) {
    SelftestOptions opt;
    if (o.injectFault) opt.sp = [](double p, double x) { return symbolSP(p, x) * (1.0 + 1e-3); };
    Output out(o.out);
    bool ok = true;
    for (const auto& c : runSelftest(opt)) {
        out.stream() << (c.passed ? "PASS " : "FAIL ") << c.id << " value=" << num(c.value)
                     << " threshold=" << num(c.threshold) << '\n';
        ok = ok && c.passed;
    }
    out.close();
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fredholm criterion for singular integral operators with shift on L^p(R+)"};
    app.require_subcommand(1);
    Options o;

    auto withConfig = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "instance file (INI)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output file (default stdout)");
    };
    auto* check = app.add_subcommand("check", "decide Fredholmness; writes a JSON verdict");
    withConfig(check);
    auto* dump = app.add_subcommand("symbol-dump", "CSV of fiber symbols on [-X, X]");
    withConfig(dump);
    dump->add_option("--endpoint", o.endpoint, "restrict to fibers over 0 or inf");
    dump->add_option("--fiber", o.fiber, "restrict to one fiber index");
    auto* so = app.add_subcommand("verify-so", "slow-oscillation report for a, b, c, d, omega");
    withConfig(so);
    auto* inv = app.add_subcommand("invertibility", "invertibility of aI - bW and cI - dW");
    withConfig(inv);
    auto* lim = app.add_subcommand("limitop-test", "dilation limit-operator trace along one fiber");
    withConfig(lim);
    lim->add_option("--endpoint", o.endpoint, "0 or inf (default inf)");
    lim->add_option("--fiber", o.fiber, "fiber index (default: most populated fiber)");
    auto* self = app.add_subcommand("selftest", "built-in oracle suite");
    self->add_option("--out", o.out, "output file (default stdout)");
    self->add_flag("--inject-fault", o.injectFault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInputError;
    }

    try {
        if (*check) return cmdCheck(o);
        if (*dump) return cmdSymbolDump(o);
        if (*so) return cmdVerifySO(o);
        if (*inv) return cmdInvertibility(o);
        if (*lim) return cmdLimitopTest(o);
        if (*self) return cmdSelftest(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}
