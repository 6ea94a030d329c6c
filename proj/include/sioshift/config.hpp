#pragma once
// Instance files: INI sections [instance], [limits], [numerics].
//
//   [instance]              [limits]            [numerics]
//   p = 2                   a_inf = 3           L = 12        sigma = 0.7
//   a = 2+sin(log(log(t)))  b_zero = 1+2*i      m = 14        N = 4096
//   b = 1                                       X = 8         tail_fraction = 0.03125
//   c = 2                                       delta = 0.00390625
//   d = 1                                       eps_cluster = 0.01
//   omega = 1                                   tol = 0.001
//   t_min = exp(1)                              lambda = 0.5  so_tol = 0.01
//   t_max = inf                                 limit_tol = 0.01
//                                               hilbert_norm = (cot(pi/(2 max(p,q))))
//
// Numbers in [instance] t_min/t_max and every [limits] entry are constant
// expressions of the coefficient language.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fredholm.hpp"
#include "mellin.hpp"

namespace sioshift {

struct NumericsConfig {
    double L = 12.0;
    int m = 14;
    double X = 8.0;
    double delta = 1.0 / 256.0;
    double sigma = 0.7;
    int N = 4096;
    double tailFraction = 1.0 / 32.0;
    double epsCluster = 1e-2;
    double tol = 1e-3;
    double lambda = 0.5;
    double soTol = 1e-2;
    double limitTol = 1e-2;
    std::optional<double> hilbertNorm;
};

struct InstanceConfig {
    double p = 2.0;
    std::string a = "1", b = "0", c = "1", d = "0", omega = "1";
    std::string tMin = "0", tMax = "inf";
    /// key "<fn>_<zero|inf>" -> constant expression
    std::map<std::string, std::string> limits;
    NumericsConfig numerics;

    FiberConfig fiberConfig() const {
        FiberConfig f;
        f.sigma = numerics.sigma;
        f.samples = numerics.N;
        f.tailFraction = numerics.tailFraction;
        f.epsCluster = numerics.epsCluster;
        f.lambda = numerics.lambda;
        f.soTol = numerics.soTol;
        return f;
    }

    FredholmConfig fredholmConfig() const {
        FredholmConfig f;
        f.funcops.fiber = fiberConfig();
        f.funcops.decision.tol = numerics.tol;
        f.condition2.decision.tol = numerics.tol;
        f.condition2.X = numerics.X;
        f.condition2.delta = numerics.delta;
        return f;
    }

    LogGrid grid() const { return LogGrid::symmetric(numerics.L, numerics.m); }

    /// Every effective setting as ordered key/value text.
    std::vector<std::pair<std::string, std::string>> effective() const;
};

namespace detail {

inline std::string formatDouble(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    double back = 0;
    for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream t;
        t.precision(prec);
        t << v;
        back = std::stod(t.str());
        if (back == v) return t.str();
    }
    return os.str();
}

/// Constant expression or "inf".
inline double constantReal(const std::string& text, const std::string& key) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    const Expr e = parse(text);
    if (e.dependsOnVar()) throw ConfigError(key + " must be a constant expression");
    const cplx v = e.eval(1.0);
    if (v.imag() != 0.0) throw ConfigError(key + " must be real");
    return v.real();
}

inline cplx constantComplex(const std::string& text, const std::string& key) {
    const Expr e = parse(text);
    if (e.dependsOnVar()) throw ConfigError(key + " must be a constant expression");
    return e.eval(1.0);
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::string>> InstanceConfig::effective() const {
    using detail::formatDouble;
    std::vector<std::pair<std::string, std::string>> kv = {
        {"instance.p", formatDouble(p)},
        {"instance.a", a},
        {"instance.b", b},
        {"instance.c", c},
        {"instance.d", d},
        {"instance.omega", omega},
        {"instance.t_min", tMin},
        {"instance.t_max", tMax},
    };
    for (const auto& [k, v] : limits) kv.emplace_back("limits." + k, v);
    const auto& n = numerics;
    kv.insert(kv.end(), {{"numerics.L", formatDouble(n.L)},
                         {"numerics.m", std::to_string(n.m)},
                         {"numerics.X", formatDouble(n.X)},
                         {"numerics.delta", formatDouble(n.delta)},
                         {"numerics.sigma", formatDouble(n.sigma)},
                         {"numerics.N", std::to_string(n.N)},
                         {"numerics.tail_fraction", formatDouble(n.tailFraction)},
                         {"numerics.eps_cluster", formatDouble(n.epsCluster)},
                         {"numerics.tol", formatDouble(n.tol)},
                         {"numerics.lambda", formatDouble(n.lambda)},
                         {"numerics.so_tol", formatDouble(n.soTol)},
                         {"numerics.limit_tol", formatDouble(n.limitTol)},
                         {"numerics.hilbert_norm", formatDouble(n.hilbertNorm ? *n.hilbertNorm : hilbertNormConstant(p))}});
    return kv;
}

inline InstanceConfig parseConfig(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    InstanceConfig cfg;
    static const std::set<std::string> sections = {"instance", "limits", "numerics"};
    for (const auto& [name, sub] : tree) {
        if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
        (void)sub;
    }

    auto number = [](const pt::ptree& s, const std::string& key, auto& target) {
        if (auto v = s.get_optional<std::string>(key)) {
            try {
                using T = std::decay_t<decltype(target)>;
                std::size_t used = 0;
                if constexpr (std::is_same_v<T, int>)
                    target = std::stoi(*v, &used);
                else
                    target = std::stod(*v, &used);
                if (used != v->size()) throw std::invalid_argument(key);
            } catch (const std::logic_error&) {
                throw ConfigError("numerics." + key + " is not a number: '" + *v + "'");
            }
        }
    };

    if (auto s = tree.get_child_optional("instance")) {
        static const std::set<std::string> keys = {"p", "a", "b", "c", "d", "omega", "t_min", "t_max"};
        for (const auto& [k, v] : *s)
            if (!keys.count(k)) throw ConfigError("unknown key instance." + k);
        if (auto v = s->get_optional<std::string>("p")) cfg.p = detail::constantReal(*v, "instance.p");
        for (auto [key, target] : {std::pair{"a", &cfg.a}, {"b", &cfg.b}, {"c", &cfg.c}, {"d", &cfg.d},
                                   {"omega", &cfg.omega}, {"t_min", &cfg.tMin}, {"t_max", &cfg.tMax}})
            if (auto v = s->get_optional<std::string>(key)) *target = *v;
    }
    if (auto s = tree.get_child_optional("limits")) {
        static const std::set<std::string> fns = {"a", "b", "c", "d", "omega"};
        for (const auto& [k, v] : *s) {
            const auto us = k.rfind('_');
            const std::string fn = us == std::string::npos ? k : k.substr(0, us);
            const std::string end = us == std::string::npos ? "" : k.substr(us + 1);
            if (!fns.count(fn) || (end != "zero" && end != "inf")) throw ConfigError("unknown key limits." + k);
            cfg.limits[k] = v.data();
        }
    }
    if (auto s = tree.get_child_optional("numerics")) {
        static const std::set<std::string> keys = {"L",   "m",           "X",      "delta", "sigma",     "N",
                                                   "tail_fraction", "eps_cluster", "tol", "lambda", "so_tol",
                                                   "limit_tol", "hilbert_norm"};
        for (const auto& [k, v] : *s)
            if (!keys.count(k)) throw ConfigError("unknown key numerics." + k);
        auto& n = cfg.numerics;
        number(*s, "L", n.L);
        number(*s, "m", n.m);
        number(*s, "X", n.X);
        number(*s, "delta", n.delta);
        number(*s, "sigma", n.sigma);
        number(*s, "N", n.N);
        number(*s, "tail_fraction", n.tailFraction);
        number(*s, "eps_cluster", n.epsCluster);
        number(*s, "tol", n.tol);
        number(*s, "lambda", n.lambda);
        number(*s, "so_tol", n.soTol);
        number(*s, "limit_tol", n.limitTol);
        if (s->get_optional<std::string>("hilbert_norm")) {
            double h = 0;
            number(*s, "hilbert_norm", h);
            n.hilbertNorm = h;
        }
    }

    const auto& n = cfg.numerics;
    if (!(cfg.p > 1.0) || !std::isfinite(cfg.p)) throw ConfigError("p must lie in (1, inf)");
    for (double v : {n.L, n.X, n.delta, n.sigma, n.tailFraction, n.epsCluster, n.tol, n.soTol, n.limitTol})
        if (!(v > 0.0)) throw ConfigError("numerics must be positive");
    if (n.m < 4 || n.m > 24 || n.N < 8) throw ConfigError("numerics m must lie in [4, 24] and N >= 8");
    if (!(n.lambda > 0.0 && n.lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
    if (n.tailFraction >= 1.0) throw ConfigError("tail_fraction must be below 1");
    if (n.X < 2.0) throw ConfigError("X must be at least 2");
    return cfg;
}

inline InstanceConfig loadConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    return parseConfig(in);
}

/// Builds the operator; expressions must parse and coefficients must be SO.
inline ShiftedSIO makeInstance(const InstanceConfig& cfg) {
    const Domain dom{detail::constantReal(cfg.tMin, "instance.t_min"), detail::constantReal(cfg.tMax, "instance.t_max")};
    auto fn = [&](const std::string& name, const std::string& src) {
        std::optional<cplx> z, i;
        if (auto it = cfg.limits.find(name + "_zero"); it != cfg.limits.end())
            z = detail::constantComplex(it->second, "limits." + it->first);
        if (auto it = cfg.limits.find(name + "_inf"); it != cfg.limits.end())
            i = detail::constantComplex(it->second, "limits." + it->first);
        return SOFunction(parse(src), dom, z, i);
    };
    const FiberConfig fc = cfg.fiberConfig();
    ShiftConfig sc;
    sc.probeMaxLog = fc.maxLog();
    sc.so = fc;
    return ShiftedSIO(fn("a", cfg.a), fn("b", cfg.b), fn("c", cfg.c), fn("d", cfg.d), SOSShift(fn("omega", cfg.omega), sc),
                      cfg.p, fc);
}

}  // namespace sioshift
