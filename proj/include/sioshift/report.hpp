#pragma once
// Structured-text (JSON) serialisation of verdicts and reports.

#include <json.hpp>

#include <cmath>
#include <string>

#include "config.hpp"
#include "fredholm.hpp"
#include "funcops.hpp"
#include "so_core.hpp"

namespace sioshift {

using Json = nlohmann::ordered_json;

inline Json finiteOrString(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline Json complexJson(cplx z) { return Json::array({finiteOrString(z.real()), finiteOrString(z.imag())}); }

inline const char* toString(Tri t) {
    switch (t) {
        case Tri::Pass: return "pass";
        case Tri::Fail: return "fail";
        case Tri::Unknown: return "unknown";
    }
    return "?";
}

inline std::string fiberId(const FredholmVerdict& v, std::size_t i) {
    return i < v.fibersZero.size() ? "0:" + std::to_string(i) : "inf:" + std::to_string(i - v.fibersZero.size());
}

inline Json toJson(const InstanceConfig& cfg) {
    Json j = Json::object();
    for (const auto& [k, v] : cfg.effective()) j[k] = v;
    return j;
}

inline Json toJson(const LStarEstimate& e) {
    Json j{{"value", finiteOrString(e.value)}, {"witness_log_t", finiteOrString(e.witnessLogT)},
           {"exact", e.exact}, {"stabilized", e.stabilized}};
    if (e.fiberValue) j["fiber_value"] = finiteOrString(*e.fiberValue);
    return j;
}

inline Json toJson(const InvertibilityReport& r) {
    Json j{{"verdict", toString(r.verdict)},
           {"first_branch", toString(r.firstBranch)},
           {"second_branch", toString(r.secondBranch)},
           {"inf_abs_a", finiteOrString(r.infAbsA.value)},
           {"inf_abs_b", finiteOrString(r.infAbsB.value)},
           {"liminf_zero", toJson(r.lowerZero)},
           {"liminf_inf", toJson(r.lowerInf)},
           {"limsup_zero", toJson(r.upperZero)},
           {"limsup_inf", toJson(r.upperInf)}};
    if (r.contraction)
        j["contraction"] = {{"factor", r.contraction->factor}, {"steps", r.contraction->steps},
                            {"scale", r.contraction->scale}};
    j["warnings"] = r.warnings;
    return j;
}

inline Json toJson(const FiberPoint& fp) {
    return {{"endpoint", toString(fp.endpoint)}, {"a", complexJson(fp.a())},    {"b", complexJson(fp.b())},
            {"c", complexJson(fp.c())},          {"d", complexJson(fp.d())},    {"omega", fp.omega()},
            {"members", fp.sourceSequence.size()}, {"cluster_radius", fp.clusterRadius}, {"exact", fp.exact}};
}

inline Json toJson(const FredholmVerdict& v) {
    const auto& c2 = v.condition2;
    Json fibers = Json::array();
    for (std::size_t i = 0; i < v.fibersZero.size() + v.fibersInf.size(); ++i) {
        Json f = toJson(v.fiber(i));
        f["id"] = fiberId(v, i);
        if (i < c2.perFiber.size()) {
            f["symbol_min"] = finiteOrString(c2.perFiber[i].witness.value);
            f["symbol_min_x"] = finiteOrString(c2.perFiber[i].witness.x);
            f["certified"] = finiteOrString(c2.perFiber[i].certified);
        }
        fibers.push_back(std::move(f));
    }
    Json witness = Json::object();
    if (!c2.perFiber.empty())
        witness = {{"fiber", fiberId(v, c2.witness.fiber)}, {"x", finiteOrString(c2.witness.x)},
                   {"abs_n", finiteOrString(c2.witness.value)}, {"in_tail", c2.witness.inTail}};
    return {{"verdict", toString(v.overall)},
            {"condition_i", {{"plus", toJson(v.plus)}, {"minus", toJson(v.minus)}}},
            {"condition_ii",
             {{"result", toString(c2.result)},
              {"margin", finiteOrString(c2.margin)},
              {"certified", finiteOrString(c2.certified)},
              {"exact_fibers", c2.exactFibers},
              {"witness", witness}}},
            {"coverage", {{"fibers_zero", v.fibersZero.size()}, {"fibers_inf", v.fibersInf.size()}}},
            {"fibers", fibers},
            {"warnings", v.warnings}};
}

inline Json toJson(const SOReport& r) {
    Json eps = Json::array();
    for (const auto& e : r.endpoints) {
        Json trace = Json::array();
        for (const auto& s : e.trace) trace.push_back({{"log_r", s.logR}, {"modulus", s.modulus}});
        eps.push_back({{"endpoint", toString(e.endpoint)},
                       {"accepted", e.accepted},
                       {"constant_extension", e.constantExtension},
                       {"trace", trace}});
    }
    return {{"accepted", r.accepted}, {"endpoints", eps}};
}

}  // namespace sioshift
