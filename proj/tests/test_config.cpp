#include <gtest/gtest.h>

#include <sstream>

#include "sioshift/config.hpp"
#include "sioshift/report.hpp"

using namespace sioshift;

namespace {

InstanceConfig fromText(const std::string& text) {
    std::istringstream in(text);
    return parseConfig(in);
}

std::string sample(const char* name) { return std::string(SIOSHIFT_SAMPLES) + "/" + name; }

std::string lookup(const InstanceConfig& cfg, const std::string& key) {
    for (const auto& [k, v] : cfg.effective())
        if (k == key) return v;
    return "<missing>";
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
    const auto cfg = fromText("");
    EXPECT_EQ(cfg.p, 2.0);
    EXPECT_EQ(cfg.a, "1");
    EXPECT_EQ(cfg.numerics.N, 4096);
    EXPECT_EQ(lookup(cfg, "numerics.tol"), "0.001");
    EXPECT_EQ(lookup(cfg, "numerics.hilbert_norm"), "1");
    EXPECT_EQ(cfg.grid().count, 1u << 14);
}

TEST(Config, ReadsAllSections) {
    const auto cfg = fromText(
        "[instance]\np = 3\na = 2+sin(log(log(t)))\nomega = 0.5\nt_min = exp(1)\n"
        "[limits]\nb_inf = 1+i\n"
        "[numerics]\nN = 1024\nsigma = 0.5\ntol = 1e-4\nhilbert_norm = 2.5\n");
    EXPECT_EQ(cfg.p, 3.0);
    EXPECT_EQ(cfg.a, "2+sin(log(log(t)))");
    EXPECT_EQ(cfg.limits.at("b_inf"), "1+i");
    EXPECT_EQ(cfg.fiberConfig().samples, 1024);
    EXPECT_EQ(cfg.fiberConfig().sigma, 0.5);
    EXPECT_EQ(cfg.fredholmConfig().condition2.decision.tol, 1e-4);
    EXPECT_EQ(lookup(cfg, "numerics.hilbert_norm"), "2.5");
    EXPECT_EQ(lookup(cfg, "limits.b_inf"), "1+i");
    EXPECT_EQ(lookup(cfg, "instance.t_min"), "exp(1)");
}

TEST(Config, RejectsUnknownKeysAndSections) {
    EXPECT_THROW(fromText("[instance]\nq = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[extra]\nx = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[limits]\nb_middle = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[limits]\ne_inf = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\nsamples = 10\n"), ConfigError);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_THROW(fromText("[instance]\np = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[instance]\np = inf\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\nN = 12x\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\ntol = -1\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\nm = 30\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\nlambda = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\nX = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[numerics]\ntail_fraction = 1\n"), ConfigError);
    EXPECT_THROW(fromText("[instance\np = 2\n"), ConfigError);
    EXPECT_THROW(loadConfig("/nonexistent/instance.ini"), ConfigError);
}

TEST(Config, EffectiveValuesRoundTrip) {
    const auto cfg = fromText("[numerics]\ndelta = 0.1\nsigma = 0.3\n");
    std::ostringstream ini;
    std::string section;
    for (const auto& [k, v] : cfg.effective()) {
        const auto dot = k.find('.');
        if (k.substr(0, dot) != section) {
            section = k.substr(0, dot);
            ini << "[" << section << "]\n";
        }
        ini << k.substr(dot + 1) << " = " << v << "\n";
    }
    const auto back = fromText(ini.str());
    EXPECT_EQ(back.effective(), cfg.effective());
    EXPECT_EQ(back.numerics.delta, 0.1);
}

TEST(Config, BundledSamplesLoad) {
    for (const char* name : {"fredholm_constant.ini", "symbol_zero.ini", "slowly_oscillating.ini", "second_branch.ini"}) {
        const auto cfg = loadConfig(sample(name));
        EXPECT_NO_THROW(makeInstance(cfg)) << name;
    }
    const auto bad = loadConfig(sample("malformed.ini"));
    EXPECT_THROW(makeInstance(bad), ParseError);
}

TEST(Config, DeclaredLimitsReachInstance) {
    const auto cfg = fromText("[instance]\na = 3+1/log(t+2)\nt_min = 0\n[limits]\na_inf = 3\n");
    const auto op = makeInstance(cfg);
    ASSERT_TRUE(op.a().declaredLimit(Endpoint::Infinity).has_value());
    EXPECT_EQ(*op.a().declaredLimit(Endpoint::Infinity), cplx(3.0));
    EXPECT_THROW(makeInstance(fromText("[limits]\na_inf = t\n")), Error);
}

TEST(Report, VerdictJsonIsReparseable) {
    const auto cfg = loadConfig(sample("fredholm_constant.ini"));
    const auto v = fredholmCheck(makeInstance(cfg), cfg.fredholmConfig());
    Json j = toJson(v);
    j["config"] = toJson(cfg);
    const auto back = Json::parse(j.dump(2));
    EXPECT_EQ(back, j);
    EXPECT_EQ(back["verdict"], "fredholm");
    EXPECT_EQ(back["condition_i"]["plus"]["verdict"], "invertible-first-branch");
    EXPECT_NEAR(back["condition_ii"]["margin"].get<double>(), 1.3935, 1e-4);
    EXPECT_EQ(back["config"]["numerics.N"], "4096");
}

TEST(Report, NonFiniteValuesBecomeStrings) {
    EXPECT_EQ(finiteOrString(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(finiteOrString(1.5), 1.5);
    EXPECT_EQ(toString(Tri::Unknown), std::string("unknown"));
}
