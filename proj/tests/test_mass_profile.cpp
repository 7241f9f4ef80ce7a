#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "effmass/mass_profile.hpp"
#include "effmass/mu_map.hpp"
#include "effmass/quadrature.hpp"

using namespace effmass;

namespace {

MuMap make_map(const std::string& name, ParamMap p, MuMapOptions opt = {})
{
    return MuMap(registry_get(name, p), opt);
}

} // namespace

TEST(Quadrature, PolynomialIsExact)
{
    auto r = quad::integrate([](double x) { return 3 * x * x; }, 0.0, 2.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 8.0, 1e-14);
}

TEST(Quadrature, ReversedLimitsAndInfiniteEnds)
{
    auto r = quad::integrate([](double x) { return std::exp(-x); }, 1.0, 0.0);
    EXPECT_NEAR(r.value, -(1.0 - std::exp(-1.0)), 1e-14);

    auto g = quad::integrate([](double x) { return std::exp(-x * x); }, -inf, inf);
    EXPECT_TRUE(g.converged);
    EXPECT_NEAR(g.value, std::sqrt(std::numbers::pi), 1e-12);

    auto h = quad::integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, inf);
    EXPECT_NEAR(h.value, std::numbers::pi / 2, 1e-12);
}

TEST(Registry, UnknownAndInvalidParameters)
{
    EXPECT_THROW(registry_get("nope", {}), ConfigError);
    EXPECT_THROW(registry_get("constant", {{"m0", 0.0}}), ConfigError);
    EXPECT_THROW(registry_get("constant", {{"m0", -1.0}}), ConfigError);
    EXPECT_THROW(registry_get("exp_mass", {{"m0", 1.0}}), ConfigError);
    EXPECT_THROW(registry_get("tabulated", {}), ConfigError);
    try {
        registry_get("nope", {});
    } catch (const ConfigError& e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_EQ(e.violations()[0], "unknown_profile");
    }
}

TEST(Registry, ConstantUnitMass)
{
    auto p = registry_get("constant", {{"m0", 0.5}});
    EXPECT_DOUBLE_EQ(p.u(1.7), 1.0);
    EXPECT_DOUBLE_EQ(p.mass(-3.0), 0.5);
    MuMap m(p);
    EXPECT_NEAR(m.mu(3.0), 3.0, 1e-13);
    EXPECT_NEAR(m.inverse(2.5), 2.5, 1e-12);
}

TEST(Registry, DerivativesMatchCentralDifferences)
{
    const std::vector<std::pair<std::string, ParamMap>> cases = {
        {"exp_mass", {{"m0", 0.7}, {"beta", 0.4}}},
        {"asinh_mu", {{"m0", 0.5}, {"alpha", 1.3}}},
        {"arctan_mu", {{"m0", 1.1}, {"alpha", 0.6}}},
    };
    for (const auto& [name, params] : cases) {
        auto p = registry_get(name, params);
        for (double x : {-1.7, -0.3, 0.0, 0.8, 2.1}) {
            double errs[2];
            int i = 0;
            for (double h : {1e-3, 1e-4}) {
                const double fd = (p.u(x + h) - p.u(x - h)) / (2 * h);
                const double fd2 = (p.du(x + h) - p.du(x - h)) / (2 * h);
                errs[i++] = std::abs(p.du(x) - fd);
                EXPECT_LE(std::abs(p.d2u(x) - fd2), 1e-4 * std::max(1.0, std::abs(p.d2u(x)))) << name << " x=" << x;
            }
            EXPECT_LE(errs[0], 1e-5) << name;
            EXPECT_LE(errs[1], std::max(0.05 * errs[0], 1e-10)) << name;
        }
    }
}

TEST(MuMap, AsinhExamples)
{
    auto m = make_map("asinh_mu", {{"m0", 0.5}, {"alpha", 1.0}});
    EXPECT_NEAR(m.mu(1.0), std::asinh(1.0), 1e-12);
    EXPECT_NEAR(m.mu(1.0), 0.881374, 1e-6);
    EXPECT_NEAR(m.mu(-2.0), -1.443635, 1e-6);
    EXPECT_NEAR(m.inverse(std::asinh(1.0)), 1.0, 1e-9);
    auto [lo, hi] = m.range();
    EXPECT_EQ(lo, -inf);
    EXPECT_EQ(hi, inf);
}

TEST(MuMap, ExpMassAnchoredAtMinusInfinity)
{
    auto m = make_map("exp_mass", {{"m0", 0.5}, {"beta", 1.0}});
    EXPECT_NEAR(m.mu(0.0), 1.0, 1e-11);
    EXPECT_NEAR(m.mu(2.0), std::exp(2.0), 1e-10);
    EXPECT_NEAR(m.mu(-60.0), std::exp(-60.0), 1e-12);
    EXPECT_NEAR(m.range().first, 0.0, 1e-12);
    EXPECT_THROW(m.inverse(-0.1), ConfigError);
    EXPECT_NEAR(m.inverse(1.0), 0.0, 1e-10);
}

TEST(MuMap, ArctanBoundedRange)
{
    auto m2 = make_map("arctan_mu", {{"m0", 0.5}, {"alpha", 2.0}});
    EXPECT_NEAR(m2.range().second, std::numbers::pi / 4, 1e-10);
    EXPECT_NEAR(m2.mu(1e6), std::atan(2e6) / 2.0, 1e-10);

    auto m1 = make_map("arctan_mu", {{"m0", 0.5}, {"alpha", 1.0}});
    EXPECT_THROW(m1.inverse(std::numbers::pi / 2 + 0.1), ConfigError);
    EXPECT_NEAR(m1.inverse(1.0), std::tan(1.0), 1e-9);
}

TEST(MuMap, OutsideDomainIsConfigError)
{
    MassTable t{{0.0, 1.0, 2.0}, {1.0, 1.5, 2.0}};
    MuMap m(tabulated_profile(t));
    EXPECT_THROW(m.mu(2.5), ConfigError);
    EXPECT_THROW(m.mu(std::nan("")), ConfigError);
}

TEST(MuMap, ClosedFormsAndRoundTrip)
{
    const std::vector<std::pair<std::string, ParamMap>> cases = {
        {"constant", {{"m0", 0.5}}},
        {"exp_mass", {{"m0", 0.5}, {"beta", 0.5}}},
        {"asinh_mu", {{"m0", 0.5}, {"alpha", 1.0}}},
        {"arctan_mu", {{"m0", 0.8}, {"alpha", 0.7}}},
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xs(-20.0, 20.0);
    for (const auto& [name, params] : cases) {
        MuMap m = make_map(name, params);
        const auto& p = m.profile();
        const double c0 = p.default_anchor == -inf ? 0.0 : p.primitive(m.x_ref());
        double prev_x = -inf, prev_mu = -inf;
        std::vector<double> sample(1000);
        for (double& x : sample)
            x = xs(rng);
        std::sort(sample.begin(), sample.end());
        for (double x : sample) {
            const double mu = m.mu(x);
            const double closed = p.primitive(x) - c0;
            // exp_mass grows like e^{beta x}; compare it relative to its size
            EXPECT_NEAR(mu, closed, 1e-10 * (name == "exp_mass" ? std::max(1.0, std::abs(closed)) : 1.0)) << name << " x=" << x;
            if (x > prev_x) {
                EXPECT_GT(mu, prev_mu) << name;
            }
            prev_x = x;
            prev_mu = mu;
            EXPECT_NEAR(m.inverse(mu), x, 1e-9 * std::max(1.0, std::abs(x))) << name;
        }
    }
}

TEST(Tabulated, ParseAndInterpolate)
{
    std::istringstream in("# sample\nx,m\n0,0.5\n1,0.5\n2,0.5\n3,0.5\n");
    MassTable t = parse_mass_table(in);
    ASSERT_EQ(t.x.size(), 4u);
    auto p = registry_get("tabulated", {}, t);
    EXPECT_NEAR(p.u(1.3), 1.0, 1e-14);
    EXPECT_NEAR(p.du(1.3), 0.0, 1e-14);
    MuMap m(p);
    EXPECT_NEAR(m.mu(2.5), 2.5, 1e-12);
}

TEST(Tabulated, MonotoneInterpolantHasNoOvershoot)
{
    MassTable t;
    for (int i = 0; i <= 20; ++i) {
        t.x.push_back(0.25 * i);
        t.m.push_back(i < 10 ? 1.0 : 4.0);
    }
    auto p = tabulated_profile(t);
    for (double x = 0.0; x <= 5.0; x += 0.01) {
        EXPECT_GE(p.u(x), 1.0 / std::sqrt(8.0) - 1e-15);
        EXPECT_LE(p.u(x), 1.0 / std::sqrt(2.0) + 1e-15);
    }
}

TEST(Tabulated, MalformedTables)
{
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_mass_table(in);
    };
    EXPECT_THROW(parse("x,y\n0,1\n"), ConfigError);
    EXPECT_THROW(parse("x,m\n0,1\nbad,2\n"), ConfigError);
    EXPECT_THROW(parse(""), ConfigError);
    EXPECT_THROW(tabulated_profile({{0.0, 0.0}, {1.0, 1.0}}), ConfigError);
    EXPECT_THROW(tabulated_profile({{0.0, 1.0}, {1.0, -1.0}}), ConfigError);
    EXPECT_THROW(tabulated_profile({{0.0}, {1.0}}), ConfigError);
}
