#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "effmass/groundstate.hpp"
#include "effmass/verify.hpp"

using namespace effmass;

namespace {

std::shared_ptr<const MuMap> constant_map()
{
    return std::make_shared<const MuMap>(registry_get("constant", {{"m0", 0.5}}));
}

std::shared_ptr<const MuMap> asinh_map(double alpha)
{
    return std::make_shared<const MuMap>(registry_get("asinh_mu", {{"m0", 0.5}, {"alpha", alpha}}));
}

MassProfile unit_mass() { return registry_get("constant", {{"m0", 0.5}}); }

FamilyModel morse(std::shared_ptr<const MuMap> map, double lambda0, double sigma0)
{
    return FamilyModel(Family::morse, {-1, 0, 0}, {lambda0, sigma0, 0}, std::move(map),
                       ValidationPolicy::allow_formal_limit);
}

} // namespace

TEST(Discretize, LaplacianStencil)
{
    GridSpec g{0.0, 1.0, 99};
    auto t = discretize(unit_mass(), [](double) { return 0.0; }, g);
    const double h = g.h();
    EXPECT_DOUBLE_EQ(t.diag[50], 2.0 / (h * h));
    EXPECT_DOUBLE_EQ(t.off[50], -1.0 / (h * h));
    EXPECT_EQ(t.off.size(), t.diag.size() - 1);
}

TEST(Discretize, VariableMassUsesMidpoints)
{
    auto p = registry_get("asinh_mu", {{"m0", 0.5}, {"alpha", 0.3}});
    GridSpec g{-2.0, 2.0, 199};
    auto t = discretize(p, [](double) { return 0.0; }, g);
    const double h = g.h();
    for (int i : {0, 57, 150}) {
        const double u = p.u(0.5 * (g.x(i) + g.x(i + 1)));
        EXPECT_NEAR(t.off[static_cast<std::size_t>(i)], -u * u / (h * h), 1e-9 * u * u / (h * h));
    }
}

TEST(Discretize, Rejections)
{
    EXPECT_THROW(discretize(unit_mass(), [](double) { return 0.0; }, GridSpec{0, 1, 10}), ConfigError);
    EXPECT_THROW(discretize(unit_mass(), [](double) { return 0.0; }, GridSpec{1, 0, 100}), ConfigError);
    auto cb = FamilyModel::coulomb(1.0, {1, 1, 0, 0.5}, constant_map());
    EXPECT_THROW(discretize(cb, GridSpec{-1, 1, 101}), NumericalError);
}

TEST(Eigen, Oscillator)
{
    GridSpec g{-12, 12, 4000};
    auto t = discretize(unit_mass(), [](double x) { return x * x; }, g);
    auto r = lowest_eigenvalues(t, 6);
    auto coarse = lowest_eigenvalues(discretize(unit_mass(), [](double x) { return x * x; }, g.coarsened()), 6);
    const double h = g.h();
    const double q = std::pow(g.coarsened().h() / h, 2);
    for (int n = 0; n < 6; ++n) {
        const auto i = static_cast<std::size_t>(n);
        EXPECT_NEAR(r.eigenvalues[i], 2 * n + 1, h * h * (n * n + n + 1) / 4.0) << n;
        const double extrapolated = (q * r.eigenvalues[i] - coarse.eigenvalues[i]) / (q - 1.0);
        EXPECT_NEAR(extrapolated, 2 * n + 1, 1e-6) << n;
    }
    for (double res : r.residuals)
        EXPECT_LE(res, 1e-8 * r.norm_estimate);
    EXPECT_DOUBLE_EQ(r.gaps[0], 0.0);
}

TEST(Eigen, OscillatorSecondOrder)
{
    auto err = [](int n) {
        auto t = discretize(unit_mass(), [](double x) { return x * x; }, GridSpec{-12, 12, n});
        return std::abs(lowest_eigenvalues(t, 1).ground_energy - 1.0);
    };
    const double ratio = err(999) / err(1999);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(Eigen, Box)
{
    GridSpec g{0.0, std::numbers::pi, 999};
    auto r = lowest_eigenvalues(discretize(unit_mass(), [](double) { return 0.0; }, g), 5);
    const double h = g.h();
    for (int n = 1; n <= 5; ++n) {
        const double exact = 4.0 / (h * h) * std::pow(std::sin(n * h / 2), 2);
        EXPECT_NEAR(r.eigenvalues[static_cast<std::size_t>(n - 1)], exact, 1e-9);
        EXPECT_NEAR(r.eigenvalues[static_cast<std::size_t>(n - 1)], n * n, std::pow(n, 4) * h * h / 10);
    }
}

TEST(Eigen, KLimit)
{
    auto t = discretize(unit_mass(), [](double) { return 0.0; }, GridSpec{0, 1, 100});
    EXPECT_THROW(lowest_eigenvalues(t, 13), ConfigError);
    EXPECT_THROW(lowest_eigenvalues(t, 0), ConfigError);
}

TEST(Compare, MorseReductionMirror)
{
    // sigma0 < 0 is the sign for which the printed ground state is normalizable
    for (auto map : {constant_map(), asinh_map(0.05)}) {
        auto rep = compare(morse(map, 1.0, -2.5), {-15, 5, 4000}, 3, {5e-3, true});
        EXPECT_NEAR(rep.epsilon0, 0.0, 5e-3);
        EXPECT_NEAR(rep.result.gaps[1], 4.0, 5e-3);
        EXPECT_NEAR(rep.result.gaps[2], 6.0, 5e-3);
    }
}

TEST(Compare, MorsePrintedSignIsFlagged)
{
    auto rep = compare(morse(constant_map(), 1.0, 2.5), {-15, 5, 4000}, 3);
    EXPECT_EQ(rep.algebraic_source, "morse_reduced");
    EXPECT_EQ(rep.algebraic, (std::vector<double>{0, 4, 6}));
    EXPECT_FALSE(rep.factorization_zero);
    EXPECT_FALSE(rep.all_match());
}

TEST(Compare, Hydrogen)
{
    for (int l : {0, 1}) {
        auto cb = FamilyModel::coulomb(1.0, {1, 1, l, 0.5}, constant_map());
        auto rep = compare(cb, {0, 200, 19999}, 3);
        EXPECT_EQ(rep.algebraic_source, "hydrogen_reduction");
        EXPECT_TRUE(rep.all_match());
        for (int nr = 1; nr <= 2; ++nr) {
            const double l1 = l + 1.0;
            const double want = 0.25 * (1 / (l1 * l1) - 1 / ((nr + l1) * (nr + l1)));
            EXPECT_NEAR(rep.result.gaps[static_cast<std::size_t>(nr)] / want, 1.0, 1e-3);
        }
    }
}

TEST(Compare, DegenerateAlgebraIsDiagnostic)
{
    FamilyModel ho(Family::ho, {1, 0, 0}, {1, 0, 0}, constant_map());
    auto rep = compare(ho, {-8, 8, 4000}, 5);
    EXPECT_TRUE(rep.algebraic_degenerate);
    for (const auto& l : rep.levels)
        EXPECT_EQ(l.flag, LevelFlag::diagnostic);
    EXPECT_TRUE(rep.all_match());
}

TEST(Compare, RefusesUnderresolvedGrid)
{
    FamilyModel ho(Family::ho, {1, 0, 0}, {1, 0, 0}, constant_map());
    try {
        compare(ho, {-8, 8, 130}, 5, {1e-6, true});
        FAIL() << "expected refusal";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.code(), "resolution");
    }
}

TEST(Rayleigh, GroundStateMatchesLowestEigenvalue)
{
    for (auto map : {constant_map(), asinh_map(0.05)}) {
        auto m = morse(map, 1.0, -2.5);
        GridSpec g{-15, 5, 4000};
        auto op = discretize(m, g);
        auto psi = psi0_generic(m, g.interior()).psi;
        const double eps0 = lowest_eigenvalues(op, 1).ground_energy;
        EXPECT_NEAR(rayleigh_quotient(op, psi), eps0, 5e-4);
    }
}
