#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "effmass/spectra.hpp"

using namespace effmass;

namespace {

struct Draw {
    FamilyCoeffs k;
    ParamTriple p;
};

// Random validated parameters for each family; a fixed seed keeps failures reproducible.
Draw random_draw(Family f, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.2, 2.0);
    for (;;) {
        Draw d;
        d.p = {u(rng), u(rng), u(rng)};
        switch (f) {
        case Family::ho: d.k = {u(rng), 0, 0}; break;
        case Family::morse: d.k = {-pos(rng), u(rng), 0}; break;
        case Family::pt_trig:
        case Family::pt_hyp: d.k = {u(rng), u(rng), u(rng)}; break;
        case Family::coulomb: break;
        }
        if (validate(f, d.k, d.p).ok())
            return d;
    }
}

} // namespace

TEST(SpectrumSum, WorkedExamples)
{
    EXPECT_EQ(spectrum_sum(Family::ho, {1, 0, 0}, {1, 0, 0}, 4).energies(), (std::vector<double>{0, 4, 4, 8, 8}));
    EXPECT_EQ(spectrum_sum(Family::morse, {-1, 1, 0}, {1, 2.5, 0}, 3).energies(),
              (std::vector<double>{0, 8, 10, 14}));
    auto pt = spectrum_sum(Family::pt_trig, {1, 0, 1}, {2, 0, 1}, 2).energies();
    EXPECT_EQ(pt[1], 24.0);
    EXPECT_EQ(pt[2], 8.0);
    EXPECT_EQ(spectrum_sum(Family::ho, {1, 0, 0}, {1, 0, 0}, 0).energies(), (std::vector<double>{0}));
}

TEST(SpectrumSum, NegativeRemainderWarns)
{
    auto t = spectrum_sum(Family::pt_trig, {1, 0, 1}, {2, 0, 1}, 2);
    ASSERT_EQ(t.warnings.size(), 1u);
    EXPECT_NE(t.warnings[0].find("R(1)"), std::string::npos);
    EXPECT_EQ(t.levels.size(), 3u);
}

TEST(SpectrumSum, HarmonicParity)
{
    const double a = 0.7, lam = 1.3;
    auto e = spectrum_sum(Family::ho, {a, 0, 0}, {lam, 0, 0.4}, 12).energies();
    for (std::size_t n = 0; n + 2 < e.size(); ++n)
        EXPECT_NEAR(e[n + 2] - e[n], 4 * a * lam, 1e-12);
}

TEST(SpectrumClosed, WorkedExamples)
{
    EXPECT_EQ(spectrum_closed(Family::ho, {1, 0, 0}, {1, 0, 0}, 1).levels[1].E, 4.0);
    EXPECT_EQ(spectrum_closed(Family::morse, {-1, 1, 0}, {1, 2.5, 0}, 2).levels[2].E, 10.0);
    auto pt = spectrum_closed(Family::pt_trig, {1, 0, 1}, {2, 0, 1}, 2);
    EXPECT_EQ(pt.levels[1].E, 24.0);
    EXPECT_EQ(pt.levels[2].E, 8.0);
    EXPECT_FALSE(pt.warnings.empty());
    EXPECT_THROW(spectrum_closed(Family::coulomb, {1, 2, 1}, {1, 0, 0}, 2), ConfigError);
}

TEST(SpectrumClosed, MatchesPartialSums)
{
    std::mt19937_64 rng(2024);
    for (Family f : {Family::ho, Family::morse, Family::pt_trig, Family::pt_hyp}) {
        for (int trial = 0; trial < 60; ++trial) {
            const Draw d = random_draw(f, rng);
            auto s = spectrum_sum(f, d.k, d.p, 20).energies();
            auto c = spectrum_closed(f, d.k, d.p, 20).energies();
            for (int n = 0; n <= 20; ++n)
                EXPECT_NEAR(c[n], s[n], 1e-10 * std::max(1.0, std::abs(s[n]))) << to_string(f) << " n=" << n;
        }
    }
}

TEST(PtReduced, WorkedExample)
{
    auto t = pt_reduced_closed(Family::pt_trig, {1, 0, 1}, {2, 0, 1}, 2);
    EXPECT_EQ(t.levels[1].E, 24.0);
    EXPECT_EQ(t.levels[2].E, 8.0);
    EXPECT_TRUE(t.warnings.empty());
}

TEST(PtReduced, AgreesWhenProductIsUnit)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.3, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double a = pos(rng) * (trial % 2 ? 1 : -1);
        const ParamTriple p{u(rng), 0, u(rng)};
        const FamilyCoeffs trig{a, 0, 1 / a}, hyp{a, 0, -1 / a};
        auto st = spectrum_sum(Family::pt_trig, trig, p, 12).energies();
        auto rt = pt_reduced_closed(Family::pt_trig, trig, p, 12).energies();
        auto sh = spectrum_sum(Family::pt_hyp, hyp, p, 12).energies();
        auto rh = pt_reduced_closed(Family::pt_hyp, hyp, p, 12).energies();
        for (int n = 0; n <= 12; ++n) {
            EXPECT_NEAR(rt[n], st[n], 1e-9 * std::max(1.0, std::abs(st[n])));
            EXPECT_NEAR(rh[n], sh[n], 1e-9 * std::max(1.0, std::abs(sh[n])));
        }
    }
}

TEST(PtReduced, GeneralProductNeedsScaledForm)
{
    // For a c != 1 the sums follow a c [1/2 + l/a + n - (rho/c + 1/2)(-1)^n]^2 - a c (l/a - rho/c)^2.
    const FamilyCoeffs k{1.5, 0, 0.4};
    const ParamTriple p{0.9, 0, 0.3};
    auto s = spectrum_sum(Family::pt_trig, k, p, 10).energies();
    auto r = pt_reduced_closed(Family::pt_trig, k, p, 10);
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_GT(std::abs(r.levels[1].E - s[1]), 1e-3);
    const double ac = k.a * k.c;
    for (int n = 0; n <= 10; ++n) {
        const double sg = n % 2 ? -1.0 : 1.0;
        const double t = 0.5 + p.lambda / k.a + n - (p.rho / k.c + 0.5) * sg;
        const double d = p.lambda / k.a - p.rho / k.c;
        EXPECT_NEAR(ac * t * t - ac * d * d, s[n], 1e-11 * std::max(1.0, std::abs(s[n])));
    }
}

TEST(MorseReduced, Examples)
{
    auto t = morse_reduced_spectrum(-1, 2.5, 3);
    EXPECT_EQ(t.energies(), (std::vector<double>{0, 4, 6, 6}));
    EXPECT_TRUE(t.levels[2].bound);
    EXPECT_FALSE(t.levels[3].bound);
    EXPECT_EQ(morse_bound_excited_count(t), 2);

    auto s = morse_reduced_spectrum(-1, 0.5, 3);
    EXPECT_TRUE(s.levels[0].bound);
    EXPECT_EQ(morse_bound_excited_count(s), 0);
    EXPECT_THROW(morse_reduced_spectrum(1, 2.5, 3), ConfigError);
    EXPECT_THROW(morse_reduced_spectrum(-1, -2.5, 3), ConfigError);
}

TEST(MorseReduced, BoundCountFormula)
{
    for (double a : {-1.0, -0.7, -0.25})
        for (double s : {0.3, 1.0, 2.0, 2.5, 3.3}) {
            auto t = morse_reduced_spectrum(a, s, 40);
            EXPECT_EQ(morse_bound_excited_count(t), static_cast<int>(std::ceil(s / std::abs(a))) - 1);
        }
}

TEST(MorseReduced, FormalLimitOfPartialSums)
{
    for (double sigma : {0.5, 2.5, 4.0}) {
        auto sum = spectrum_sum(Family::morse, {-1.0, 0, 0}, {1.0, sigma, 0}, 6).energies();
        auto red = morse_reduced_spectrum(-1.0, sigma, 6).energies();
        for (int n = 0; n <= 6; ++n)
            EXPECT_NEAR(sum[n], red[n], 1e-12);
    }
}

TEST(Coulomb, SumExamples)
{
    const CoulombParams cp{1.0, 1.0, 0, 0.75};
    auto e2 = coulomb_spectrum_sum(cp, 2);
    EXPECT_EQ(e2.floor_index, 0);
    EXPECT_EQ(e2.closed, -0.75);
    auto e4 = coulomb_spectrum_sum(cp, 4);
    EXPECT_EQ(e4.closed, e4.summed);
    EXPECT_EQ(e4.summed, -(0.75) - (0.5625 * 2 + 0.75));
    EXPECT_THROW(coulomb_spectrum_sum(cp, 3), ConfigError);
    auto zero = coulomb_spectrum_sum({1.0, 1.0, 0, 0.0}, 4);
    EXPECT_EQ(zero.closed, 0.0);
    EXPECT_FALSE(zero.valid);
}

TEST(Coulomb, ClosedEqualsSumOnDyadicParameters)
{
    for (int l : {0, 1, 3, 7})
        for (double b : {0.25, 0.75, 1.5, -0.5})
            for (double z : {1.0, 2.0, 0.5})
                for (int N = 0; N <= 40; N += 2) {
                    auto e = coulomb_spectrum_sum({z, 1.0, l, b}, N);
                    EXPECT_EQ(e.closed, e.summed) << "l=" << l << " b=" << b << " N=" << N;
                }
}

TEST(Coulomb, ClosedEqualsSumWithinUlps)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const CoulombParams cp{u(rng), 1.0, trial % 5, u(rng)};
        for (int N = 2; N <= 30; N += 2) {
            auto e = coulomb_spectrum_sum(cp, N);
            const double scale = std::abs(e.closed);
            EXPECT_LE(std::abs(e.closed - e.summed), 4 * std::numeric_limits<double>::epsilon() * scale * N);
        }
    }
}

TEST(Coulomb, EvenStepRemainderMatchesGenericChain)
{
    auto map = std::make_shared<const MuMap>(registry_get("constant", {{"m0", 0.5}}));
    for (int l : {0, 2}) {
        const CoulombParams cp{1.7, 1.0, l, 0.6};
        auto m = FamilyModel::coulomb(0.8, cp, map);
        for (int k = 0; k <= 10; k += 2) {
            const ParamTriple pk = m.params_at(k);
            EXPECT_NEAR(pk.rho, 0.0, 1e-14);
            EXPECT_NEAR(m.remainder(pk), coulomb_remainder_even(cp, k), 1e-12);
        }
    }
}

TEST(Coulomb, ExactAndAsymptotic)
{
    const CoulombParams cp{1.0, 1.0, 0, 0.0};
    EXPECT_DOUBLE_EQ(coulomb_spectrum_nr(cp, 0, CoulombMode::exact).E, -1.0);
    for (int l = 0; l < 10; ++l) {
        auto a = coulomb_spectrum_nr({1.3, 1.0, l, 0.0}, 0, CoulombMode::asymptotic);
        EXPECT_EQ(a.E, 0.0);
        EXPECT_DOUBLE_EQ(a.F, l + 1.0);
        EXPECT_FALSE(a.bounded);
    }
    auto rel = [](int nr, int l) {
        const CoulombParams c{1.0, 1.0, l, 0.0};
        const double ex = coulomb_spectrum_nr(c, nr, CoulombMode::exact).E;
        const double as = coulomb_spectrum_nr(c, nr, CoulombMode::asymptotic).E;
        return std::abs(ex - as) / std::abs(ex);
    };
    EXPECT_LT(rel(40, 40), rel(5, 5));
}

TEST(Coulomb, ReplacementReproducesSum)
{
    // Substituting the level-dependent b into the N = 2(n_r+1) closed form gives the exact expression.
    for (int l : {0, 1, 4})
        for (int nr : {0, 1, 3, 8}) {
            const double z = 1.4;
            auto lv = coulomb_spectrum_nr({z, 1.0, l, 0.0}, nr, CoulombMode::exact);
            auto s = coulomb_spectrum_sum({z, 1.0, l, lv.b_used}, 2 * (nr + 1));
            EXPECT_NEAR(s.closed, lv.E, 1e-12 * std::abs(lv.E));
            EXPECT_TRUE(lv.level_dependent_b);
        }
}

TEST(Coulomb, QuantumMap)
{
    auto q = coulomb_quantum_map(1, 0);
    EXPECT_EQ(q.N, 2);
    EXPECT_EQ(q.n_r, 0);
    EXPECT_EQ(q.s, 1);
    EXPECT_TRUE(q.floor_identity);
    auto r = coulomb_quantum_map(3, 1);
    EXPECT_EQ(r.N, 6);
    EXPECT_EQ(r.n_r, 1);
    EXPECT_EQ(r.s, 3);
    EXPECT_FALSE(r.floor_identity);
    EXPECT_THROW(coulomb_quantum_map(2, 2), ConfigError);
}
