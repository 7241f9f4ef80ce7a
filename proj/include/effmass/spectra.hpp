#pragma once

// Bound-state energies: partial sums of the remainder over the parameter
// chain, the family closed forms, and the Coulomb-specific formulas.

#include <cmath>
#include <string>
#include <vector>

#include "effmass/error.hpp"
#include "effmass/families.hpp"

namespace effmass {

enum class SpectrumMethod { partial_sum, closed_form, reduced };

inline std::string_view to_string(SpectrumMethod m)
{
    switch (m) {
    case SpectrumMethod::partial_sum: return "partial_sum";
    case SpectrumMethod::closed_form: return "closed_form";
    case SpectrumMethod::reduced: return "reduced";
    }
    return "?";
}

struct Level {
    int n = 0;
    double E = 0.0;
    bool bound = true;
};

struct SpectrumTable {
    Family family = Family::ho;
    FamilyCoeffs coeffs;
    ParamTriple params0;
    SpectrumMethod method = SpectrumMethod::partial_sum;
    std::vector<Level> levels;
    std::vector<std::string> warnings;

    std::vector<double> energies() const
    {
        std::vector<double> e;
        e.reserve(levels.size());
        for (const auto& l : levels)
            e.push_back(l.E);
        return e;
    }
};

/// E_n = sum_{k<n} R(p_k) for n = 0..n_max.
inline SpectrumTable spectrum_sum(Family f, const FamilyCoeffs& k, const ParamTriple& p0, int n_max)
{
    if (n_max < 0)
        throw ConfigError("n_max must be non-negative", {"n_max>=0"});
    SpectrumTable t{f, k, p0, SpectrumMethod::partial_sum, {}, {}};
    t.levels.reserve(static_cast<std::size_t>(n_max) + 1);
    ParamTriple p = p0;
    double E = 0.0;
    t.levels.push_back({0, 0.0, true});
    for (int n = 1; n <= n_max; ++n) {
        const double R = remainder_R(f, k, p);
        if (R < 0.0)
            t.warnings.push_back("non-monotone: R(" + std::to_string(n - 1) + ") < 0, E_" + std::to_string(n) +
                                 " < E_" + std::to_string(n - 1));
        E += R;
        p = next_params(f, k, p);
        t.levels.push_back({n, E, true});
    }
    return t;
}

inline SpectrumTable spectrum_sum(const FamilyModel& m, int n_max)
{
    return spectrum_sum(m.family(), m.coeffs(), m.params0(), n_max);
}

/// Closed forms of the partial sums: harmonic, Morse and the general Poschl-Teller expression.
inline double closed_level(Family f, const FamilyCoeffs& k, const ParamTriple& p0, int n)
{
    const double a = k.a, b = k.b, c = k.c;
    const double lam = p0.lambda, sig = p0.sigma, rho = p0.rho;
    const double dn = n;
    const double alt = (n % 2 == 0) ? 0.0 : 2.0; // 1 - (-1)^n
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    switch (f) {
    case Family::ho:
        return 2.0 * a * lam * dn + lam * (a + 2.0 * rho) * alt;
    case Family::morse:
        return dn * (2.0 * b * lam - 2.0 * a * sig - a * a * dn) + lam * (2.0 * rho + b) * alt;
    case Family::pt_trig:
    case Family::pt_hyp:
        return (a * rho + 2.0 * lam * rho + c * lam + 0.5 * a * c) * alt - dn * (2.0 * a * rho + a * c) * sgn +
               dn * (2.0 * c * lam + a * c - 2.0 * b * sig) + dn * dn * (a * c - b * b);
    case Family::coulomb:
        break;
    }
    throw ConfigError("no closed form for the coulomb family here; use the coulomb spectrum functions",
                      {"family:coulomb"});
}

inline SpectrumTable spectrum_closed(Family f, const FamilyCoeffs& k, const ParamTriple& p0, int n_max)
{
    if (n_max < 0)
        throw ConfigError("n_max must be non-negative", {"n_max>=0"});
    SpectrumTable t{f, k, p0, SpectrumMethod::closed_form, {}, {}};
    for (int n = 0; n <= n_max; ++n)
        t.levels.push_back({n, closed_level(f, k, p0, n), true});
    for (int n = 1; n <= n_max; ++n)
        if (t.levels[n].E < t.levels[n - 1].E)
            t.warnings.push_back("non-monotone: E_" + std::to_string(n) + " < E_" + std::to_string(n - 1));
    return t;
}

inline SpectrumTable spectrum_closed(const FamilyModel& m, int n_max)
{
    return spectrum_closed(m.family(), m.coeffs(), m.params0(), n_max);
}

/// The reduced trigonometric / hyperbolic forms printed for sigma = b = 0:
///   trig: [1/2 + lambda0/a + n - (a rho0 + 1/2)(-1)^n]^2 - (lambda0/a - a rho0)^2
///   hyp: -[1/2 + lambda0/a + n + (a rho0 - 1/2)(-1)^n]^2 + (lambda0/a + a rho0)^2
/// They coincide with the partial sums only when a c = 1 (trig) or a c = -1 (hyp).
inline SpectrumTable pt_reduced_closed(Family f, const FamilyCoeffs& k, const ParamTriple& p0, int n_max)
{
    if (f != Family::pt_trig && f != Family::pt_hyp)
        throw ConfigError("reduced Poschl-Teller form needs a pt_trig or pt_hyp model", {"family:pt"});
    if (n_max < 0)
        throw ConfigError("n_max must be non-negative", {"n_max>=0"});
    SpectrumTable t{f, k, p0, SpectrumMethod::reduced, {}, {}};
    const double la = p0.lambda / k.a, ar = k.a * p0.rho;
    for (int n = 0; n <= n_max; ++n) {
        const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
        double E;
        if (f == Family::pt_trig) {
            const double s = 0.5 + la + n - (ar + 0.5) * sgn;
            E = s * s - (la - ar) * (la - ar);
        } else {
            const double s = 0.5 + la + n + (ar - 0.5) * sgn;
            E = -s * s + (la + ar) * (la + ar);
        }
        t.levels.push_back({n, E, true});
    }
    if (k.b != 0.0 || p0.sigma != 0.0)
        t.warnings.emplace_back("reduced form assumes sigma0 = b = 0");
    const double target = f == Family::pt_trig ? 1.0 : -1.0;
    if (k.a * k.c != target)
        t.warnings.emplace_back("reduced form assumes a c = " + std::to_string(static_cast<int>(target)));
    return t;
}

/// sigma0^2 - (sigma0 + a n)^2 for n = 0..n_max; levels with n >= sigma0/|a| are marked unbound.
inline SpectrumTable morse_reduced_spectrum(double a, double sigma0, int n_max)
{
    std::vector<std::string> v;
    if (!(a < 0.0))
        v.emplace_back("a<0");
    if (!(sigma0 > 0.0))
        v.emplace_back("sigma0>0");
    if (n_max < 0)
        v.emplace_back("n_max>=0");
    if (!v.empty())
        throw ConfigError("invalid reduced Morse parameters", v);
    SpectrumTable t{Family::morse, {a, 0.0, 0.0}, {0.0, sigma0, 0.0}, SpectrumMethod::reduced, {}, {}};
    const double limit = sigma0 / std::abs(a);
    for (int n = 0; n <= n_max; ++n) {
        const double s = sigma0 + a * n;
        t.levels.push_back({n, sigma0 * sigma0 - s * s, n < limit});
    }
    return t;
}

inline int morse_bound_excited_count(const SpectrumTable& t)
{
    int count = 0;
    for (const auto& l : t.levels)
        if (l.n > 0 && l.bound)
            ++count;
    return count;
}

// Coulomb

struct CoulombEnergy {
    int N = 0;
    int floor_index = 0; ///< floor((N-1)/2)
    double closed = 0.0;
    double summed = 0.0;
    bool valid = true;
    std::vector<std::string> warnings;
};

/// Remainder at even k along the Coulomb chain: -(b^2 k + Z e^2 b / (l+1)).
inline double coulomb_remainder_even(const CoulombParams& cp, int k)
{
    return -(cp.b * cp.b * k + cp.charge() * cp.b / (cp.l + 1.0));
}

/// Energy after N steps, summing only the even steps where rho_k = 0.
inline CoulombEnergy coulomb_spectrum_sum(const CoulombParams& cp, int N)
{
    if (N < 0 || N % 2 != 0)
        throw ConfigError("coulomb: N must be a non-negative even integer (N = 2n), got " + std::to_string(N),
                          {"N:even"});
    if (cp.l < 0)
        throw ConfigError("coulomb: l must be a non-negative integer", {"l>=0"});
    CoulombEnergy out;
    out.N = N;
    if (N == 0)
        return out;
    const int M = (N - 1) / 2;
    out.floor_index = M;
    const double l1 = cp.l + 1.0;
    out.closed = -cp.b / l1 * (1.0 + M) * (cp.charge() + cp.b * l1 * M);
    double s = 0.0;
    for (int p = 0; p <= M; ++p)
        s += coulomb_remainder_even(cp, 2 * p);
    out.summed = s;
    if (cp.b == 0.0) {
        out.valid = false;
        out.warnings.emplace_back("b!=0");
    }
    return out;
}

enum class CoulombMode { exact, asymptotic };

struct CoulombLevel {
    int n_r = 0;
    int l = 0;
    double E = 0.0;
    double b_used = 0.0; ///< the level-dependent replacement for b
    double F = 0.0;
    double bound_limit = 0.0; ///< Z e^2 / kappa
    bool bounded = false;      ///< F < Z e^2 / kappa
    bool level_dependent_b = true;
};

inline CoulombLevel coulomb_spectrum_nr(const CoulombParams& cp, int n_r, CoulombMode mode)
{
    if (n_r < 0)
        throw ConfigError("coulomb: n_r must be non-negative", {"n_r>=0"});
    if (cp.l < 0)
        throw ConfigError("coulomb: l must be a non-negative integer", {"l>=0"});
    const double ze2 = cp.charge();
    const double l1 = cp.l + 1.0;
    const double nr = n_r;
    const double nl = nr + l1;
    CoulombLevel out;
    out.n_r = n_r;
    out.l = cp.l;
    out.b_used = ze2 / (2.0 * nl) + ze2 / (2.0 * l1);
    const double kappa = ze2 / l1;
    out.F = nr * nr + l1 * (2.0 * nr + 1.0);
    out.bound_limit = ze2 / kappa;
    out.bounded = out.F < out.bound_limit;
    if (mode == CoulombMode::exact) {
        out.E = -ze2 * ze2 * (1.0 + nr) / (4.0 * nl * nl * l1 * l1) * (nr + 2.0 * l1) *
                (nr * nr + 2.0 * nr + 2.0 * l1 * (nr + 1.0));
    } else {
        const double t = kappa * nr * (nr + 2.0 * l1) / (2.0 * nl);
        out.E = -t * t;
    }
    return out;
}

struct QuantumNumbers {
    int N = 0;
    int n_r = 0;
    int s = 0;
    bool floor_identity = false; ///< floor((N-1)/2) == n_r
};

/// (n, l) -> N = 2n, n_r = n - l - 1, s = 2l + 1.
inline QuantumNumbers coulomb_quantum_map(int n, int l)
{
    if (l < 0)
        throw ConfigError("coulomb: l must be non-negative", {"l>=0"});
    if (n <= l)
        throw ConfigError("coulomb: principal quantum number must satisfy n >= l + 1", {"n>=l+1"});
    QuantumNumbers q;
    q.N = 2 * n;
    q.s = 2 * l + 1;
    q.n_r = (q.N - 1 - q.s) / 2;
    q.floor_identity = (q.N - 1) / 2 == q.n_r;
    return q;
}

} // namespace effmass
