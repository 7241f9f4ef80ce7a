#pragma once

// Finite-difference check of the algebraic spectra.
//
// H = -d/dx U^2 d/dx + V1 is discretized in flux form on a uniform interior
// grid with Dirichlet ends; the lowest eigenvalues come from Sturm-sequence
// bisection, eigenvectors from inverse iteration.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "effmass/error.hpp"
#include "effmass/families.hpp"
#include "effmass/spectra.hpp"

namespace effmass {

struct GridSpec {
    double x_lo = 0.0;
    double x_hi = 1.0;
    /// interior unknowns; the end points x_lo, x_hi carry psi = 0
    int n_points = 4000;

    double h() const { return (x_hi - x_lo) / (n_points + 1.0); }
    double x(int i) const { return x_lo + (i + 1.0) * h(); }

    std::vector<double> interior() const
    {
        std::vector<double> v(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i)
            v[static_cast<std::size_t>(i)] = x(i);
        return v;
    }

    /// Same interval with (about) twice the spacing.
    GridSpec coarsened() const { return {x_lo, x_hi, (n_points + 1) / 2 - 1}; }

    void validate(const Interval& domain) const
    {
        std::vector<std::string> v;
        if (!(n_points >= 64))
            v.emplace_back("n_points>=64");
        if (!(x_lo < x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi))
            v.emplace_back("x_lo<x_hi");
        else if (!domain.contains(x_lo) || !domain.contains(x_hi))
            v.emplace_back("grid:domain");
        if (!v.empty())
            throw ConfigError("invalid grid", v);
    }
};

/// Symmetric tridiagonal matrix: diag[i], off[i] couples i and i+1.
struct Tridiagonal {
    GridSpec grid;
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const { return diag.size(); }

    std::pair<double, double> gerschgorin() const
    {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        const std::size_t n = diag.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
            lo = std::min(lo, diag[i] - r);
            hi = std::max(hi, diag[i] + r);
        }
        return {lo, hi};
    }

    double norm_estimate() const
    {
        auto [lo, hi] = gerschgorin();
        return std::max(std::abs(lo), std::abs(hi));
    }

    std::vector<double> apply(const std::vector<double>& v) const
    {
        const std::size_t n = diag.size();
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * v[i];
            if (i > 0)
                s += off[i - 1] * v[i - 1];
            if (i + 1 < n)
                s += off[i] * v[i + 1];
            out[i] = s;
        }
        return out;
    }
};

/// Flux stencil for -d/dx U^2 d/dx + V with an arbitrary profile and potential.
inline Tridiagonal discretize(const MassProfile& profile, const std::function<double(double)>& potential,
                              const GridSpec& grid)
{
    grid.validate(profile.domain);
    const int n = grid.n_points;
    const double h = grid.h();
    const double ih2 = 1.0 / (h * h);
    Tridiagonal t;
    t.grid = grid;
    t.diag.resize(static_cast<std::size_t>(n));
    t.off.resize(static_cast<std::size_t>(n - 1));

    // U^2 at the n+1 cell faces x_{i+1/2}
    std::vector<double> face(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double u = profile.u(grid.x_lo + (i + 0.5) * h);
        face[static_cast<std::size_t>(i)] = u * u;
    }
    for (int i = 0; i < n; ++i) {
        const double lo = face[static_cast<std::size_t>(i)], hi = face[static_cast<std::size_t>(i) + 1];
        if (hi > 4.0 * lo || lo > 4.0 * hi)
            throw ConfigError("grid too coarse for the mass profile near x = " + std::to_string(grid.x(i)),
                              {"grid:coarse"});
        double v;
        try {
            v = potential(grid.x(i));
        } catch (const NumericalError& e) {
            throw NumericalError("potential pole inside the grid at x = " + std::to_string(grid.x(i)) + ": " +
                                     e.what(),
                                 "pole");
        }
        if (!std::isfinite(v))
            throw NumericalError("potential is not finite at x = " + std::to_string(grid.x(i)), "pole");
        t.diag[static_cast<std::size_t>(i)] = (lo + hi) * ih2 + v;
        if (i + 1 < n)
            t.off[static_cast<std::size_t>(i)] = -hi * ih2;
    }
    return t;
}

/// The model operator with V = V1; mu is accumulated along the grid.
inline Tridiagonal discretize(const FamilyModel& model, const GridSpec& grid)
{
    grid.validate(model.profile().domain);
    const std::vector<double> xs = grid.interior();
    const std::vector<double> mus = model.mumap().mu_on(xs);
    std::size_t cursor = 0;
    auto v1 = [&](double x) {
        while (cursor < xs.size() && xs[cursor] < x)
            ++cursor;
        const double mu = cursor < xs.size() && xs[cursor] == x ? mus[cursor] : model.mumap().mu(x);
        return model.v1(model.local(x, mu), model.params0());
    };
    return discretize(model.profile(), v1, grid);
}

struct GridEigenResult {
    GridSpec grid;
    std::vector<double> eigenvalues;
    double ground_energy = 0.0;
    std::vector<double> gaps;
    std::vector<double> residuals;
    std::vector<std::vector<double>> vectors;
    double norm_estimate = 0.0;
    int bisection_steps = 0;
};

namespace detail {

/// Number of eigenvalues strictly below s (LDL^T inertia).
inline int sturm_count(const Tridiagonal& t, double s)
{
    const std::size_t n = t.size();
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    int count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double b2 = i > 0 ? t.off[i - 1] * t.off[i - 1] : 0.0;
        d = t.diag[i] - s - (i > 0 ? b2 / d : 0.0);
        if (std::abs(d) < tiny)
            d = -tiny;
        if (d < 0.0)
            ++count;
    }
    return count;
}

/// Solves (T - s I) x = b with partial pivoting.
inline std::vector<double> shifted_solve(const Tridiagonal& t, double s, std::vector<double> b)
{
    const std::size_t n = t.size();
    std::vector<double> dl(n, 0.0), d(n), du(n, 0.0), du2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = t.diag[i] - s;
        if (i + 1 < n) {
            du[i] = t.off[i];
            dl[i] = t.off[i];
        }
    }
    const double eps = std::numeric_limits<double>::epsilon() * std::max(1.0, t.norm_estimate());
    // LU with row interchanges (as in LAPACK gtsv)
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0)
                d[i] = eps;
            const double f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            const double f = d[i] / dl[i];
            d[i] = dl[i];
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= f * b[i];
            const double tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
        }
    }
    if (d[n - 1] == 0.0)
        d[n - 1] = eps;
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = b[ii];
        if (ii + 1 < n)
            v -= du[ii] * x[ii + 1];
        if (ii + 2 < n)
            v -= du2[ii] * x[ii + 2];
        x[ii] = v / d[ii];
    }
    return x;
}

inline double norm2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

} // namespace detail

struct EigenOptions {
    double abs_tol = 1e-12;
    int max_bisection = 200;
    int inverse_iterations = 3;
    bool keep_vectors = false;
};

inline GridEigenResult lowest_eigenvalues(const Tridiagonal& t, int k, const EigenOptions& opt = {})
{
    if (k < 1 || k > 12)
        throw ConfigError("lowest_eigenvalues: k must be in [1, 12]", {"k<=12"});
    if (static_cast<std::size_t>(k) > t.size())
        throw ConfigError("lowest_eigenvalues: k exceeds the matrix size", {"k<=n"});

    GridEigenResult r;
    r.grid = t.grid;
    r.norm_estimate = t.norm_estimate();
    const auto [g_lo, g_hi] = t.gerschgorin();
    const double eps = std::numeric_limits<double>::epsilon();

    double lo_start = g_lo;
    for (int j = 0; j < k; ++j) {
        // eigenvalue j is the smallest s with count(s) > j
        double lo = lo_start, hi = g_hi;
        int it = 0;
        for (;; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (hi - lo <= std::max(opt.abs_tol, 4.0 * eps * std::max(std::abs(lo), std::abs(hi))) || mid <= lo ||
                mid >= hi)
                break;
            if (it >= opt.max_bisection)
                throw NumericalError("bisection did not converge for eigenvalue " + std::to_string(j), "bisection");
            if (detail::sturm_count(t, mid) > j)
                hi = mid;
            else
                lo = mid;
        }
        r.bisection_steps += it;
        const double lam = 0.5 * (lo + hi);
        r.eigenvalues.push_back(lam);
        lo_start = lo;
    }

    const std::size_t n = t.size();
    for (int j = 0; j < k; ++j) {
        const double lam = r.eigenvalues[static_cast<std::size_t>(j)];
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + j);
        const double shift = lam - std::max(opt.abs_tol, 1e-14 * std::max(1.0, std::abs(lam)));
        for (int it = 0; it < opt.inverse_iterations; ++it) {
            v = detail::shifted_solve(t, shift, std::move(v));
            const double nv = detail::norm2(v);
            for (double& x : v)
                x /= nv;
        }
        // fix the sign so that the first large component is positive
        for (double x : v)
            if (std::abs(x) > 1e-3) {
                if (x < 0.0)
                    for (double& y : v)
                        y = -y;
                break;
            }
        const std::vector<double> tv = t.apply(v);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            res += (tv[i] - lam * v[i]) * (tv[i] - lam * v[i]);
        r.residuals.push_back(std::sqrt(res));
        if (opt.keep_vectors)
            r.vectors.push_back(std::move(v));
    }

    r.ground_energy = r.eigenvalues.front();
    for (double e : r.eigenvalues)
        r.gaps.push_back(e - r.ground_energy);
    return r;
}

/// v^T T v / v^T v
inline double rayleigh_quotient(const Tridiagonal& t, const std::vector<double>& v)
{
    if (v.size() != t.size())
        throw ConfigError("rayleigh quotient: vector length differs from the operator", {"grid:size"});
    const std::vector<double> tv = t.apply(v);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        num += v[i] * tv[i];
        den += v[i] * v[i];
    }
    return num / den;
}

// Comparison against the algebra

enum class LevelFlag { match, mismatch, diagnostic, unbound };

inline std::string_view to_string(LevelFlag f)
{
    switch (f) {
    case LevelFlag::match: return "match";
    case LevelFlag::mismatch: return "mismatch";
    case LevelFlag::diagnostic: return "diagnostic";
    case LevelFlag::unbound: return "unbound";
    }
    return "?";
}

struct LevelComparison {
    int n = 0;
    double numeric = 0.0;
    double gap = 0.0;
    double algebraic = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    double richardson = 0.0; ///< |eps_h - eps_H| / ((H/h)^2 - 1)
    LevelFlag flag = LevelFlag::match;
};

struct CompareOptions {
    double tolerance = 5e-3;
    /// refuse the grid when the Richardson estimate exceeds tolerance
    bool richardson = true;
};

struct CompareReport {
    GridEigenResult result;
    GridSpec coarse;
    std::string algebraic_source;
    std::vector<double> algebraic;
    bool algebraic_monotone = true;
    bool algebraic_degenerate = false;
    double epsilon0 = 0.0;
    bool factorization_zero = false;
    double richardson_error = 0.0;
    double tolerance = 5e-3;
    std::vector<LevelComparison> levels;
    std::vector<std::string> warnings;

    /// epsilon0 vanishes and every level that is not diagnostic or unbound matches
    bool all_match() const
    {
        if (!factorization_zero)
            return false;
        for (const auto& l : levels)
            if (l.flag == LevelFlag::mismatch)
                return false;
        return true;
    }
};

/// Algebraic levels E_0..E_{n-1} used by compare(): partial sums of R, or the hydrogen
/// levels of the reduced Coulomb potential measured from its ground state.
inline std::vector<double> algebraic_levels(const FamilyModel& model, int n_levels, std::string& source,
                                            std::vector<bool>& bound)
{
    bound.assign(static_cast<std::size_t>(n_levels), true);
    if (model.family() == Family::coulomb) {
        const auto& cp = *model.coulomb_params();
        const double l1 = cp.l + 1.0, z = cp.charge();
        std::vector<double> e;
        for (int nr = 0; nr < n_levels; ++nr)
            e.push_back(0.25 * z * z * (1.0 / (l1 * l1) - 1.0 / ((nr + l1) * (nr + l1))));
        source = "hydrogen_reduction";
        return e;
    }
    source = "partial_sum";
    SpectrumTable t = spectrum_sum(model, n_levels - 1);
    if (model.family() == Family::morse && model.coeffs().b == 0.0 && model.params0().rho == 0.0 &&
        model.params0().sigma > 0.0) {
        const SpectrumTable red = morse_reduced_spectrum(model.coeffs().a, model.params0().sigma, n_levels - 1);
        for (std::size_t i = 0; i < red.levels.size(); ++i)
            bound[i] = red.levels[i].bound;
        source = "morse_reduced";
        return red.energies();
    }
    return t.energies();
}

inline CompareReport compare(const FamilyModel& model, const GridSpec& grid, int n_levels,
                             const CompareOptions& opt = {})
{
    if (n_levels < 1 || n_levels > 12)
        throw ConfigError("compare: n_levels must be in [1, 12]", {"k<=12"});
    CompareReport rep;
    rep.tolerance = opt.tolerance;
    const Tridiagonal op = discretize(model, grid);
    rep.result = lowest_eigenvalues(op, n_levels);

    std::vector<double> coarse_eigs;
    rep.coarse = grid.coarsened();
    const double ratio = rep.coarse.h() / grid.h();
    if (opt.richardson) {
        if (rep.coarse.n_points < 64)
            throw ConfigError("compare: grid too small for a two-resolution estimate", {"n_points>=64"});
        coarse_eigs = lowest_eigenvalues(discretize(model, rep.coarse), n_levels).eigenvalues;
    }

    std::vector<bool> bound;
    rep.algebraic = algebraic_levels(model, n_levels, rep.algebraic_source, bound);
    for (std::size_t i = 1; i < rep.algebraic.size(); ++i) {
        if (!bound[i])
            continue;
        if (rep.algebraic[i] < rep.algebraic[i - 1])
            rep.algebraic_monotone = false;
        if (std::abs(rep.algebraic[i] - rep.algebraic[i - 1]) <= 1e-12 * std::max(1.0, std::abs(rep.algebraic[i])))
            rep.algebraic_degenerate = true;
    }
    const bool diagnostic_only = !rep.algebraic_monotone || rep.algebraic_degenerate;
    if (diagnostic_only)
        rep.warnings.emplace_back("algebraic spectrum is non-monotone or degenerate; comparison is diagnostic only");

    rep.epsilon0 = rep.result.ground_energy;
    rep.factorization_zero = std::abs(rep.epsilon0) <= opt.tolerance;
    const double e_ref = rep.algebraic.front();
    for (int n = 0; n < n_levels; ++n) {
        LevelComparison c;
        c.n = n;
        c.numeric = rep.result.eigenvalues[static_cast<std::size_t>(n)];
        c.gap = rep.result.gaps[static_cast<std::size_t>(n)];
        c.algebraic = rep.algebraic[static_cast<std::size_t>(n)] - e_ref;
        c.abs_diff = std::abs(c.gap - c.algebraic);
        c.rel_diff = c.abs_diff / std::max(1.0, std::abs(c.algebraic));
        if (opt.richardson)
            c.richardson = std::abs(c.numeric - coarse_eigs[static_cast<std::size_t>(n)]) / (ratio * ratio - 1.0);
        rep.richardson_error = std::max(rep.richardson_error, c.richardson);
        if (!bound[static_cast<std::size_t>(n)])
            c.flag = LevelFlag::unbound;
        else if (diagnostic_only)
            c.flag = LevelFlag::diagnostic;
        else
            c.flag = c.rel_diff <= opt.tolerance ? LevelFlag::match : LevelFlag::mismatch;
        rep.levels.push_back(c);
    }
    if (opt.richardson && rep.richardson_error > opt.tolerance) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "estimated discretization error %.3g exceeds tolerance %.3g; refine the grid (n_points = %d)",
                      rep.richardson_error, opt.tolerance, grid.n_points);
        throw NumericalError(buf, "resolution");
    }

    // Dirichlet walls should sit well above the highest level sought
    const double top = rep.result.eigenvalues.back();
    for (double x : {grid.x(0), grid.x(grid.n_points - 1)}) {
        // the Coulomb origin is a natural singular endpoint
        if (model.family() == Family::coulomb && x == grid.x(0) && std::abs(model.mumap().mu(grid.x_lo)) <= 1e-12)
            continue;
        try {
            const double v = model.v1(x);
            if (v < top + 0.25 * std::abs(top))
                rep.warnings.push_back("V1(" + std::to_string(x) + ") = " + std::to_string(v) +
                                       " is not 25% above the highest computed level");
        } catch (const NumericalError&) {
        }
    }
    return rep;
}

} // namespace effmass
