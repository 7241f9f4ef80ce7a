#pragma once

// Ground states psi0 annihilated by A = sqrt(U) d/dx sqrt(U) + W_eff.
//
// The kernel is psi0 = U^{-1/2} exp(-int W_eff dmu). Closed forms are the
// family-specific antiderivatives of W_eff multiplied by the same U^{-1/2}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "effmass/error.hpp"
#include "effmass/families.hpp"
#include "effmass/quadrature.hpp"

namespace effmass {

enum class PsiMethod { generic, closed_form };

inline std::string_view to_string(PsiMethod m) { return m == PsiMethod::generic ? "generic" : "closed_form"; }

struct WavefunctionTable {
    std::vector<double> x;
    std::vector<double> psi;
    /// psi = N0 * kernel; log(N0) is kept because N0 itself can overflow.
    double log_normalization = 0.0;
    PsiMethod method = PsiMethod::generic;
    std::vector<std::string> warnings;

    double normalization() const { return std::exp(log_normalization); }
    double max_abs() const
    {
        double m = 0.0;
        for (double v : psi)
            m = std::max(m, std::abs(v));
        return m;
    }
};

struct GroundStateOptions {
    /// psi extrapolated past an endpoint above this fraction of max|psi| means the state does not decay on the grid.
    double divergence_ratio = 1e-4;
    quad::Options quadrature{};
};

namespace detail {

inline double trapezoid_norm2(const std::vector<double>& x, const std::vector<double>& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        s += 0.5 * (x[i + 1] - x[i]) * (f[i] * f[i] + f[i + 1] * f[i + 1]);
    return s;
}

inline void check_grid(const std::vector<double>& grid)
{
    if (grid.size() < 2)
        throw ConfigError("wavefunction grid needs at least two points", {"grid:size"});
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("wavefunction grid must be strictly increasing", {"grid:sorted"});
}

// Turns log|psi| samples into a table normalized to int psi^2 dx = 1.
inline WavefunctionTable normalize_log(const std::vector<double>& grid, const std::vector<double>& log_psi,
                                       PsiMethod method, double divergence_ratio)
{
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : log_psi) {
        if (std::isnan(v))
            throw NumericalError("ground state is not finite on the grid", "nonfinite");
        peak = std::max(peak, v);
    }
    if (!std::isfinite(peak))
        throw NumericalError("ground state vanishes or overflows on the whole grid", "nonfinite");

    WavefunctionTable t;
    t.method = method;
    t.x = grid;
    t.psi.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.psi[i] = std::exp(log_psi[i] - peak);
    const double norm2 = trapezoid_norm2(t.x, t.psi);
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& v : t.psi)
        v *= scale;
    t.log_normalization = std::log(scale) - peak;

    // An end where |psi| is still large and not falling toward the wall means psi is not
    // normalizable there; large but falling means the grid cuts off part of the tail.
    const double mx = t.max_abs();
    const std::size_t n = t.psi.size();
    bool divergent = false;
    double edge = 0.0, cut = 0.0;
    for (const auto [e0, e1, e2] : {std::array<std::size_t, 3>{0, 1, 2}, std::array<std::size_t, 3>{n - 1, n - 2, n - 3}}) {
        const double v = std::abs(t.psi[e0]);
        if (v <= divergence_ratio * mx)
            continue;
        if (n < 3 || v >= std::abs(t.psi[e1])) {
            divergent = true;
            edge = std::max(edge, v / mx);
        } else {
            cut = std::max(cut, std::max(0.0, 3.0 * (t.psi[e0] - t.psi[e1]) + t.psi[e2]) / mx);
        }
    }
    if (divergent) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "ground state does not decay on [%g, %g]: endpoint/max = %.3g (not normalizable here)",
                      grid.front(), grid.back(), edge);
        throw NumericalError(buf, "divergent");
    }
    if (cut > divergence_ratio) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "ground state is cut off at the grid end (extrapolated psi/max = %.3g)", cut);
        t.warnings.emplace_back(buf);
    }
    return t;
}

} // namespace detail

/// psi0 from the integral formula: -1/2 log U(x) - int_{mu(x_0)}^{mu(x)} W_eff dmu, accumulated panel by panel.
inline WavefunctionTable psi0_generic(const FamilyModel& model, const std::vector<double>& grid,
                                      const GroundStateOptions& opt = {})
{
    detail::check_grid(grid);
    const ParamTriple p = model.params0();
    const MuMap& map = model.mumap();
    const MassProfile& prof = model.profile();

    const std::vector<double> mus = map.mu_on(grid);

    auto w = [&](double m) { return model.w_eff_of_mu(m, p); };
    std::vector<double> log_psi(grid.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) {
            auto r = quad::integrate(w, mus[i - 1], mus[i], opt.quadrature);
            if (!r.converged)
                throw NumericalError("ground-state integral did not converge near x = " + std::to_string(grid[i]),
                                     "quadrature");
            acc += r.value;
        }
        log_psi[i] = -0.5 * std::log(prof.u(grid[i])) - acc;
    }
    WavefunctionTable t = detail::normalize_log(grid, log_psi, PsiMethod::generic, opt.divergence_ratio);
    if (model.family() == Family::ho && p.rho / model.coeffs().a > 0.0)
        t.warnings.emplace_back("l = rho0/a > 0: mu^{-l} grows at mu -> 0");
    return t;
}

/// Constraints each closed form needs; empty when the form applies.
inline std::vector<std::string> psi0_closed_violations(const FamilyModel& m)
{
    std::vector<std::string> v;
    const auto& k = m.coeffs();
    const auto& p = m.params0();
    switch (m.family()) {
    case Family::ho:
    case Family::pt_trig:
    case Family::pt_hyp:
        if (p.sigma != 0.0)
            v.emplace_back("sigma0=0");
        if (k.b != 0.0)
            v.emplace_back("b=0");
        break;
    case Family::morse:
        if (p.rho != 0.0)
            v.emplace_back("rho0=0");
        break;
    case Family::coulomb:
        if (!m.coulomb_params())
            v.emplace_back("coulomb:l,Z");
        break;
    }
    return v;
}

/// log of the unnormalized closed-form kernel at x (N0 = 1), with mu = mu(x) given.
inline double log_psi0_closed(const FamilyModel& m, double x, double mu)
{
    auto v = psi0_closed_violations(m);
    if (!v.empty()) {
        std::string msg = "closed-form ground state needs";
        for (const auto& s : v)
            msg += " " + s;
        throw ConfigError(msg, v);
    }
    const auto& k = m.coeffs();
    const auto& p = m.params0();
    const double log_pref = -0.5 * std::log(m.profile().u(x));

    auto need_positive = [&](double t, const char* what) {
        if (!(t > 0.0))
            throw NumericalError(std::string(what) + " must be positive here (x = " + std::to_string(x) + ")",
                                 "domain");
    };

    switch (m.family()) {
    case Family::ho: {
        // mu^{-l} exp(-omega mu^2 / 4), omega = 2 a lambda0, l = rho0 / a
        const double omega = 2.0 * k.a * p.lambda;
        const double l = p.rho / k.a;
        double lg = -omega * mu * mu / 4.0;
        if (l != 0.0) {
            need_positive(mu, "mu");
            lg -= l * std::log(mu);
        }
        return log_pref + lg;
    }
    case Family::morse:
        // exp(-(sigma0 + lambda0 b / a) mu - lambda0 exp(-a mu) / a^2)
        return log_pref - (p.sigma + p.lambda * k.b / k.a) * mu - p.lambda * std::exp(-k.a * mu) / (k.a * k.a);
    case Family::pt_trig: {
        // cos^{lambda/a}(theta) sin^{-rho/c}(theta), theta = sqrt(ac) mu
        const double th = std::sqrt(k.a * k.c) * mu;
        const double cs = std::cos(th), sn = std::sin(th);
        need_positive(cs, "cos(sqrt(ac) mu)");
        double lg = p.lambda / k.a * std::log(cs);
        if (p.rho != 0.0) {
            need_positive(sn, "sin(sqrt(ac) mu)");
            lg -= p.rho / k.c * std::log(sn);
        }
        return log_pref + lg;
    }
    case Family::pt_hyp: {
        // cosh^{lambda/a}(theta) sinh^{-rho/c}(theta), theta = sqrt(-ac) mu
        const double th = std::sqrt(-k.a * k.c) * mu;
        const double at = std::abs(th);
        // log cosh without overflow
        double lg = p.lambda / k.a * (at + std::log1p(std::exp(-2.0 * at)) - std::log(2.0));
        if (p.rho != 0.0) {
            need_positive(th, "sinh(sqrt(-ac) mu)");
            lg -= p.rho / k.c * (th + std::log1p(-std::exp(-2.0 * th)) - std::log(2.0));
        }
        return log_pref + lg;
    }
    case Family::coulomb: {
        // mu^{l+1} exp(-Z e^2 mu / (2(l+1)))
        const auto& cp = *m.coulomb_params();
        need_positive(mu, "mu");
        const double l1 = cp.l + 1.0;
        return log_pref + l1 * std::log(mu) - cp.charge() * mu / (2.0 * l1);
    }
    }
    return 0.0;
}

inline double log_psi0_closed(const FamilyModel& m, double x) { return log_psi0_closed(m, x, m.mumap().mu(x)); }

/// Unnormalized closed-form kernel (N0 = 1).
inline double psi0_closed(const FamilyModel& m, double x) { return std::exp(log_psi0_closed(m, x)); }

inline WavefunctionTable psi0_closed_table(const FamilyModel& m, const std::vector<double>& grid,
                                           const GroundStateOptions& opt = {})
{
    detail::check_grid(grid);
    const std::vector<double> mus = m.mumap().mu_on(grid);
    std::vector<double> lg(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        lg[i] = log_psi0_closed(m, grid[i], mus[i]);
    WavefunctionTable t = detail::normalize_log(grid, lg, PsiMethod::closed_form, opt.divergence_ratio);
    if (m.family() == Family::ho && m.params0().rho / m.coeffs().a > 0.0)
        t.warnings.emplace_back("l = rho0/a > 0: mu^{-l} grows at mu -> 0");
    return t;
}

struct AnnihilationResult {
    /// |sqrt(U) (sqrt(U) psi)' + W_eff psi| / max|psi| at every sample; one-sided stencils at the two ends.
    std::vector<double> pointwise;
    /// Maximum over the interior points where the centred stencil applies.
    double max_interior = 0.0;
};

inline AnnihilationResult annihilation_residual(const FamilyModel& m, const WavefunctionTable& t)
{
    const std::size_t n = t.x.size();
    if (n < 9)
        throw ConfigError("annihilation residual needs at least 9 samples", {"grid:coarse"});
    const double h = (t.x.back() - t.x.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(t.x[i] - t.x[i - 1] - h) > 1e-6 * h)
            throw ConfigError("annihilation residual needs a uniform grid", {"grid:uniform"});

    const MassProfile& prof = m.profile();
    const std::vector<double> mus = m.mumap().mu_on(t.x);
    std::vector<double> su(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        su[i] = std::sqrt(prof.u(t.x[i]));
        f[i] = su[i] * t.psi[i];
    }
    const double scale = t.max_abs();
    const double inv = 1.0 / (12.0 * h);

    AnnihilationResult out;
    out.pointwise.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d;
        if (i >= 2 && i + 2 < n)
            d = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) * inv;
        else if (i == 0)
            d = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * inv;
        else if (i == 1)
            d = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * inv;
        else if (i == n - 2)
            d = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * inv;
        else
            d = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * inv;
        const LocalData ld = m.local(t.x[i], mus[i]);
        const double r = std::abs(su[i] * d + m.w_eff(ld, m.params0()) * t.psi[i]) / scale;
        out.pointwise[i] = r;
        if (i >= 2 && i + 2 < n)
            out.max_interior = std::max(out.max_interior, r);
    }
    return out;
}

/// Max |a - b| / max|b| after both tables are normalized on the same grid.
inline double max_relative_difference(const WavefunctionTable& a, const WavefunctionTable& b)
{
    if (a.x.size() != b.x.size())
        throw ConfigError("wavefunction tables differ in length", {"grid:size"});
    double d = 0.0;
    for (std::size_t i = 0; i < a.psi.size(); ++i)
        d = std::max(d, std::abs(a.psi[i] - b.psi[i]));
    return d / b.max_abs();
}

/// Uniform grid of n points on [lo, hi].
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(hi > lo))
        throw ConfigError("uniform grid needs n >= 2 and hi > lo", {"grid"});
    std::vector<double> g(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

} // namespace effmass
