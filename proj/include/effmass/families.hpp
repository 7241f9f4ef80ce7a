#pragma once

// Shape-invariant families on the pi = -1 branch.
//
// Superpotential W = lambda*phi + rho/phi + sigma + U'/2, with phi(mu) one of
//   ho       phi = a mu + b
//   morse    phi = (b - exp(-a mu)) / a
//   pt_trig  phi =  (sqrt(D)/2a) tan(sqrt(D) mu / 2) - b/2a,   D = 4ac - b^2 > 0
//   pt_hyp   phi = -(sqrt(-D)/2a) tanh(sqrt(-D) mu / 2) - b/2a, D < 0
//   coulomb  phi = -(2 + b mu) / (2 a mu),                   D = 0
//
// All potentials are evaluated from phi and d(phi)/d(mu) in closed form; no
// numerical differentiation is involved. For the Morse form the printed phi
// satisfies d(phi)/d(mu) = b - a phi (not a phi + b), and that is the
// derivative used.

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effmass/error.hpp"
#include "effmass/mu_map.hpp"

namespace effmass {

enum class Family { ho, morse, pt_trig, pt_hyp, coulomb };

inline std::string_view to_string(Family f)
{
    switch (f) {
    case Family::ho: return "ho";
    case Family::morse: return "morse";
    case Family::pt_trig: return "pt_trig";
    case Family::pt_hyp: return "pt_hyp";
    case Family::coulomb: return "coulomb";
    }
    return "?";
}

inline Family parse_family(std::string_view s)
{
    if (s == "ho") return Family::ho;
    if (s == "morse") return Family::morse;
    if (s == "pt_trig" || s == "pttrig") return Family::pt_trig;
    if (s == "pt_hyp" || s == "pthyp") return Family::pt_hyp;
    if (s == "coulomb") return Family::coulomb;
    throw ConfigError("unknown family '" + std::string(s) + "'", {"unknown_family"});
}

/// (lambda, sigma, rho)
struct ParamTriple {
    double lambda = 0.0;
    double sigma = 0.0;
    double rho = 0.0;

    bool finite() const { return std::isfinite(lambda) && std::isfinite(sigma) && std::isfinite(rho); }
    bool operator==(const ParamTriple&) const = default;
};

struct FamilyCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    /// 4ac - b^2
    double discriminant() const { return 4.0 * a * c - b * b; }
};

/// Coulomb data. lambda0 and sigma0 follow from l and Z e^2.
struct CoulombParams {
    double Z = 1.0;
    double e2 = 1.0;
    int l = 0;
    double b = 0.0;

    double charge() const { return Z * e2; }
};

enum class ValidationPolicy { strict, allow_formal_limit };

struct Validation {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }
};

/// One step of the parameter recursion lambda_k -> lambda_{k+1}.
inline ParamTriple next_params(Family f, const FamilyCoeffs& k, const ParamTriple& p)
{
    switch (f) {
    case Family::ho:
        return {p.lambda, p.sigma, -(p.rho + k.a)};
    case Family::morse:
        return {p.lambda, p.sigma + k.a, -(p.rho + k.b)};
    case Family::pt_trig:
    case Family::pt_hyp:
    case Family::coulomb:
        return {p.lambda + k.a, p.sigma + k.b, -(p.rho + k.c)};
    }
    return p;
}

/// The constant q of the separated condition, for the step p -> next.
inline double separation_constant(Family f, const FamilyCoeffs& k, const ParamTriple& p, const ParamTriple& next)
{
    switch (f) {
    case Family::ho: return k.a * (next.lambda + p.lambda);
    case Family::morse: return k.b * (next.lambda + p.lambda);
    default: return k.c * (next.lambda + p.lambda) - k.a * (next.rho - p.rho);
    }
}

/// R(p) = q - (sigma1^2 - sigma0^2) - 2(rho1 lambda1 - rho0 lambda0).
inline double remainder_R(Family f, const FamilyCoeffs& k, const ParamTriple& p)
{
    const ParamTriple n = next_params(f, k, p);
    const double q = separation_constant(f, k, p, n);
    return q - (n.sigma * n.sigma - p.sigma * p.sigma) - 2.0 * (n.rho * n.lambda - p.rho * p.lambda);
}

inline Validation validate(Family f, const FamilyCoeffs& k, const ParamTriple& p0,
                           ValidationPolicy policy = ValidationPolicy::strict)
{
    Validation v;
    if (!std::isfinite(k.a) || !std::isfinite(k.b) || !std::isfinite(k.c) || !p0.finite()) {
        v.violations.emplace_back("finite");
        return v;
    }
    const double delta = k.discriminant();
    const double delta_scale = std::max({k.b * k.b, std::abs(4.0 * k.a * k.c), 1e-300});
    const ParamTriple p1 = next_params(f, k, p0);
    const double q = separation_constant(f, k, p0, p1);

    auto require_q = [&] {
        if (q == 0.0) {
            if (policy == ValidationPolicy::allow_formal_limit)
                v.warnings.emplace_back("q!=0");
            else
                v.violations.emplace_back("q!=0");
        }
    };

    switch (f) {
    case Family::ho:
        if (k.a == 0.0)
            v.violations.emplace_back("a!=0");
        require_q();
        break;
    case Family::morse:
        if (!(k.a < 0.0))
            v.violations.emplace_back("a<0");
        require_q();
        break;
    case Family::pt_trig:
        if (k.a == 0.0)
            v.violations.emplace_back("a!=0");
        if (!(delta > 0.0))
            v.violations.emplace_back("delta>0");
        require_q();
        break;
    case Family::pt_hyp:
        if (k.a == 0.0)
            v.violations.emplace_back("a!=0");
        if (!(delta < 0.0))
            v.violations.emplace_back("delta<0");
        require_q();
        break;
    case Family::coulomb:
        if (std::abs(delta) > 1e-12 * delta_scale)
            v.violations.emplace_back("delta=0");
        if (k.a == 0.0)
            v.violations.emplace_back("a!=0");
        if (k.b == 0.0)
            v.violations.emplace_back("b!=0");
        if (p0.rho != 0.0)
            v.violations.emplace_back("rho0=0");
        break;
    }
    return v;
}

/// Quantities at one point x needed by every potential.
struct LocalData {
    double x = 0.0;
    double mu = 0.0;
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
    double phi = 0.0;
    double dphi = 0.0; ///< d(phi)/d(mu) = U(x) phi'(x)
};

struct EffectivePair {
    double v1_eff = 0.0;
    double v2_eff = 0.0;
};

/// Everything tabulated by the potential output at one x.
struct PotentialSample {
    double x = 0.0;
    double mu = 0.0;
    double w = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    double v1_eff = 0.0;
    double v2_eff = 0.0;
};

class FamilyModel {
public:
    static constexpr double pole_guard = 1e-12;
    static constexpr double branch_guard = 1e-6;

    FamilyModel(Family family, FamilyCoeffs coeffs, ParamTriple params0, std::shared_ptr<const MuMap> map,
                ValidationPolicy policy = ValidationPolicy::strict)
        : family_(family), coeffs_(coeffs), params0_(params0), map_(std::move(map))
    {
        if (!map_)
            throw ConfigError("family model needs a mu map", {"mumap"});
        Validation v = validate(family_, coeffs_, params0_, policy);
        if (!v.ok()) {
            std::string msg = "invalid " + std::string(to_string(family_)) + " model:";
            for (const auto& s : v.violations)
                msg += " " + s;
            throw ConfigError(msg, v.violations);
        }
        warnings_ = std::move(v.warnings);
    }

    /// Coulomb model: c = b^2/4a, lambda0 = a(l+1), sigma0 = b(l+1)/2 + Ze^2/(2(l+1)), rho0 = 0.
    static FamilyModel coulomb(double a, const CoulombParams& cp, std::shared_ptr<const MuMap> map)
    {
        if (cp.l < 0)
            throw ConfigError("coulomb: l must be a non-negative integer", {"l>=0"});
        if (a == 0.0)
            throw ConfigError("invalid coulomb model: a!=0", {"a!=0"});
        const double l1 = cp.l + 1.0;
        FamilyCoeffs k{a, cp.b, cp.b * cp.b / (4.0 * a)};
        ParamTriple p{a * l1, 0.5 * cp.b * l1 + cp.charge() / (2.0 * l1), 0.0};
        FamilyModel m(Family::coulomb, k, p, std::move(map));
        m.coulomb_ = cp;
        return m;
    }

    Family family() const { return family_; }
    const FamilyCoeffs& coeffs() const { return coeffs_; }
    const ParamTriple& params0() const { return params0_; }
    const MuMap& mumap() const { return *map_; }
    std::shared_ptr<const MuMap> mumap_ptr() const { return map_; }
    const MassProfile& profile() const { return map_->profile(); }
    const std::optional<CoulombParams>& coulomb_params() const { return coulomb_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    ParamTriple next_params(const ParamTriple& pk) const { return effmass::next_params(family_, coeffs_, pk); }

    /// Parameters after k recursion steps from params0.
    ParamTriple params_at(int k) const
    {
        ParamTriple p = params0_;
        for (int i = 0; i < k; ++i)
            p = next_params(p);
        return p;
    }

    double remainder(const ParamTriple& pk) const { return remainder_R(family_, coeffs_, pk); }

    /// phi as a function of mu.
    double phi_of_mu(double mu) const
    {
        const double a = coeffs_.a, b = coeffs_.b;
        switch (family_) {
        case Family::ho:
            return a * mu + b;
        case Family::morse:
            return (b - std::exp(-a * mu)) / a;
        case Family::pt_trig: {
            const double s = std::sqrt(coeffs_.discriminant());
            const double theta = 0.5 * s * mu;
            if (!(theta >= branch_guard && theta <= 0.5 * std::numbers::pi - branch_guard))
                throw NumericalError("pt_trig: sqrt(D) mu / 2 = " + std::to_string(theta) +
                                         " is outside the principal branch (0, pi/2)",
                                     "branch");
            return s / (2.0 * a) * std::tan(theta) - b / (2.0 * a);
        }
        case Family::pt_hyp: {
            const double s = std::sqrt(-coeffs_.discriminant());
            return -s / (2.0 * a) * std::tanh(0.5 * s * mu) - b / (2.0 * a);
        }
        case Family::coulomb:
            if (mu == 0.0)
                throw NumericalError("coulomb: phi is singular at mu = 0", "pole");
            return -(2.0 + b * mu) / (2.0 * a * mu);
        }
        return 0.0;
    }

    /// d(phi)/d(mu) written through phi.
    double dphi_of_phi(double phi) const
    {
        const auto& k = coeffs_;
        switch (family_) {
        case Family::ho: return k.a;
        case Family::morse: return k.b - k.a * phi;
        default: return (k.a * phi + k.b) * phi + k.c;
        }
    }

    LocalData local(double x) const { return local(x, map_->mu(x)); }

    /// Same as local(x) with mu(x) already known.
    LocalData local(double x, double mu) const
    {
        LocalData d;
        d.x = x;
        d.mu = mu;
        d.u = profile().u(x);
        d.du = profile().du(x);
        d.d2u = profile().d2u(x);
        d.phi = phi_of_mu(d.mu);
        d.dphi = dphi_of_phi(d.phi);
        return d;
    }

    double phi(double x) const { return phi_of_mu(map_->mu(x)); }

    /// W_eff as a function of mu alone.
    double w_eff_of_mu(double mu, const ParamTriple& p) const
    {
        const double ph = phi_of_mu(mu);
        if (p.rho != 0.0 && std::abs(ph) < pole_guard)
            throw NumericalError("superpotential pole: phi = 0 at mu = " + std::to_string(mu) + " with rho != 0",
                                 "pole");
        return p.lambda * ph + (p.rho != 0.0 ? p.rho / ph : 0.0) + p.sigma;
    }

    /// W_eff = lambda phi + rho/phi + sigma.
    double w_eff(const LocalData& d, const ParamTriple& p) const
    {
        check_pole(d, p);
        return p.lambda * d.phi + (p.rho != 0.0 ? p.rho / d.phi : 0.0) + p.sigma;
    }

    /// U W_eff' = (lambda - rho/phi^2) d(phi)/d(mu).
    double u_dw_eff(const LocalData& d, const ParamTriple& p) const
    {
        check_pole(d, p);
        const double inv = p.rho != 0.0 ? p.rho / (d.phi * d.phi) : 0.0;
        return (p.lambda - inv) * d.dphi;
    }

    double superpotential(const LocalData& d, const ParamTriple& p) const { return w_eff(d, p) + 0.5 * d.du; }

    /// V1 = W^2 - (U W)'.
    double v1(const LocalData& d, const ParamTriple& p) const
    {
        const double w = superpotential(d, p);
        return w * w - d.du * w - u_dw_eff(d, p) - 0.5 * d.u * d.d2u;
    }

    /// V2 = V1 + 2 U W' - U U''.
    double v2(const LocalData& d, const ParamTriple& p) const { return v1(d, p) + 2.0 * u_dw_eff(d, p); }

    EffectivePair effective_pair(const LocalData& d, const ParamTriple& p) const
    {
        const double w = w_eff(d, p);
        const double g = u_dw_eff(d, p);
        return {w * w - g, w * w + g};
    }

    double superpotential(double x) const { return superpotential(local(x), params0_); }
    double superpotential(double x, const ParamTriple& p) const { return superpotential(local(x), p); }
    double v1(double x) const { return v1(local(x), params0_); }
    double v1(double x, const ParamTriple& p) const { return v1(local(x), p); }
    double v2(double x) const { return v2(local(x), params0_); }
    double v2(double x, const ParamTriple& p) const { return v2(local(x), p); }
    EffectivePair effective_pair(double x) const { return effective_pair(local(x), params0_); }
    EffectivePair effective_pair(double x, const ParamTriple& p) const { return effective_pair(local(x), p); }

    PotentialSample sample(double x) const
    {
        const LocalData d = local(x);
        const EffectivePair e = effective_pair(d, params0_);
        return {x, d.mu, superpotential(d, params0_), v1(d, params0_), v2(d, params0_), e.v1_eff, e.v2_eff};
    }

private:
    void check_pole(const LocalData& d, const ParamTriple& p) const
    {
        if (p.rho != 0.0 && std::abs(d.phi) < pole_guard)
            throw NumericalError("superpotential pole: phi(" + std::to_string(d.x) + ") = 0 with rho != 0",
                                 "pole");
    }

    Family family_;
    FamilyCoeffs coeffs_;
    ParamTriple params0_;
    std::shared_ptr<const MuMap> map_;
    std::optional<CoulombParams> coulomb_;
    std::vector<std::string> warnings_;
};

struct ShapeCheck {
    double max_residual = 0.0;
    double max_abs_potential = 0.0;
    double remainder = 0.0;
    ParamTriple params0;
    ParamTriple params1;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    double worst_x = 0.0;

    /// Residual relative to max(1, max|V|).
    double scaled() const { return max_residual / std::max(1.0, max_abs_potential); }
};

/// max_x |V2,eff(x; p0) - V1,eff(x; p1) - R(p0)| with p1 = next_params(p0).
/// Grid points where either potential hits a pole or branch limit are skipped.
template <class Grid>
ShapeCheck shape_invariance_residual(const FamilyModel& model, const Grid& grid,
                                     std::optional<ParamTriple> params1 = std::nullopt)
{
    ShapeCheck out;
    out.params0 = model.params0();
    out.params1 = params1.value_or(model.next_params(out.params0));
    out.remainder = model.remainder(out.params0);
    for (double x : grid) {
        double res, scale;
        try {
            const LocalData d = model.local(x);
            const double v2 = model.effective_pair(d, out.params0).v2_eff;
            const double v1 = model.effective_pair(d, out.params1).v1_eff;
            res = std::abs(v2 - v1 - out.remainder);
            scale = std::max(std::abs(v1), std::abs(v2));
        } catch (const NumericalError&) {
            ++out.skipped;
            continue;
        }
        ++out.evaluated;
        out.max_abs_potential = std::max(out.max_abs_potential, scale);
        if (res > out.max_residual || std::isnan(res)) {
            out.max_residual = res;
            out.worst_x = x;
        }
    }
    return out;
}

} // namespace effmass
