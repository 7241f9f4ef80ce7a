#pragma once

// Position-dependent mass profiles m(x), carried through U(x) = 1/sqrt(2 m(x))
// together with analytic U' and U''.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "effmass/error.hpp"

namespace effmass {

using ParamMap = std::map<std::string, double>;
using RealFn = std::function<double(double)>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -inf;
    double hi = inf;

    bool contains(double x) const { return x >= lo && x <= hi; }
    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

struct MassProfile {
    std::string name;
    ParamMap params;
    Interval domain;
    RealFn u;
    RealFn du;
    RealFn d2u;

    /// Antiderivative of 1/U when known in closed form; used as a quadrature oracle.
    RealFn primitive;
    /// Anchor used by MuMap when none is given. -inf anchors at the lower limit.
    double default_anchor = 0.0;

    double mass(double x) const
    {
        const double v = u(x);
        return 1.0 / (2.0 * v * v);
    }

    /// Ordering potential U''U/2 + U'^2/4.
    double ordering_potential(double x) const
    {
        const double d1 = du(x);
        return 0.5 * d2u(x) * u(x) + 0.25 * d1 * d1;
    }
};

/// Sampled (x, m) pairs.
struct MassTable {
    std::vector<double> x;
    std::vector<double> m;
};

namespace detail {

inline double require_param(const ParamMap& params, const std::string& profile, const std::string& key)
{
    auto it = params.find(key);
    if (it == params.end())
        throw ConfigError("profile '" + profile + "' needs parameter '" + key + "'",
                          {"missing:" + key});
    if (!std::isfinite(it->second))
        throw ConfigError("profile '" + profile + "' parameter '" + key + "' is not finite",
                          {"finite:" + key});
    return it->second;
}

inline double require_mass_scale(const ParamMap& params, const std::string& profile)
{
    const double m0 = require_param(params, profile, "m0");
    if (!(m0 > 0.0))
        throw ConfigError("profile '" + profile + "': m0 must be positive", {"m0>0"});
    return m0;
}

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes, as in PCHIP).
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
    {
        const std::size_t n = x_.size();
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            return;
        }
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            delta[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0.0)
                continue;
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
        d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    double value(double x) const { return eval(x, 0); }
    double slope(double x) const { return eval(x, 1); }
    double curvature(double x) const { return eval(x, 2); }

private:
    static double end_slope(double h0, double h1, double del0, double del1)
    {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0)
            return 0.0;
        if (del0 * del1 <= 0.0 && std::abs(d) > 3.0 * std::abs(del0))
            return 3.0 * del0;
        return d;
    }

    double eval(double x, int order) const
    {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        k = std::min(k, x_.size() - 2);
        const double h = x_[k + 1] - x_[k];
        const double t = (x - x_[k]) / h;
        const double y0 = y_[k], y1 = y_[k + 1], m0 = d_[k] * h, m1 = d_[k + 1] * h;
        switch (order) {
        case 0: {
            const double t2 = t * t, t3 = t2 * t;
            return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
                   (t3 - t2) * m1;
        }
        case 1: {
            const double t2 = t * t;
            return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
                    (3 * t2 - 2 * t) * m1) /
                   h;
        }
        default:
            return ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) /
                   (h * h);
        }
    }

    std::vector<double> x_, y_, d_;
};

} // namespace detail

/// Profile from sampled masses: U is interpolated monotonically, U' and U'' are
/// derivatives of that interpolant.
inline MassProfile tabulated_profile(const MassTable& table)
{
    const auto& xs = table.x;
    const auto& ms = table.m;
    if (xs.size() != ms.size())
        throw ConfigError("mass table: x and m columns differ in length", {"table:shape"});
    if (xs.size() < 2)
        throw ConfigError("mass table needs at least two samples", {"table:size"});
    std::vector<double> us(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ms[i]))
            throw ConfigError("mass table contains a non-finite value", {"table:finite"});
        if (!(ms[i] > 0.0))
            throw ConfigError("mass table: m must be positive (row " + std::to_string(i) + ")",
                              {"table:m>0"});
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw ConfigError("mass table: x must be strictly increasing (row " + std::to_string(i) + ")",
                              {"table:sorted"});
        us[i] = 1.0 / std::sqrt(2.0 * ms[i]);
    }

    auto spline = std::make_shared<const detail::MonotoneCubic>(xs, us);
    MassProfile p;
    p.name = "tabulated";
    p.domain = {xs.front(), xs.back()};
    p.u = [spline](double x) { return spline->value(x); };
    p.du = [spline](double x) { return spline->slope(x); };
    p.d2u = [spline](double x) { return spline->curvature(x); };
    p.default_anchor = p.domain.contains(0.0) ? 0.0 : xs.front();
    return p;
}

/// Reads a CSV mass table: header `x,m`, `#` comment lines, strictly increasing x, m > 0.
inline MassTable parse_mass_table(std::istream& in)
{
    MassTable table;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        if (!header_seen) {
            std::string compact;
            for (char c : line)
                if (c != ' ' && c != '\t')
                    compact.push_back(c);
            if (compact != "x,m")
                throw ConfigError("mass table: expected header 'x,m' on line " + std::to_string(line_no),
                                  {"table:header"});
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("mass table: missing comma on line " + std::to_string(line_no),
                              {"table:row"});
        try {
            std::size_t used = 0;
            const std::string xs = line.substr(0, comma), ms = line.substr(comma + 1);
            const double x = std::stod(xs, &used);
            if (xs.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("x");
            const double m = std::stod(ms, &used);
            if (ms.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("m");
            table.x.push_back(x);
            table.m.push_back(m);
        } catch (const std::logic_error&) {
            throw ConfigError("mass table: malformed number on line " + std::to_string(line_no),
                              {"table:row"});
        }
    }
    if (!header_seen)
        throw ConfigError("mass table: empty file", {"table:header"});
    return table;
}

inline MassTable load_mass_table(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open mass table '" + path + "'", {"table:open"});
    return parse_mass_table(in);
}

/// Built-in profiles: constant, exp_mass, asinh_mu, arctan_mu, tabulated.
inline MassProfile registry_get(std::string_view name, const ParamMap& params,
                                const std::optional<MassTable>& table = std::nullopt)
{
    const std::string id(name);
    MassProfile p;

    if (id == "constant") {
        const double m0 = detail::require_mass_scale(params, id);
        const double k = 1.0 / std::sqrt(2.0 * m0);
        p.u = [k](double) { return k; };
        p.du = [](double) { return 0.0; };
        p.d2u = [](double) { return 0.0; };
        p.primitive = [k](double x) { return x / k; };
        p.params = {{"m0", m0}};
    } else if (id == "exp_mass") {
        // m = m0 exp(2 beta x)
        const double m0 = detail::require_mass_scale(params, id);
        const double beta = detail::require_param(params, id, "beta");
        const double k = 1.0 / std::sqrt(2.0 * m0);
        p.u = [k, beta](double x) { return k * std::exp(-beta * x); };
        p.du = [k, beta](double x) { return -beta * k * std::exp(-beta * x); };
        p.d2u = [k, beta](double x) { return beta * beta * k * std::exp(-beta * x); };
        if (beta == 0.0)
            p.primitive = [k](double x) { return x / k; };
        else
            p.primitive = [k, beta](double x) { return std::exp(beta * x) / (beta * k); };
        p.default_anchor = beta > 0.0 ? -inf : 0.0;
        p.params = {{"beta", beta}, {"m0", m0}};
    } else if (id == "asinh_mu") {
        // m = m0 / (1 + (alpha x)^2), mu = sqrt(2 m0) asinh(alpha x) / alpha
        const double m0 = detail::require_mass_scale(params, id);
        const double alpha = detail::require_param(params, id, "alpha");
        if (!(alpha > 0.0))
            throw ConfigError("profile 'asinh_mu': alpha must be positive", {"alpha>0"});
        const double k = 1.0 / std::sqrt(2.0 * m0);
        const double a2 = alpha * alpha;
        p.u = [k, a2](double x) { return k * std::sqrt(1.0 + a2 * x * x); };
        p.du = [k, a2](double x) { return k * a2 * x / std::sqrt(1.0 + a2 * x * x); };
        p.d2u = [k, a2](double x) {
            const double s = 1.0 + a2 * x * x;
            return k * a2 / (s * std::sqrt(s));
        };
        p.primitive = [k, alpha](double x) { return std::asinh(alpha * x) / (alpha * k); };
        p.params = {{"alpha", alpha}, {"m0", m0}};
    } else if (id == "arctan_mu") {
        // m = m0 / (1 + (alpha x)^2)^2, mu = sqrt(2 m0) atan(alpha x) / alpha
        const double m0 = detail::require_mass_scale(params, id);
        const double alpha = detail::require_param(params, id, "alpha");
        if (!(alpha > 0.0))
            throw ConfigError("profile 'arctan_mu': alpha must be positive", {"alpha>0"});
        const double k = 1.0 / std::sqrt(2.0 * m0);
        const double a2 = alpha * alpha;
        p.u = [k, a2](double x) { return k * (1.0 + a2 * x * x); };
        p.du = [k, a2](double x) { return 2.0 * k * a2 * x; };
        p.d2u = [k, a2](double) { return 2.0 * k * a2; };
        p.primitive = [k, alpha](double x) { return std::atan(alpha * x) / (alpha * k); };
        p.params = {{"alpha", alpha}, {"m0", m0}};
    } else if (id == "tabulated") {
        if (!table)
            throw ConfigError("profile 'tabulated' needs a mass table", {"missing:table"});
        p = tabulated_profile(*table);
    } else {
        throw ConfigError("unknown mass profile '" + id + "'", {"unknown_profile"});
    }

    p.name = id;
    return p;
}

} // namespace effmass
