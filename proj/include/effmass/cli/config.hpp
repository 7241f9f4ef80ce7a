#pragma once

// Run configuration: a JSON document, optionally overlaid by command-line values.
//
// {
//   "family":  {"tag": "morse", "a": -1, "b": 1, "c": 0, "lambda0": 1, "sigma0": 2.5, "rho0": 0,
//               "l": 0, "Z": 1, "e2": 1, "formal_limit": false},
//   "profile": {"name": "asinh_mu", "params": {"m0": 0.5, "alpha": 0.1}, "table": "m.csv"},
//   "grid":    {"x_lo": -15, "x_hi": 5, "n_points": 4000},
//   "n": 4,
//   "method": "generic",
//   "format": "csv",
//   "tolerances": {"verify": 5e-3, "shapecheck": 1e-9, "divergence": 1e-4, "richardson": true},
//   "sweep": {"task": ["spectrum", "verify"], "axes": {"family.lambda0": [1, 2, 3]}},
//   "out": "results"
// }

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "effmass/cli/format.hpp"
#include "effmass/families.hpp"
#include "effmass/groundstate.hpp"
#include "effmass/verify.hpp"

namespace effmass::cli {

struct ProfileConfig {
    std::string name = "constant";
    ParamMap params;
    std::string table;
};

struct FamilyConfig {
    Family tag = Family::ho;
    double a = 1.0, b = 0.0, c = 0.0;
    double lambda0 = 1.0, sigma0 = 0.0, rho0 = 0.0;
    int l = 0;
    double Z = 1.0, e2 = 1.0;
    bool formal_limit = false;
};

struct Tolerances {
    double verify = 5e-3;
    double shapecheck = 1e-9;
    double divergence = 1e-4;
    bool richardson = true;
};

struct SweepConfig {
    /// tasks run at every point, in order
    std::vector<std::string> tasks = {"spectrum"};
    /// dotted config path -> values; points are the cartesian product in key order
    std::map<std::string, std::vector<json>> axes;
};

struct RunConfig {
    ProfileConfig profile;
    FamilyConfig family;
    /// explicit window; the family default is used when absent
    std::optional<std::pair<double, double>> window;
    int n_points = 4000;
    int n = 5;
    PsiMethod method = PsiMethod::generic;
    std::string format = "csv";
    Tolerances tol;
    SweepConfig sweep;
    std::string out = ".";
    /// the merged document the config was read from
    json source;
};

namespace detail {

inline const std::map<std::string, std::string>& aliases()
{
    static const std::map<std::string, std::string> m = {
        {"family", "family.tag"},      {"a", "family.a"},
        {"b", "family.b"},             {"c", "family.c"},
        {"lambda0", "family.lambda0"}, {"sigma0", "family.sigma0"},
        {"rho0", "family.rho0"},       {"l", "family.l"},
        {"Z", "family.Z"},             {"e2", "family.e2"},
        {"formal_limit", "family.formal_limit"},
        {"profile", "profile.name"},   {"table", "profile.table"},
        {"m0", "profile.params.m0"},   {"alpha", "profile.params.alpha"},
        {"beta", "profile.params.beta"},
        {"x_lo", "grid.x_lo"},         {"x_hi", "grid.x_hi"},
        {"n_points", "grid.n_points"},
    };
    return m;
}

inline json::json_pointer pointer_for(const std::string& key)
{
    std::string path = key;
    if (auto it = aliases().find(key); it != aliases().end())
        path = it->second;
    std::string ptr;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        ptr += "/" + path.substr(start, dot - start);
        if (dot == std::string::npos)
            break;
        start = dot + 1;
    }
    return json::json_pointer(ptr);
}

inline void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    if (!obj.is_object())
        throw ConfigError("config: '" + where + "' must be an object", {"config:" + where});
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + where + "." + it.key() + "'", {"config:unknown_key"});
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback)
{
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: '" + where + "." + key + "' has the wrong type", {"config:type"});
    }
}

inline int get_int(const json& obj, const char* key, const std::string& where, int fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (v.is_number_integer())
        return v.get<int>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e9)
            return static_cast<int>(d);
    }
    throw ConfigError("config: '" + where + "." + key + "' must be an integer", {"config:type"});
}

} // namespace detail

/// Sets a dotted path (or a short alias such as "lambda0") in a config document.
inline void set_path(json& doc, const std::string& key, const json& value)
{
    doc[detail::pointer_for(key)] = value;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'", {"config:open"});
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what(), {"config:parse"});
    }
}

inline RunConfig parse_config(const json& doc)
{
    using detail::check_keys;
    using detail::get;
    RunConfig c;
    c.source = doc;
    check_keys(doc, "config", {"family", "profile", "grid", "n", "method", "format", "tolerances", "sweep", "out"});

    if (doc.contains("family")) {
        const json& f = doc["family"];
        check_keys(f, "family", {"tag", "a", "b", "c", "lambda0", "sigma0", "rho0", "l", "Z", "e2", "formal_limit"});
        c.family.tag = parse_family(get<std::string>(f, "tag", "family", "ho"));
        c.family.a = get(f, "a", "family", c.family.a);
        c.family.b = get(f, "b", "family", c.family.b);
        c.family.c = get(f, "c", "family", c.family.c);
        c.family.lambda0 = get(f, "lambda0", "family", c.family.lambda0);
        c.family.sigma0 = get(f, "sigma0", "family", c.family.sigma0);
        c.family.rho0 = get(f, "rho0", "family", c.family.rho0);
        c.family.l = detail::get_int(f, "l", "family", 0);
        c.family.Z = get(f, "Z", "family", c.family.Z);
        c.family.e2 = get(f, "e2", "family", c.family.e2);
        c.family.formal_limit = get(f, "formal_limit", "family", false);
    }

    if (doc.contains("profile")) {
        const json& p = doc["profile"];
        check_keys(p, "profile", {"name", "params", "table"});
        c.profile.name = get<std::string>(p, "name", "profile", "constant");
        c.profile.table = get<std::string>(p, "table", "profile", "");
        if (p.contains("params")) {
            if (!p["params"].is_object())
                throw ConfigError("config: 'profile.params' must be an object", {"config:type"});
            for (auto it = p["params"].begin(); it != p["params"].end(); ++it) {
                if (!it.value().is_number())
                    throw ConfigError("config: profile parameter '" + it.key() + "' must be a number",
                                      {"config:type"});
                c.profile.params[it.key()] = it.value().get<double>();
            }
        }
    }
    if (c.profile.name != "tabulated" && !c.profile.params.count("m0"))
        c.profile.params["m0"] = 0.5;

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        check_keys(g, "grid", {"x_lo", "x_hi", "n_points"});
        if (g.contains("x_lo") != g.contains("x_hi"))
            throw ConfigError("config: grid needs both x_lo and x_hi", {"grid:bounds"});
        if (g.contains("x_lo"))
            c.window = std::pair{get(g, "x_lo", "grid", 0.0), get(g, "x_hi", "grid", 0.0)};
        c.n_points = detail::get_int(g, "n_points", "grid", c.n_points);
    }

    c.n = detail::get_int(doc, "n", "config", c.n);
    if (c.n < 1)
        throw ConfigError("config: n must be at least 1", {"n>=1"});
    const std::string method = get<std::string>(doc, "method", "config", "generic");
    if (method == "generic")
        c.method = PsiMethod::generic;
    else if (method == "closed" || method == "closed_form")
        c.method = PsiMethod::closed_form;
    else
        throw ConfigError("config: method must be 'generic' or 'closed'", {"config:method"});
    c.format = get<std::string>(doc, "format", "config", "csv");
    if (c.format != "csv" && c.format != "json")
        throw ConfigError("config: format must be 'csv' or 'json'", {"config:format"});
    c.out = get<std::string>(doc, "out", "config", ".");

    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        check_keys(t, "tolerances", {"verify", "shapecheck", "divergence", "richardson"});
        c.tol.verify = get(t, "verify", "tolerances", c.tol.verify);
        c.tol.shapecheck = get(t, "shapecheck", "tolerances", c.tol.shapecheck);
        c.tol.divergence = get(t, "divergence", "tolerances", c.tol.divergence);
        c.tol.richardson = get(t, "richardson", "tolerances", c.tol.richardson);
        if (!(c.tol.verify > 0) || !(c.tol.shapecheck > 0) || !(c.tol.divergence > 0))
            throw ConfigError("config: tolerances must be positive", {"tolerance>0"});
    }

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        check_keys(s, "sweep", {"task", "axes"});
        if (s.contains("task")) {
            const json& t = s["task"];
            if (t.is_string())
                c.sweep.tasks = {t.get<std::string>()};
            else if (t.is_array() && !t.empty() && std::all_of(t.begin(), t.end(), [](const json& v) { return v.is_string(); }))
                c.sweep.tasks = t.get<std::vector<std::string>>();
            else
                throw ConfigError("config: 'sweep.task' must be a task name or a list of them", {"config:type"});
        }
        if (s.contains("axes")) {
            if (!s["axes"].is_object())
                throw ConfigError("config: 'sweep.axes' must be an object", {"config:type"});
            for (auto it = s["axes"].begin(); it != s["axes"].end(); ++it) {
                if (!it.value().is_array())
                    throw ConfigError("config: sweep axis '" + it.key() + "' must be a list", {"config:type"});
                c.sweep.axes[it.key()] = it.value().get<std::vector<json>>();
            }
        }
    }
    return c;
}

inline MassProfile build_profile(const ProfileConfig& p)
{
    if (p.name == "tabulated") {
        if (p.table.empty())
            throw ConfigError("profile 'tabulated' needs a table path", {"table:path"});
        return registry_get(p.name, p.params, load_mass_table(p.table));
    }
    return registry_get(p.name, p.params);
}

inline FamilyModel build_model(const RunConfig& c)
{
    auto map = std::make_shared<const MuMap>(build_profile(c.profile));
    const auto& f = c.family;
    if (f.tag == Family::coulomb) {
        if (!(f.Z > 0.0) || !(f.e2 > 0.0))
            throw ConfigError("coulomb: Z and e2 must be positive", {"Z>0"});
        return FamilyModel::coulomb(f.a, {f.Z, f.e2, f.l, f.b}, std::move(map));
    }
    return FamilyModel(f.tag, {f.a, f.b, f.c}, {f.lambda0, f.sigma0, f.rho0}, std::move(map),
                       f.formal_limit ? ValidationPolicy::allow_formal_limit : ValidationPolicy::strict);
}

/// Default sampling window, chosen in mu and mapped to x.
inline GridSpec default_grid(const FamilyModel& m, int n_points)
{
    const FamilyCoeffs& k = m.coeffs();
    double lo = -10.0, hi = 10.0;
    switch (m.family()) {
    case Family::ho:
        if (m.params0().rho != 0.0)
            lo = 0.0;
        break;
    case Family::morse:
        lo = k.a < 0 ? -15.0 : -5.0;
        hi = k.a < 0 ? 5.0 : 15.0;
        break;
    case Family::pt_trig:
        lo = 0.0;
        hi = std::numbers::pi / (2.0 * std::sqrt(k.a * k.c));
        break;
    case Family::pt_hyp:
        lo = 0.0;
        hi = 20.0 / std::sqrt(-k.a * k.c);
        break;
    case Family::coulomb:
        lo = 0.0;
        hi = 200.0;
        break;
    }
    const MuMap& map = m.mumap();
    GridSpec g;
    try {
        g.x_lo = map.inverse(lo);
        g.x_hi = map.inverse(hi);
    } catch (const ConfigError&) {
        throw ConfigError("no default grid for this profile; set grid.x_lo and grid.x_hi", {"grid:bounds"});
    }
    g.n_points = n_points;
    return g;
}

inline GridSpec grid_for(const RunConfig& c, const FamilyModel& m)
{
    GridSpec g = c.window ? GridSpec{c.window->first, c.window->second, c.n_points} : default_grid(m, c.n_points);
    g.validate(m.profile().domain);
    return g;
}

} // namespace effmass::cli
