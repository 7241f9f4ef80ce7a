#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "effmass/cli/commands.hpp"

using namespace effmass;
using namespace effmass::cli;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> out, family, profile, table, method, format;
    std::vector<std::string> tasks;
    std::map<std::string, std::optional<double>> reals;
    std::optional<int> l, n_points, n;
    bool formal_limit = false;
    bool no_richardson = false;
    std::vector<std::string> params;
    std::vector<std::string> axes;
};

const std::vector<std::pair<std::string, std::string>> real_flags = {
    {"a", "family.a"},           {"b", "family.b"},
    {"c", "family.c"},           {"lambda0", "family.lambda0"},
    {"sigma0", "family.sigma0"}, {"rho0", "family.rho0"},
    {"Z", "family.Z"},           {"e2", "family.e2"},
    {"m0", "profile.params.m0"}, {"alpha", "profile.params.alpha"},
    {"beta", "profile.params.beta"},
    {"x-lo", "grid.x_lo"},       {"x-hi", "grid.x_hi"},
    {"tol-verify", "tolerances.verify"},
    {"tol-shapecheck", "tolerances.shapecheck"},
    {"tol-divergence", "tolerances.divergence"},
};

void add_options(CLI::App* app, Flags& f, bool sweep)
{
    app->add_option("--config", f.config, "JSON config file; flags override its fields");
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--family", f.family, "ho | morse | pt_trig | pt_hyp | coulomb");
    for (const auto& [name, path] : real_flags)
        app->add_option("--" + name, f.reals[name], path);
    app->add_option("--l", f.l, "Coulomb angular momentum");
    app->add_flag("--formal-limit", f.formal_limit, "Allow the b = 0, rho0 = 0 formal limits");
    app->add_option("--profile", f.profile, "constant | exp_mass | asinh_mu | arctan_mu | tabulated");
    app->add_option("--param", f.params, "Profile parameter NAME=VALUE");
    app->add_option("--table", f.table, "Mass table for the tabulated profile");
    app->add_option("--n-points", f.n_points, "Interior grid points");
    app->add_option("--n", f.n, "Number of levels");
    app->add_option("--method", f.method, "Ground state: generic | closed");
    app->add_option("--format", f.format, "Table format: csv | json");
    app->add_flag("--no-richardson", f.no_richardson, "Skip the two-resolution error estimate in verify");
    if (sweep) {
        app->add_option("--task", f.tasks, "Task run at every point (repeatable)");
        app->add_option("--axis", f.axes, "Sweep axis KEY=V1,V2,...");
    }
}

json parse_scalar(const std::string& s)
{
    try {
        json v = json::parse(s);
        if (v.is_number() || v.is_boolean() || v.is_string())
            return v;
    } catch (const json::exception&) {
    }
    return s;
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* what)
{
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError(std::string(what) + " expects KEY=VALUE, got '" + s + "'", {"flag:format"});
    return {s.substr(0, eq), s.substr(eq + 1)};
}

json merged_config(const Flags& f)
{
    json doc = f.config.empty() ? json::object() : read_json_file(f.config);
    if (!doc.is_object())
        throw ConfigError("config file must hold a JSON object", {"config:type"});
    auto set = [&](const std::string& path, const json& v) {
        try {
            set_path(doc, path, v);
        } catch (const json::exception& e) {
            throw ConfigError("cannot set '" + path + "': " + e.what(), {"config:type"});
        }
    };
    if (f.family)
        set("family.tag", *f.family);
    for (const auto& [name, path] : real_flags)
        if (const auto& v = f.reals.at(name))
            set(path, *v);
    if (f.l)
        set("family.l", *f.l);
    if (f.formal_limit)
        set("family.formal_limit", true);
    if (f.profile)
        set("profile.name", *f.profile);
    if (f.table)
        set("profile.table", *f.table);
    for (const auto& p : f.params) {
        auto [k, v] = split_assignment(p, "--param");
        const json val = parse_scalar(v);
        if (!val.is_number())
            throw ConfigError("--param " + k + " needs a number", {"config:type"});
        set("profile.params." + k, val);
    }
    if (f.n_points)
        set("grid.n_points", *f.n_points);
    if (f.n)
        set("n", *f.n);
    if (f.method)
        set("method", *f.method);
    if (f.format)
        set("format", *f.format);
    if (f.no_richardson)
        set("tolerances.richardson", false);
    if (f.out)
        set("out", *f.out);
    if (!f.tasks.empty())
        set("sweep.task", f.tasks);
    for (const auto& a : f.axes) {
        auto [k, list] = split_assignment(a, "--axis");
        json values = json::array();
        std::size_t start = 0;
        while (start <= list.size() && !list.empty()) {
            const auto comma = list.find(',', start);
            values.push_back(parse_scalar(list.substr(start, comma - start)));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        try {
            doc["sweep"]["axes"][k] = values;
        } catch (const json::exception& e) {
            throw ConfigError("cannot set sweep axis '" + k + "': " + e.what(), {"config:type"});
        }
    }
    return doc;
}

void report(const TaskResult& r, const fs::path& dir)
{
    if (r.exit_code == exit_ok) {
        for (const auto& f : r.files)
            std::cout << (dir / f).string() << "\n";
        return;
    }
    std::cerr << "sip-effmass: " << r.error.value("kind", std::string("error")) << ": "
              << r.error.value("message", std::string()) << "\n";
    if (r.error.contains("violations"))
        for (const auto& v : r.error["violations"])
            std::cerr << "  violation: " << v.get<std::string>() << "\n";
}

fs::path out_dir(const json& doc)
{
    if (doc.contains("out") && doc["out"].is_string())
        return doc["out"].get<std::string>();
    return ".";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shape-invariant potentials with position-dependent effective mass (hbar = 1, e^2 = 1)"};
    app.require_subcommand(1);
    Flags flags;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help = {
        {"spectrum", "Partial-sum and closed-form level table (spectrum.csv)"},
        {"potential", "Superpotential and partner potentials on the grid (potential.csv)"},
        {"groundstate", "Normalized ground state and annihilation residual (groundstate.csv)"},
        {"verify", "Finite-difference eigenvalues against the algebra (verify.json)"},
        {"shapecheck", "Shape-invariance residual on the grid (shapecheck.json)"},
        {"sweep", "Run a task over a parameter grid (manifest.json)"},
    };
    for (const auto& [name, text] : help) {
        subs[name] = app.add_subcommand(name, text);
        add_options(subs[name], flags, name == "sweep");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    std::string task;
    for (const auto& [name, sub] : subs)
        if (sub->parsed())
            task = name;

    json doc;
    try {
        doc = merged_config(flags);
    } catch (const ConfigError& e) {
        TaskResult r{exit_config, {}, error_record(e, exit_config)};
        const fs::path dir = flags.out ? fs::path(*flags.out) : fs::path(".");
        try {
            fs::create_directories(dir);
            write_file(dir / "error.json", dump_json(r.error));
        } catch (const std::exception&) {
        }
        report(r, dir);
        return exit_config;
    }
    const fs::path dir = out_dir(doc);

    if (task != "sweep") {
        const TaskResult r = execute(task, doc, dir);
        report(r, dir);
        return r.exit_code;
    }

    try {
        const RunConfig c = parse_config(doc);
        const json manifest = run_sweep(c, dir);
        std::cout << (dir / "manifest.json").string() << "\n";
        const auto& counts = manifest["counts"];
        if (counts["failed"].get<std::size_t>() > 0)
            std::cerr << "sip-effmass: " << counts["failed"].get<std::size_t>() << " of "
                      << counts["total"].get<std::size_t>() << " sweep points failed; see manifest.json\n";
        return exit_ok;
    } catch (const std::exception& e) {
        const int code = dynamic_cast<const NumericalError*>(&e) ? exit_numerical : exit_config;
        TaskResult r{code, {}, error_record(e, code)};
        try {
            fs::create_directories(dir);
            write_file(dir / "error.json", dump_json(r.error));
        } catch (const std::exception&) {
        }
        report(r, dir);
        return code;
    }
}
