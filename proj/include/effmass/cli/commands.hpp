#pragma once

// Subcommand implementations. Each writes its artifacts into one directory and
// returns the file names it produced.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "effmass/cli/config.hpp"
#include "effmass/cli/format.hpp"
#include "effmass/groundstate.hpp"
#include "effmass/spectra.hpp"
#include "effmass/verify.hpp"

namespace effmass::cli {

namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

inline const std::vector<std::string>& task_names()
{
    static const std::vector<std::string> t = {"spectrum", "potential", "groundstate", "verify", "shapecheck"};
    return t;
}

inline json params_json(const ParamTriple& p) { return {{"lambda", real(p.lambda)}, {"sigma", real(p.sigma)}, {"rho", real(p.rho)}}; }

inline json model_json(const RunConfig& c, const FamilyModel& m)
{
    json f = {{"tag", std::string(to_string(m.family()))},
              {"a", real(m.coeffs().a)},
              {"b", real(m.coeffs().b)},
              {"c", real(m.coeffs().c)},
              {"params0", params_json(m.params0())}};
    if (const auto& cp = m.coulomb_params())
        f["coulomb"] = {{"Z", real(cp->Z)}, {"e2", real(cp->e2)}, {"l", cp->l}, {"b", real(cp->b)}};
    json params = json::object();
    for (const auto& [k, v] : m.profile().params)
        params[k] = real(v);
    json p = {{"name", c.profile.name}, {"params", params}};
    if (!c.profile.table.empty())
        p["table"] = c.profile.table;
    return {{"family", f}, {"profile", p}};
}

inline json header_json(const RunConfig& c, const FamilyModel& m, const std::string& kind)
{
    json h = model_json(c, m);
    h["kind"] = kind;
    h["units"] = {{"hbar", 1}, {"e2", real(c.family.e2)}};
    h["tool"] = "sip-effmass";
    return h;
}

inline void csv_header(CsvWriter& w, const RunConfig& c, const FamilyModel& m, const std::string& kind)
{
    w.comment("sip-effmass " + kind);
    w.comment(c.family.e2 == 1.0 ? std::string("units: ") + units_line
                                 : "units: hbar = 1, e^2 = " + format_real(c.family.e2));
    const auto& k = m.coeffs();
    const auto& p = m.params0();
    w.comment("family: " + std::string(to_string(m.family())) + " a=" + format_real(k.a) + " b=" + format_real(k.b) +
              " c=" + format_real(k.c) + " lambda0=" + format_real(p.lambda) + " sigma0=" + format_real(p.sigma) +
              " rho0=" + format_real(p.rho));
    if (const auto& cp = m.coulomb_params())
        w.comment("coulomb: Z=" + format_real(cp->Z) + " e2=" + format_real(cp->e2) + " l=" + std::to_string(cp->l));
    std::string prof = "profile: " + c.profile.name;
    for (const auto& [name, v] : m.profile().params)
        prof += " " + name + "=" + format_real(v);
    if (!c.profile.table.empty())
        prof += " table=" + c.profile.table;
    w.comment(prof);
    for (const auto& s : m.warnings())
        w.comment("warning: " + s);
}

/// Writes a table as CSV or as JSON {header..., columns, rows}.
inline std::string write_table(const RunConfig& c, const FamilyModel& m, const fs::path& dir, const std::string& kind,
                               const std::vector<std::string>& cols, const std::vector<std::vector<double>>& rows,
                               const std::vector<std::string>& notes, const json& extra = json::object())
{
    if (c.format == "json") {
        json j = header_json(c, m, kind);
        j["columns"] = cols;
        json r = json::array();
        for (const auto& row : rows)
            r.push_back(reals(row));
        j["rows"] = r;
        j["notes"] = notes;
        for (auto it = extra.begin(); it != extra.end(); ++it)
            j[it.key()] = it.value();
        write_file(dir / (kind + ".json"), dump_json(j));
        return kind + ".json";
    }
    CsvWriter w;
    csv_header(w, c, m, kind);
    for (const auto& s : notes)
        w.comment(s);
    for (auto it = extra.begin(); it != extra.end(); ++it)
        w.comment(it.key() + ": " + (it.value().is_number_float() ? format_real(it.value().get<double>())
                                                                    : it.value().dump()));
    w.header(cols);
    for (const auto& row : rows)
        w.row(row);
    write_file(dir / (kind + ".csv"), w.str());
    return kind + ".csv";
}

inline std::vector<std::string> run_spectrum(const RunConfig& c, const fs::path& dir)
{
    const FamilyModel m = build_model(c);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> notes;
    if (m.family() == Family::coulomb) {
        notes.emplace_back("row n is the even level N = 2n; E_closed is the floor-index closed form");
        for (int n = 0; n < c.n; ++n) {
            const CoulombEnergy e = coulomb_spectrum_sum(*m.coulomb_params(), 2 * n);
            rows.push_back({double(n), e.summed, e.closed, e.closed - e.summed});
            for (const auto& w : e.warnings)
                if (std::find(notes.begin(), notes.end(), "warning: " + w) == notes.end())
                    notes.push_back("warning: " + w);
        }
    } else {
        const SpectrumTable sum = spectrum_sum(m, c.n - 1);
        const SpectrumTable closed = spectrum_closed(m, c.n - 1);
        for (int n = 0; n < c.n; ++n) {
            const double es = sum.levels[static_cast<std::size_t>(n)].E;
            const double ec = closed.levels[static_cast<std::size_t>(n)].E;
            rows.push_back({double(n), es, ec, ec - es});
        }
        for (const auto& w : sum.warnings)
            notes.push_back("warning: " + w);
    }
    return {write_table(c, m, dir, "spectrum", {"n", "E_partial_sum", "E_closed", "diff"}, rows, notes)};
}

inline std::vector<std::string> run_potential(const RunConfig& c, const fs::path& dir)
{
    const FamilyModel m = build_model(c);
    const GridSpec g = grid_for(c, m);
    const std::vector<double> xs = g.interior();
    const std::vector<double> mus = m.mumap().mu_on(xs);
    const ParamTriple& p = m.params0();
    std::vector<std::vector<double>> rows;
    rows.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const LocalData d = m.local(xs[i], mus[i]);
        const EffectivePair e = m.effective_pair(d, p);
        rows.push_back({xs[i], mus[i], m.superpotential(d, p), m.v1(d, p), m.v2(d, p), e.v1_eff, e.v2_eff});
    }
    return {write_table(c, m, dir, "potential", {"x", "mu", "W", "V1", "V2", "V1eff", "V2eff"}, rows,
                        {"grid: interior points of [" + format_real(g.x_lo) + ", " + format_real(g.x_hi) + "], " +
                         std::to_string(g.n_points) + " points"})};
}

inline std::vector<std::string> run_groundstate(const RunConfig& c, const fs::path& dir)
{
    const FamilyModel m = build_model(c);
    const GridSpec g = grid_for(c, m);
    GroundStateOptions opt;
    opt.divergence_ratio = c.tol.divergence;
    const WavefunctionTable t = c.method == PsiMethod::generic ? psi0_generic(m, g.interior(), opt)
                                                               : psi0_closed_table(m, g.interior(), opt);
    const AnnihilationResult a = annihilation_residual(m, t);
    std::vector<std::vector<double>> rows;
    rows.reserve(t.x.size());
    for (std::size_t i = 0; i < t.x.size(); ++i)
        rows.push_back({t.x[i], t.psi[i], a.pointwise[i]});
    std::vector<std::string> notes = {"method: " + std::string(to_string(t.method)),
                                      "normalization: trapezoid, integral psi^2 dx = 1"};
    for (const auto& w : t.warnings)
        notes.push_back("warning: " + w);
    json extra = {{"log_normalization", real(t.log_normalization)}, {"max_interior_residual", real(a.max_interior)}};
    return {write_table(c, m, dir, "groundstate", {"x", "psi", "residual"}, rows, notes, extra)};
}

inline json grid_json(const GridSpec& g)
{
    return {{"x_lo", real(g.x_lo)}, {"x_hi", real(g.x_hi)}, {"n_points", g.n_points}, {"h", real(g.h())},
            {"boundary", "dirichlet"}};
}

inline std::vector<std::string> run_verify(const RunConfig& c, const fs::path& dir)
{
    const FamilyModel m = build_model(c);
    const GridSpec g = grid_for(c, m);
    if (c.n > 12)
        throw ConfigError("verify: at most 12 levels", {"k<=12"});
    const CompareReport rep = compare(m, g, c.n, {c.tol.verify, c.tol.richardson});

    json j = header_json(c, m, "verify");
    j["grid"] = grid_json(g);
    j["eigenvalues"] = reals(rep.result.eigenvalues);
    j["gaps"] = reals(rep.result.gaps);
    j["residuals"] = reals(rep.result.residuals);
    j["operator_norm_estimate"] = real(rep.result.norm_estimate);
    j["epsilon0"] = real(rep.epsilon0);
    j["algebraic"] = reals(rep.algebraic);
    j["algebraic_source"] = rep.algebraic_source;
    json levels = json::array();
    for (const auto& l : rep.levels)
        levels.push_back({{"n", l.n},
                          {"numeric", real(l.numeric)},
                          {"gap", real(l.gap)},
                          {"algebraic", real(l.algebraic)},
                          {"abs_diff", real(l.abs_diff)},
                          {"rel_diff", real(l.rel_diff)},
                          {"richardson", real(l.richardson)},
                          {"flag", std::string(to_string(l.flag))}});
    j["comparisons"] = levels;
    j["flags"] = {{"factorization_zero", rep.factorization_zero},
                  {"algebraic_monotone", rep.algebraic_monotone},
                  {"algebraic_degenerate", rep.algebraic_degenerate},
                  {"all_match", rep.all_match()}};
    j["tolerance"] = real(rep.tolerance);
    j["richardson_error"] = real(rep.richardson_error);
    if (c.tol.richardson)
        j["coarse_grid"] = grid_json(rep.coarse);

    std::vector<std::string> warnings = m.warnings();
    warnings.insert(warnings.end(), rep.warnings.begin(), rep.warnings.end());
    try {
        GroundStateOptions opt;
        opt.divergence_ratio = c.tol.divergence;
        const WavefunctionTable t = psi0_generic(m, g.interior(), opt);
        j["rayleigh_quotient"] = real(rayleigh_quotient(discretize(m, g), t.psi));
    } catch (const NumericalError& e) {
        j["rayleigh_quotient"] = nullptr;
        warnings.push_back(std::string("ground state not available on this grid: ") + e.what());
    }
    j["warnings"] = warnings;
    write_file(dir / "verify.json", dump_json(j));
    return {"verify.json"};
}

inline std::vector<std::string> run_shapecheck(const RunConfig& c, const fs::path& dir)
{
    const FamilyModel m = build_model(c);
    const GridSpec g = grid_for(c, m);
    const ShapeCheck s = shape_invariance_residual(m, g.interior());
    json j = header_json(c, m, "shapecheck");
    j["grid"] = grid_json(g);
    j["max_residual"] = real(s.max_residual);
    j["scaled_residual"] = real(s.scaled());
    j["max_abs_potential"] = real(s.max_abs_potential);
    j["remainder"] = real(s.remainder);
    j["params0"] = params_json(s.params0);
    j["params1"] = params_json(s.params1);
    j["evaluated"] = s.evaluated;
    j["skipped"] = s.skipped;
    j["worst_x"] = real(s.worst_x);
    j["tolerance"] = real(c.tol.shapecheck);
    j["passed"] = s.evaluated > 0 && s.scaled() <= c.tol.shapecheck;
    j["warnings"] = m.warnings();
    write_file(dir / "shapecheck.json", dump_json(j));
    return {"shapecheck.json"};
}

inline std::vector<std::string> run_task(const std::string& task, const RunConfig& c, const fs::path& dir)
{
    if (task == "spectrum")
        return run_spectrum(c, dir);
    if (task == "potential")
        return run_potential(c, dir);
    if (task == "groundstate")
        return run_groundstate(c, dir);
    if (task == "verify")
        return run_verify(c, dir);
    if (task == "shapecheck")
        return run_shapecheck(c, dir);
    throw ConfigError("unknown task '" + task + "'", {"unknown_task"});
}

struct TaskResult {
    int exit_code = exit_ok;
    std::vector<std::string> files;
    json error; ///< null on success
};

inline json error_record(const std::exception& e, int code)
{
    json j = {{"exit_code", code}, {"message", e.what()}};
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
        j["kind"] = "config_error";
        j["violations"] = ce->violations();
    } else if (const auto* ne = dynamic_cast<const NumericalError*>(&e)) {
        j["kind"] = "numerical_error";
        j["code"] = ne->code();
    } else {
        j["kind"] = "numerical_error";
        j["code"] = "internal";
    }
    return j;
}

/// Runs one task, mapping failures to exit codes and an error.json record.
inline TaskResult execute(const std::string& task, const json& doc, const fs::path& dir)
{
    TaskResult r;
    try {
        const RunConfig c = parse_config(doc);
        fs::create_directories(dir);
        r.files = run_task(task, c, dir);
        return r;
    } catch (const ConfigError& e) {
        r.exit_code = exit_config;
        r.error = error_record(e, r.exit_code);
    } catch (const json::exception& e) {
        r.exit_code = exit_config;
        r.error = error_record(ConfigError(e.what(), {"config:type"}), r.exit_code);
    } catch (const fs::filesystem_error& e) {
        r.exit_code = exit_config;
        r.error = error_record(ConfigError(e.what(), {"output:write"}), r.exit_code);
    } catch (const std::exception& e) {
        r.exit_code = exit_numerical;
        r.error = error_record(e, r.exit_code);
    }
    try {
        fs::create_directories(dir);
        write_file(dir / "error.json", dump_json(r.error));
        r.files.push_back("error.json");
    } catch (const std::exception&) {
    }
    return r;
}

/// Worker count: hardware concurrency, capped by SIP_EFFMASS_WORKERS when set.
inline int worker_count(std::size_t jobs)
{
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("SIP_EFFMASS_WORKERS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1)
            throw ConfigError("SIP_EFFMASS_WORKERS must be a positive integer", {"workers>=1"});
        n = static_cast<int>(std::min<long>(v, 1024));
    }
    return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(jobs, 1))));
}

struct SweepPoint {
    std::size_t index = 0;
    json values;
    std::string dir;
    TaskResult result;
};

/// Runs the task at every point of the cartesian product of the sweep axes.
/// A sweep without axes, or with an empty axis, has no points.
inline json run_sweep(const RunConfig& c, const fs::path& out)
{
    for (const auto& task : c.sweep.tasks)
        if (std::find(task_names().begin(), task_names().end(), task) == task_names().end())
            throw ConfigError("sweep: unknown task '" + task + "'", {"unknown_task"});

    std::vector<std::string> keys;
    std::size_t total = c.sweep.axes.empty() ? 0 : 1;
    for (const auto& [k, v] : c.sweep.axes) {
        keys.push_back(k);
        total *= v.size();
    }
    json base = c.source;
    base.erase("sweep");
    base.erase("out");

    std::vector<SweepPoint> points(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        json values = json::object();
        for (std::size_t a = keys.size(); a-- > 0;) {
            const auto& axis = c.sweep.axes.at(keys[a]);
            values[keys[a]] = axis[rest % axis.size()];
            rest /= axis.size();
        }
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu", i);
        points[i].index = i;
        points[i].values = values;
        points[i].dir = name;
    }

    fs::create_directories(out);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < total;) {
            SweepPoint& p = points[i];
            json doc = base;
            try {
                for (auto it = p.values.begin(); it != p.values.end(); ++it)
                    set_path(doc, it.key(), it.value());
            } catch (const json::exception& e) {
                p.result.exit_code = exit_config;
                p.result.error = error_record(ConfigError(e.what(), {"sweep:axis"}), exit_config);
                continue;
            }
            for (const auto& task : c.sweep.tasks) {
                TaskResult r = execute(task, doc, out / p.dir);
                p.result.files.insert(p.result.files.end(), r.files.begin(), r.files.end());
                if (r.exit_code != exit_ok) {
                    p.result.exit_code = r.exit_code;
                    p.result.error = r.error;
                    p.result.error["task"] = task;
                    break;
                }
            }
        }
    };
    const int workers = worker_count(total);
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w)
            pool.emplace_back(work);
        work();
    }

    json axes = json::object();
    for (const auto& [k, v] : c.sweep.axes)
        axes[k] = v;
    json list = json::array();
    std::size_t ok = 0;
    for (const auto& p : points) {
        json e = {{"index", p.index},
                  {"dir", p.dir},
                  {"values", p.values},
                  {"status", p.result.exit_code == exit_ok ? "ok" : "failed"},
                  {"exit_code", p.result.exit_code},
                  {"files", p.result.files}};
        if (p.result.exit_code != exit_ok)
            e["error"] = p.result.error;
        else
            ++ok;
        list.push_back(e);
    }
    json manifest = {{"kind", "sweep"},
                     {"tool", "sip-effmass"},
                     {"tasks", c.sweep.tasks},
                     {"units", {{"hbar", 1}, {"e2", real(c.family.e2)}}},
                     {"axes", axes},
                     {"points", list},
                     {"counts", {{"total", total}, {"ok", ok}, {"failed", total - ok}}}};
    write_file(out / "manifest.json", dump_json(manifest));
    return manifest;
}

} // namespace effmass::cli
