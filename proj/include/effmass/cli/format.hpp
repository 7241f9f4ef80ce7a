#pragma once

// Deterministic text output: every real is written with 17 significant digits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "effmass/error.hpp"

namespace effmass::cli {

using json = nlohmann::json;

inline constexpr const char* units_line = "hbar = 1, e^2 = 1";

inline std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void dump(const json& j, std::string& out, int depth)
{
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            dump(it.value(), out, depth + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out += ", ";
                dump(j[i], out, depth + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                out += ",\n";
            out += pad;
            dump(j[i], out, depth + 1);
        }
        out += "\n" + close + "]";
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? format_real(v) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

} // namespace detail

/// Pretty JSON with sorted keys and %.17g reals; non-finite reals become null.
inline std::string dump_json(const json& j)
{
    std::string out;
    detail::dump(j, out, 0);
    out += "\n";
    return out;
}

/// Real for JSON: non-finite values are stored as null.
inline json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json reals(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v)
        a.push_back(real(x));
    return a;
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'", {"output:write"});
    out << text;
    if (!out)
        throw ConfigError("write failed for '" + path.string() + "'", {"output:write"});
}

/// CSV with '#' comment lines, one header row, LF endings.
class CsvWriter {
public:
    void comment(const std::string& line) { text_ += "# " + line + "\n"; }

    void header(const std::vector<std::string>& cols)
    {
        for (std::size_t i = 0; i < cols.size(); ++i)
            text_ += (i ? "," : "") + cols[i];
        text_ += "\n";
    }

    void row(const std::vector<double>& values)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
            text_ += (i ? "," : "") + format_real(values[i]);
        text_ += "\n";
    }

    const std::string& str() const { return text_; }

private:
    std::string text_;
};

} // namespace effmass::cli
