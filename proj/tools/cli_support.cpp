#include "cli_support.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cusplab/errors.hpp"

namespace cli {

using nlohmann::json;
using cusplab::ConfigError;

Format parse_format(const std::string& s) {
    if (s == "json") return Format::Json;
    if (s == "csv") return Format::Csv;
    if (s == "md") return Format::Md;
    throw ConfigError("unknown format '" + s + "'");
}

std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string render_csv(const Table& t) {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            const auto& c = cells[i];
            if (c.find_first_of(",\"\n") == std::string::npos) {
                os << c;
            } else {
                os << '"';
                for (char ch : c) os << (ch == '"' ? "\"\"" : std::string(1, ch));
                os << '"';
            }
        }
        os << '\n';
    };
    line(t.columns);
    for (const auto& r : t.rows) line(r);
    return os.str();
}

std::string render_md(const Table& t) {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& cells) {
        os << '|';
        for (const auto& c : cells) {
            std::string e;
            for (char ch : c) e += ch == '|' ? std::string("\\|") : std::string(1, ch);
            os << ' ' << e << " |";
        }
        os << '\n';
    };
    line(t.columns);
    os << '|';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << " --- |";
    os << '\n';
    for (const auto& r : t.rows) line(r);
    return os.str();
}

json table_json(const Table& t) { return {{"columns", t.columns}, {"rows", t.rows}}; }

void emit(const std::optional<std::string>& out_dir, const std::string& stem, Format f, const std::string& body) {
    if (!out_dir) {
        std::cout << body;
        return;
    }
    const char* ext = f == Format::Json ? ".json" : f == Format::Csv ? ".csv" : ".md";
    std::filesystem::create_directories(*out_dir);
    const auto path = std::filesystem::path(*out_dir) / (stem + ext);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << body;
}

namespace {

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad number '" + s + "' for " + what);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

bool inline_json(const std::string& s) { return !s.empty() && s.front() == '{'; }

json parse_inline(const std::string& s) {
    try {
        return json::parse(s);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid inline JSON: ") + e.what());
    }
}

// "head:arg,k=v,..." -> head, optional arg, extra assignments
struct Shorthand {
    std::string head;
    std::optional<std::string> arg;
    std::vector<std::pair<std::string, std::string>> extra;
};

Shorthand shorthand(const std::string& s) {
    Shorthand out;
    auto parts = split(s, ',');
    if (parts.empty()) throw ConfigError("empty specification");
    const auto& first = parts.front();
    const auto colon = first.find(':');
    out.head = first.substr(0, colon);
    if (colon != std::string::npos) out.arg = first.substr(colon + 1);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw ConfigError("expected k=v in '" + s + "'");
        out.extra.emplace_back(parts[i].substr(0, eq), parts[i].substr(eq + 1));
    }
    return out;
}

std::string need_arg(const Shorthand& sh) {
    if (!sh.arg) throw ConfigError("'" + sh.head + "' needs a parameter after ':'");
    return *sh.arg;
}

void put_extra(json& j, const Shorthand& sh) {
    for (const auto& [k, v] : sh.extra) j[k] = to_double(v, k);
}

}  // namespace

json profile_json(const std::string& s) {
    if (inline_json(s)) return parse_inline(s);
    const auto sh = shorthand(s);
    json j;
    if (sh.head == "exp")
        j = {{"kind", "ExpSpine"}, {"eps", to_double(need_arg(sh), "eps")}};
    else if (sh.head == "power")
        j = {{"kind", "Power"}, {"eta", to_double(need_arg(sh), "eta")}};
    else if (sh.head == "logpower")
        j = {{"kind", "LogPower"}, {"eta", to_double(need_arg(sh), "eta")}};
    else if (sh.head == "iterlog")
        j = {{"kind", "IterLogPower"}, {"p", to_double(need_arg(sh), "p")}};
    else if (sh.head == "poweriterlog")
        j = {{"kind", "PowerIterLog"}};
    else if (sh.head == "d3loglog")
        j = {{"kind", "DMinus3LogLog"}, {"d", to_double(need_arg(sh), "d")}};
    else
        throw ConfigError("unknown profile '" + sh.head + "'");
    put_extra(j, sh);
    return j;
}

json operator_json(const std::string& s) {
    if (inline_json(s)) return parse_inline(s);
    const auto sh = shorthand(s);
    json j;
    if (sh.head == "laplacian")
        j = {{"kind", "Laplacian"}};
    else if (sh.head == "const")
        j = {{"kind", "Constant"}, {"lambda", to_double(need_arg(sh), "lambda")}};
    else if (sh.head == "omega")
        j = {{"kind", "OmegaDerived"}, {"scale", sh.arg ? to_double(*sh.arg, "scale") : 1.0}};
    else
        throw ConfigError("unknown operator '" + sh.head + "'");
    put_extra(j, sh);
    return j;
}

json field_json(const std::string& s) {
    if (inline_json(s)) return parse_inline(s);
    const auto sh = shorthand(s);
    json j;
    if (sh.head == "radial_power")
        j = {{"kind", "radial_power"}, {"k", to_double(need_arg(sh), "k")}};
    else if (sh.head == "inv_power")
        j = {{"kind", "inv_power"}, {"p", to_double(need_arg(sh), "p")}};
    else if (sh.head == "quadratic")
        j = {{"kind", "quadratic"}};
    else if (sh.head == "constant")
        j = {{"kind", "constant"}, {"value", to_double(need_arg(sh), "value")}};
    else if (sh.head == "potential" || sh.head == "potential_deficit")
        j = {{"kind", sh.head}};
    else
        throw ConfigError("unknown field function '" + sh.head + "'");
    put_extra(j, sh);
    return j;
}

json preset_json(const std::string& name, const std::vector<std::string>& assignments) {
    if (inline_json(name)) return parse_inline(name);
    static const std::vector<std::pair<std::string, std::string>> names = {
        {"lebesgue", "Lebesgue"}, {"t21_d3", "T21_d3"}, {"t21_dge4", "T21_dge4"}, {"t23_d3", "T23_d3"},
        {"t23_dge4", "T23_dge4"}, {"l71", "L71"},       {"mu_const", "MuConst"}};
    json j;
    for (const auto& [k, v] : names)
        if (k == name || v == name) j["preset"] = v;
    if (!j.contains("preset")) throw ConfigError("unknown preset '" + name + "'");
    for (const auto& [k, v] : parse_assignments(assignments)) j[k] = v;
    return j;
}

std::vector<double> parse_list(const std::string& s) {
    const bool geo = s.rfind("geo:", 0) == 0;
    const std::string body = geo ? s.substr(4) : s;
    const auto range = split(body, ':');
    if (range.size() == 3) {
        const double lo = to_double(range[0], "range"), hi = to_double(range[1], "range");
        const double nd = to_double(range[2], "range count");
        if (nd < 1 || nd != std::floor(nd) || nd > 1e6) throw ConfigError("range count must be a positive integer");
        const int n = static_cast<int>(nd);
        if (geo && !(lo > 0.0 && hi > 0.0)) throw ConfigError("geometric ranges need positive ends");
        std::vector<double> out;
        for (int i = 0; i < n; ++i) {
            const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            out.push_back(geo ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
        }
        return out;
    }
    if (geo) throw ConfigError("geo: needs lo:hi:n");
    std::vector<double> out;
    for (const auto& p : split(body, ',')) out.push_back(to_double(p, "list"));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::vector<double> parse_point(const std::string& s) {
    std::vector<double> out;
    for (const auto& p : split(s, ',')) out.push_back(to_double(p, "coordinate"));
    return out;
}

cusplab::ParamList parse_assignments(const std::vector<std::string>& kv) {
    cusplab::ParamList out;
    for (const auto& a : kv) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected name=value, got '" + a + "'");
        out.emplace_back(a.substr(0, eq), to_double(a.substr(eq + 1), a.substr(0, eq)));
    }
    return out;
}

}  // namespace cli
