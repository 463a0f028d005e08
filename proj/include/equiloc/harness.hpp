#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "equiloc/amplitude_grammar.hpp"
#include "equiloc/checks.hpp"
#include "equiloc/desing.hpp"
#include "equiloc/fit.hpp"
#include "equiloc/oscillatory.hpp"
#include "equiloc/residue.hpp"
#include "equiloc/symplectic.hpp"

namespace equiloc {

inline constexpr const char* kToolVersion = "equiloc 0.1.0";
inline constexpr const char* kSchemaLine = "# equiloc-schema v1";

using Json = nlohmann::json;

struct ConfigEntry {
    Json value;
    int line = 0;
    int column = 0;      // of the value
    int key_column = 0;
};

/**
 * One `key = value` per line, value in JSON; blank lines and lines starting with '#' are skipped.
 * Rationals are JSON integers or strings such as "1/2".
 */
struct ScenarioConfig {
    std::string origin = "<config>";
    std::map<std::string, ConfigEntry> entries;

    std::string task;
    std::string model_kind = "torus_linear";
    IntMatrix weights;
    std::optional<std::string> amplitude;
    std::vector<double> mus;
    QuadratureSpec quad;
    RationalVector eta;
    int depth_cap = 8;
    std::optional<unsigned> seed;
    std::string out_dir = "equiloc-out";
    Rational cut_radius = 1;
    Rational alpha = 1;
    Rational rho = 1;
    std::vector<RationalMatrix> cones;
    std::vector<FixedPointDatum> fixed_points;
    int sp_order = 0;
    int sp_dim = 1;
    std::string weyl_group = "su2";
    int weyl_rank = 1;
    Rational weyl_rate = 1;

    std::optional<std::pair<double, double>> expect_alpha;
    std::optional<double> expect_beta_max;
    std::optional<double> expect_L0;
    double expect_L0_rel = 1e-6;
    std::optional<int> expect_kappa;
    std::optional<int> expect_lambda_a;
    std::optional<int> expect_tree_depth;
    std::optional<Rational> expect_residue_coefficient;
    double expect_oscint_rel = 1e-5;
    double expect_residue_rel = 1e-6;
    double expect_weyl_rel = 1e-6;

    std::string where(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) return origin;
        return origin + ":" + std::to_string(it->second.line) + ":" + std::to_string(it->second.column);
    }

    LinearHamiltonianModel linear_model() const {
        if (model_kind != "torus_linear") fail(ErrorKind::unsupported_model, "task needs model.kind = \"torus_linear\"");
        if (weights.empty()) fail(ErrorKind::parse, origin + ": model.weights is missing");
        return LinearHamiltonianModel::from_weights(weights);
    }

    RationalVector eta_for(int rank) const {
        if (eta.empty()) return RationalVector(rank, Rational(0));
        if (static_cast<int>(eta.size()) != rank) fail(ErrorKind::shape, where("eta") + ": eta needs " + std::to_string(rank) + " entries");
        return eta;
    }

    /// FNV-1a over the canonical key/value dump, so formatting changes do not alter the hash.
    std::uint64_t hash() const {
        std::string canon = "task=" + task + "\n";
        for (const auto& [k, e] : entries) canon += k + "=" + e.value.dump() + "\n";
        if (!mus.empty()) {
            canon += "#mu";
            for (double m : mus) {
                char buf[32];
                std::snprintf(buf, sizeof buf, " %.17g", m);
                canon += buf;
            }
        }
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : canon) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& origin, int line, int column, const std::string& what) {
    fail(ErrorKind::parse, origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

struct EntryReader {
    const ScenarioConfig& cfg;
    const std::string& key;
    const ConfigEntry& e;

    [[noreturn]] void bad(const std::string& what) const { config_error(cfg.origin, e.line, e.column, key + ": " + what); }

    double number(const Json& v) const {
        if (!v.is_number()) bad("expected a number");
        return v.get<double>();
    }
    long long integer(const Json& v) const {
        if (!v.is_number_integer()) bad("expected an integer");
        return v.get<long long>();
    }
    Rational rational(const Json& v) const {
        if (v.is_number_integer()) return Rational(v.get<long long>());
        if (!v.is_string()) bad("expected an integer or a rational string such as \"1/2\"");
        try {
            return parse_rational(v.get<std::string>());
        } catch (const Error& err) {
            bad(err.what());
        }
    }
    std::string string(const Json& v) const {
        if (!v.is_string()) bad("expected a string");
        return v.get<std::string>();
    }
    const Json& array(const Json& v) const {
        if (!v.is_array()) bad("expected a list");
        return v;
    }
    RationalVector rational_list(const Json& v) const {
        RationalVector out;
        for (const auto& x : array(v)) out.push_back(rational(x));
        return out;
    }
    std::vector<double> number_list(const Json& v) const {
        std::vector<double> out;
        for (const auto& x : array(v)) out.push_back(number(x));
        return out;
    }
    /// [[..],[..]] or a flat list read as one entry per row.
    IntMatrix int_matrix(const Json& v) const {
        IntMatrix out;
        for (const auto& row : array(v)) {
            if (row.is_array()) {
                std::vector<long long> r;
                for (const auto& x : row) r.push_back(integer(x));
                out.push_back(r);
            } else {
                out.push_back({integer(row)});
            }
        }
        return out;
    }
    RationalMatrix rational_matrix(const Json& v) const {
        RationalMatrix out;
        for (const auto& row : array(v)) out.push_back(row.is_array() ? rational_list(row) : RationalVector{rational(row)});
        return out;
    }
};

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0 && hi > 0) || count < 1) fail(ErrorKind::domain, "log-spaced grid needs positive ends and count");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    }
    return out;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<config>") {
    ScenarioConfig cfg;
    cfg.origin = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::size_t eq = line.find('=', first);
        if (eq == std::string::npos) detail::config_error(origin, lineno, static_cast<int>(first) + 1, "expected 'key = value'");
        std::string key = line.substr(first, eq - first);
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key.empty()) detail::config_error(origin, lineno, static_cast<int>(first) + 1, "empty key");
        std::size_t vstart = line.find_first_not_of(" \t", eq + 1);
        if (vstart == std::string::npos) detail::config_error(origin, lineno, static_cast<int>(eq) + 2, key + ": missing value");
        ConfigEntry e;
        e.line = lineno;
        e.column = static_cast<int>(vstart) + 1;
        e.key_column = static_cast<int>(first) + 1;
        try {
            e.value = Json::parse(line.substr(vstart));
        } catch (const Json::parse_error& err) {
            int col = e.column + std::max<int>(0, static_cast<int>(err.byte) - 1);
            detail::config_error(origin, lineno, col, key + ": malformed value");
        }
        if (cfg.entries.count(key)) detail::config_error(origin, lineno, static_cast<int>(first) + 1, "duplicate key " + key);
        cfg.entries.emplace(key, std::move(e));
    }

    static const std::regex fp_key(R"(fp\[(\d+)\]\.(label|J|weights|dim))");
    std::map<int, FixedPointDatum> fps;
    for (const auto& [key, e] : cfg.entries) {
        detail::EntryReader rd{cfg, key, e};
        const Json& v = e.value;
        std::smatch m;
        if (key == "task") {
            cfg.task = rd.string(v);
        } else if (key == "model.kind") {
            cfg.model_kind = rd.string(v);
            if (cfg.model_kind != "torus_linear" && cfg.model_kind != "sphere") rd.bad("unknown model kind '" + cfg.model_kind + "'");
        } else if (key == "model.weights") {
            cfg.weights = rd.int_matrix(v);
        } else if (key == "amplitude") {
            cfg.amplitude = rd.string(v);
        } else if (key == "mu") {
            cfg.mus = rd.number_list(v);
        } else if (key == "mu.log") {
            auto l = rd.number_list(v);
            if (l.size() != 3) rd.bad("expected [low, high, count]");
            cfg.mus = detail::log_spaced(l[0], l[1], static_cast<int>(l[2]));
        } else if (key == "quad.nodes") {
            if (v.is_array()) {
                for (const auto& x : v) cfg.quad.nodes.push_back(rd.integer(x));
            } else {
                cfg.quad.nodes = {rd.integer(v)};
            }
        } else if (key == "quad.rule") {
            std::string s = rd.string(v);
            if (s == "tensor") cfg.quad.rule = QuadratureRule::tensor;
            else if (s == "adaptive") cfg.quad.rule = QuadratureRule::adaptive;
            else rd.bad("unknown rule '" + s + "'");
        } else if (key == "quad.adaptive_tol") {
            cfg.quad.adaptive_tol = rd.number(v);
        } else if (key == "quad.guard") {
            cfg.quad.guard = rd.number(v);
        } else if (key == "quad.min_nodes") {
            cfg.quad.min_nodes = rd.integer(v);
        } else if (key == "quad.max_evaluations") {
            cfg.quad.max_evaluations = rd.number(v);
        } else if (key == "quad.path") {
            std::string s = rd.string(v);
            if (s == "automatic") cfg.quad.path = QuadraturePath::automatic;
            else if (s == "separable") cfg.quad.path = QuadraturePath::separable;
            else if (s == "radial") cfg.quad.path = QuadraturePath::radial;
            else if (s == "full") cfg.quad.path = QuadraturePath::full;
            else rd.bad("unknown path '" + s + "'");
        } else if (key == "eta") {
            cfg.eta = v.is_array() ? rd.rational_list(v) : RationalVector{rd.rational(v)};
        } else if (key == "depth_cap") {
            cfg.depth_cap = static_cast<int>(rd.integer(v));
        } else if (key == "seed") {
            cfg.seed = static_cast<unsigned>(rd.integer(v));
        } else if (key == "out") {
            cfg.out_dir = rd.string(v);
        } else if (key == "cut.radius") {
            cfg.cut_radius = rd.rational(v);
        } else if (key == "alpha") {
            cfg.alpha = rd.rational(v);
        } else if (key == "rho") {
            cfg.rho = rd.rational(v);
        } else if (key == "cones") {
            for (const auto& c : rd.array(v)) cfg.cones.push_back(rd.rational_matrix(c));
        } else if (key == "sp.K") {
            cfg.sp_order = static_cast<int>(rd.integer(v));
        } else if (key == "sp.dim") {
            cfg.sp_dim = static_cast<int>(rd.integer(v));
        } else if (key == "weyl.group") {
            cfg.weyl_group = rd.string(v);
            if (cfg.weyl_group != "su2" && cfg.weyl_group != "torus") rd.bad("unknown group '" + cfg.weyl_group + "'");
        } else if (key == "weyl.rank") {
            cfg.weyl_rank = static_cast<int>(rd.integer(v));
        } else if (key == "weyl.rate") {
            cfg.weyl_rate = rd.rational(v);
        } else if (key == "expect.alpha") {
            auto l = rd.number_list(v);
            if (l.size() != 2) rd.bad("expected [low, high]");
            cfg.expect_alpha = std::make_pair(l[0], l[1]);
        } else if (key == "expect.beta_max") {
            cfg.expect_beta_max = rd.number(v);
        } else if (key == "expect.L0") {
            cfg.expect_L0 = rd.number(v);
        } else if (key == "expect.L0_rel") {
            cfg.expect_L0_rel = rd.number(v);
        } else if (key == "expect.kappa") {
            cfg.expect_kappa = static_cast<int>(rd.integer(v));
        } else if (key == "expect.lambda_a") {
            cfg.expect_lambda_a = static_cast<int>(rd.integer(v));
        } else if (key == "expect.tree_depth") {
            cfg.expect_tree_depth = static_cast<int>(rd.integer(v));
        } else if (key == "expect.residue_coefficient") {
            cfg.expect_residue_coefficient = rd.rational(v);
        } else if (key == "expect.oscint_rel") {
            cfg.expect_oscint_rel = rd.number(v);
        } else if (key == "expect.residue_rel") {
            cfg.expect_residue_rel = rd.number(v);
        } else if (key == "expect.weyl_rel") {
            cfg.expect_weyl_rel = rd.number(v);
        } else if (std::regex_match(key, m, fp_key)) {
            FixedPointDatum& f = fps[std::stoi(m[1].str())];
            std::string field = m[2].str();
            if (field == "label") f.label = rd.string(v);
            else if (field == "J") f.J = v.is_array() ? rd.rational_list(v) : RationalVector{rd.rational(v)};
            else if (field == "weights") f.weights = rd.int_matrix(v);
            else f.dim = static_cast<int>(rd.integer(v));
        } else {
            detail::config_error(cfg.origin, e.line, e.key_column, "unknown key " + key);
        }
    }
    int expected = 0;
    for (auto& [i, f] : fps) {
        if (i != expected) fail(ErrorKind::parse, origin + ": fixed-point indices must run 0, 1, 2, ... (missing fp[" + std::to_string(expected) + "])");
        if (f.label.empty()) f.label = "fp" + std::to_string(i);
        if (f.J.empty()) fail(ErrorKind::parse, cfg.where("fp[" + std::to_string(i) + "].weights") + ": fp[" + std::to_string(i) + "].J is missing");
        f.validate();
        cfg.fixed_points.push_back(f);
        ++expected;
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::parse, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

/// "0.1,0.05,0.02" -> values
inline std::vector<double> parse_mu_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            fail(ErrorKind::parse, "bad mu entry '" + item + "'");
        }
    }
    if (out.empty()) fail(ErrorKind::parse, "empty mu list");
    return out;
}

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != columns.size()) fail(ErrorKind::shape, "csv row has " + std::to_string(row.size()) + " cells");
        rows.push_back(std::move(row));
    }

    std::string text() const {
        std::string s = std::string(kSchemaLine) + "\n";
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
            s += "\n";
        };
        line(columns);
        for (const auto& r : rows) line(r);
        return s;
    }

    bool operator==(const CsvTable&) const = default;
};

inline CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSchemaLine) fail(ErrorKind::parse, "csv lacks the schema line");
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!l.empty() && l.back() == ',') cells.push_back("");
        return cells;
    };
    CsvTable t;
    if (!std::getline(in, line)) fail(ErrorKind::parse, "csv lacks a column line");
    t.columns = split(line);
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        auto cells = split(line);
        if (cells.size() != t.columns.size()) fail(ErrorKind::parse, "csv line " + std::to_string(lineno) + " has the wrong cell count");
        t.rows.push_back(cells);
    }
    return t;
}

/// Inverse of PiecewisePolyMeasure::serialize, up to the canonical form that serialize produces.
inline PiecewisePolyMeasure parse_measure(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    PiecewisePolyMeasure u;
    if (!std::getline(in, line)) fail(ErrorKind::parse, "empty measure file");
    {
        std::istringstream h(line);
        std::string hash, word, rank_word, pow_word;
        h >> hash >> word >> rank_word >> u.rank >> pow_word >> u.two_pi_power;
        if (hash != "#" || word != "measure" || rank_word != "rank" || pow_word != "two_pi_power" || h.fail())
            fail(ErrorKind::parse, "bad measure header '" + line + "'");
    }
    int r = u.rank;
    auto parse_vector = [&](const std::string& s) {
        if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail(ErrorKind::parse, "bad covector '" + s + "'");
        RationalVector v;
        std::stringstream ss(s.substr(1, s.size() - 2));
        std::string c;
        while (std::getline(ss, c, ',')) v.push_back(parse_rational(c));
        if (static_cast<int>(v.size()) != r) fail(ErrorKind::parse, "covector '" + s + "' has the wrong length");
        return v;
    };
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind.empty()) continue;
        if (kind == "interval") {
            if (r != 1) fail(ErrorKind::parse, "interval lines need rank 1");
            std::string lo, hi, coeffs;
            ls >> lo >> hi >> coeffs;
            if (coeffs != "coeffs") fail(ErrorKind::parse, "measure line " + std::to_string(lineno) + ": expected 'coeffs'");
            MeasurePiece p;
            if (lo != "-inf") p.conditions.push_back({{Rational(1)}, parse_rational(lo), -1});
            if (hi != "inf") p.conditions.push_back({{Rational(-1)}, -parse_rational(hi), -1});
            p.density = Polynomial(1);
            std::string c;
            int k = 0;
            while (ls >> c) p.density.add_term({k++}, parse_rational(c));
            u.pieces.push_back(p);
        } else if (kind == "piece") {
            MeasurePiece p;
            p.density = Polynomial(r);
            std::string tok;
            bool in_density = false;
            while (ls >> tok) {
                if (tok == "|") {
                    in_density = true;
                    continue;
                }
                if (!in_density) {
                    MeasureCondition c;
                    if (tok.rfind("delta", 0) == 0) {
                        auto open = tok.find('('), dot = tok.find(".xi-");
                        if (open == std::string::npos || dot == std::string::npos || tok.back() != ')')
                            fail(ErrorKind::parse, "bad delta condition '" + tok + "'");
                        c.delta_order = std::stoi(tok.substr(5, open - 5));
                        c.normal = parse_vector(tok.substr(open + 1, dot - open - 1));
                        c.offset = parse_rational(tok.substr(dot + 4, tok.size() - dot - 5));
                    } else {
                        auto ge = tok.find(".xi>=");
                        if (ge == std::string::npos) fail(ErrorKind::parse, "bad condition '" + tok + "'");
                        c.normal = parse_vector(tok.substr(0, ge));
                        c.offset = parse_rational(tok.substr(ge + 5));
                    }
                    p.conditions.push_back(c);
                    continue;
                }
                // coefficient*xi1^a*xi2^b
                std::stringstream ts(tok);
                std::string part;
                std::getline(ts, part, '*');
                Rational coef = parse_rational(part);
                Exponents e(r, 0);
                while (std::getline(ts, part, '*')) {
                    auto caret = part.find('^');
                    if (part.rfind("xi", 0) != 0 || caret == std::string::npos) fail(ErrorKind::parse, "bad monomial '" + tok + "'");
                    int var = std::stoi(part.substr(2, caret - 2)) - 1;
                    if (var < 0 || var >= r) fail(ErrorKind::parse, "bad variable in '" + tok + "'");
                    e[var] += std::stoi(part.substr(caret + 1));
                }
                p.density.add_term(e, coef);
            }
            u.pieces.push_back(p);
        } else {
            fail(ErrorKind::parse, "measure line " + std::to_string(lineno) + ": unknown record '" + kind + "'");
        }
    }
    return u;
}

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG line chart; points with a nonpositive coordinate on a log axis are dropped.
inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<PlotSeries>& series, bool log_x, bool log_y) {
    const double width = 640, height = 420, left = 80, right = 20, top = 40, bottom = 60;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) && (!log_y || y > 0);
    };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (usable(s.x[i], s.y[i])) {
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double v) { return height - bottom - (ty(v) - y0) / (y1 - y0) * (height - top - bottom); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        double xl = log_x ? std::pow(10.0, xv) : xv, yl = log_y ? std::pow(10.0, yv) : yv;
        o << "<text x=\"" << px(xl) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xl)
          << "</text>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yl) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yl) << "</text>\n";
    }
    o << "<text x=\"" << width / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    o << "<text x=\"18\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << height / 2
      << ")\">" << ylabel << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 5];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            if (usable(series[s].x[i], series[s].y[i])) o << fmt(px(series[s].x[i])) << "," << fmt(py(series[s].y[i])) << " ";
        o << "\"/>\n";
        o << "<text x=\"" << width - right - 4 << "\" y=\"" << top + 14 * (s + 1) << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color
          << "\">" << series[s].label << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

struct RunManifest {
    std::string scenario_hash;
    std::string tool_version = kToolVersion;
    std::string task;
    std::string started;
    std::string finished;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, bool>> checks;
    std::vector<std::pair<std::string, std::string>> values;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
    }

    std::string value(const std::string& name) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        return "";
    }

    std::string text() const {
        std::ostringstream o;
        o << "scenario_hash = " << scenario_hash << "\n";
        o << "tool_version = " << tool_version << "\n";
        o << "task = " << task << "\n";
        o << "started = " << started << "\n";
        o << "finished = " << finished << "\n";
        for (const auto& f : files) o << "file = " << f << "\n";
        for (const auto& [k, v] : values) o << "value." << k << " = " << v << "\n";
        for (const auto& [k, p] : checks) o << "check = " << (p ? "PASS" : "FAIL") << " " << k << "\n";
        o << "summary = " << (all_pass() ? "PASS" : "FAIL") << "\n";
        return o.str();
    }
};

namespace detail {

inline std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream o;
    o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return o.str();
}

class RunContext {
public:
    RunContext(const ScenarioConfig& cfg, RunManifest& manifest) : cfg_(cfg), manifest_(manifest), dir_(cfg.out_dir) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) fail(ErrorKind::data, "cannot write " + (dir_ / name).string());
        out << content;
        manifest_.files.push_back(name);
    }

    void check(const std::string& name, bool pass) { manifest_.checks.push_back({name, pass}); }
    void value(const std::string& name, const std::string& v) { manifest_.values.push_back({name, v}); }
    void value(const std::string& name, double v) { value(name, format_number(v)); }

    const ScenarioConfig& cfg() const { return cfg_; }

private:
    const ScenarioConfig& cfg_;
    RunManifest& manifest_;
    std::filesystem::path dir_;
};

inline AmplitudeExpr scenario_amplitude(const ScenarioConfig& cfg, int point_dim, int lie_dim) {
    if (!cfg.amplitude) fail(ErrorKind::parse, cfg.origin + ": amplitude is missing");
    try {
        return parse_amplitude(*cfg.amplitude, point_dim, lie_dim);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::parse) throw;
        fail(ErrorKind::parse, cfg.where("amplitude") + ": " + e.what());
    }
}

inline std::vector<double> scenario_mus(const ScenarioConfig& cfg) {
    if (cfg.mus.empty()) fail(ErrorKind::parse, cfg.origin + ": mu grid is missing (mu or mu.log)");
    return cfg.mus;
}

inline ConeLambda default_cone(int rank) {
    RationalVector z(rank);
    for (int k = 0; k < rank; ++k) z[k] = Rational(1) + Rational(k, 7);
    return ConeLambda{{z}};
}

inline std::vector<ConeLambda> scenario_cones(const ScenarioConfig& cfg, int rank) {
    std::vector<ConeLambda> out;
    for (const auto& c : cfg.cones) {
        ConeLambda cone{c};
        if (cone.rank() != rank) fail(ErrorKind::shape, cfg.where("cones") + ": cone rank differs from the torus rank");
        out.push_back(cone);
    }
    if (out.empty()) out.push_back(default_cone(rank));
    return out;
}

inline std::vector<FixedPointDatum> scenario_fixed_points(const ScenarioConfig& cfg) {
    if (!cfg.fixed_points.empty()) return cfg.fixed_points;
    if (cfg.model_kind == "sphere") return sphere_fixed_points();
    return {};
}

inline std::string measure_table(const PiecewisePolyMeasure& u, CsvTable& table) {
    if (u.rank == 1 && !u.has_atoms()) {
        table.columns = {"lo", "hi", "coefficients"};
        for (const auto& iv : u.intervals()) {
            if (iv.density.is_zero()) continue;
            std::string coeffs;
            int deg = std::max(0, iv.density.total_degree());
            for (int k = 0; k <= deg; ++k) coeffs += (k ? " " : "") + to_string(iv.density.coefficient({k}));
            table.add({iv.lo ? to_string(*iv.lo) : "-inf", iv.hi ? to_string(*iv.hi) : "inf", coeffs});
        }
    } else {
        table.columns = {"piece", "conditions", "density"};
        int i = 0;
        for (const auto& p : u.pieces) {
            std::string conds;
            for (const auto& c : p.conditions) conds += (conds.empty() ? "" : " ") + c.to_string();
            std::string dens;
            for (const auto& [e, c] : p.density.terms()) {
                dens += (dens.empty() ? "" : " ") + to_string(c);
                for (std::size_t k = 0; k < e.size(); ++k)
                    if (e[k]) dens += "*xi" + std::to_string(k + 1) + "^" + std::to_string(e[k]);
            }
            table.add({std::to_string(i++), conds, dens.empty() ? "0" : dens});
        }
    }
    return u.serialize();
}

/// Density samples on a seeded grid away from walls, for cone-independence comparisons.
inline std::vector<double> density_samples(const PiecewisePolyMeasure& u, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<double> out;
    for (int i = 0; i < 64; ++i) {
        std::vector<double> xi(u.rank);
        for (double& x : xi) x = d(rng);
        out.push_back(u.density(xi));
    }
    return out;
}

inline void density_plot(RunContext& ctx, const PiecewisePolyMeasure& u, const std::string& name) {
    if (u.rank != 1 || u.has_atoms()) return;
    auto b = u.breakpoints();
    double lo = b.empty() ? -2 : to_double(b.front()) - 1, hi = b.empty() ? 2 : to_double(b.back()) + 1;
    PlotSeries s{"density", {}, {}};
    for (int i = 0; i <= 400; ++i) {
        double x = lo + (hi - lo) * i / 400;
        s.x.push_back(x);
        s.y.push_back(u.density({x}));
    }
    ctx.write(name, svg_plot("Duistermaat-Heckman density", "xi", "density", {s}, false, false));
}

inline void task_oscint(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg();
    std::vector<double> mus = scenario_mus(cfg);
    if (cfg.sp_order > 0) {
        AmplitudeExpr a = scenario_amplitude(cfg, cfg.sp_dim, cfg.sp_dim);
        CsvTable t{{"nu", "re", "im", "remainder_bound"}, {}};
        PlotSeries s{"|partial sum|", {}, {}};
        if (a.is_zero()) {
            for (double nu : mus) t.add({format_number(nu), "0", "0", "0"});
        } else {
            auto e = inner_sp_expansion(a, mus, cfg.sp_order);
            for (std::size_t i = 0; i < mus.size(); ++i) {
                t.add({format_number(mus[i]), format_number(e.partial_sums[i].real()), format_number(e.partial_sums[i].imag()),
                       format_number(e.remainder_bound(mus[i]))});
                s.x.push_back(mus[i]);
                s.y.push_back(std::abs(e.partial_sums[i]));
            }
            for (std::size_t k = 0; k < e.coefficients.size(); ++k) ctx.value("c" + std::to_string(k), e.coefficients[k]);
        }
        ctx.write("result.csv", t.text());
        ctx.write("expansion.svg", svg_plot("inner stationary phase partial sums", "nu", "|sum|", {s}, true, true));
        ctx.check("expansion computed", true);
        return;
    }
    LinearHamiltonianModel model = cfg.linear_model();
    AmplitudeExpr a = scenario_amplitude(cfg, model.real_dim(), model.torus_rank);
    std::vector<double> eta = to_double(cfg.eta_for(model.torus_rank));
    CsvTable t{{"mu", "re", "im", "rule", "nodes", "exact_re", "exact_im", "relative_difference"}, {}};
    PlotSeries quad{"quadrature", {}, {}}, exact{"closed form", {}, {}};
    double worst = 0;
    bool any_exact = false;
    for (double mu : mus) {
        if (a.is_zero()) {
            t.add({format_number(mu), "0", "0", "zero", "0", "0", "0", "0"});
            continue;
        }
        QuadratureOutcome q = brute_force_I(model, a, mu, cfg.quad, eta);
        std::vector<std::string> row{format_number(mu), format_number(q.value.real()), format_number(q.value.imag()), q.rule,
                                     std::to_string(q.nodes), "", "", ""};
        quad.x.push_back(mu);
        quad.y.push_back(std::abs(q.value));
        try {
            Complex g = gaussian_exact_I(model, a, mu, eta);
            double rel = std::abs(q.value - g) / std::max(1e-300, std::abs(g));
            worst = std::max(worst, rel);
            any_exact = true;
            row[5] = format_number(g.real());
            row[6] = format_number(g.imag());
            row[7] = format_number(rel);
            exact.x.push_back(mu);
            exact.y.push_back(std::abs(g));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::capability) throw;
        }
        t.add(row);
    }
    ctx.write("result.csv", t.text());
    ctx.write("integral.svg", svg_plot("oscillatory integral", "mu", "|I(mu)|", {quad, exact}, true, true));
    if (any_exact) {
        ctx.value("max_relative_difference", worst);
        ctx.check("quadrature agrees with the closed form", worst <= cfg.expect_oscint_rel);
    } else {
        ctx.check("quadrature completed", true);
    }
}

inline void task_desing(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg();
    LinearHamiltonianModel model = cfg.linear_model();
    AmplitudeExpr a = scenario_amplitude(cfg, model.real_dim(), model.torus_rank);
    std::vector<double> mus = scenario_mus(cfg);
    RationalVector eta = cfg.eta_for(model.torus_rank);
    CsvTable t{{"mu", "re", "im", "predicted", "residual"}, {}};
    if (a.is_zero()) {
        for (double mu : mus) t.add({format_number(mu), "0", "0", "0", "0"});
        ctx.write("result.csv", t.text());
        ctx.value("L0", 0.0);
        ctx.check("zero amplitude gives zero outputs", true);
        return;
    }
    AsymptoticResult res = desingularize(model, a, mus, cfg.depth_cap, eta, cfg.quad);
    PlotSeries resid{"|I - (2 pi mu)^kappa L0|", {}, {}}, fit{"fit", {}, {}};
    for (const auto& row : res.table) {
        t.add({format_number(row.mu), format_number(row.value.real()), format_number(row.value.imag()), format_number(row.predicted),
               format_number(row.residual)});
        resid.x.push_back(row.mu);
        resid.y.push_back(row.residual);
        if (res.table.size() >= 4) {
            fit.x.push_back(row.mu);
            fit.y.push_back(std::exp(res.plain.constant + res.plain.alpha * std::log(row.mu)));
        }
    }
    ctx.write("result.csv", t.text());
    ctx.write("tree.txt", res.tree);
    ctx.write("residual.svg", svg_plot("remainder order", "mu", "residual", {resid, fit}, true, true));
    ctx.value("kappa", std::to_string(res.kappa));
    ctx.value("L0", res.L0);
    ctx.value("lambda_a", std::to_string(res.lambda_a));
    ctx.value("chain_bound", std::to_string(res.chain_bound));
    ctx.value("tree_depth", std::to_string(res.tree_depth));
    ctx.value("lambda_definitions_differ", res.lambda_flag ? "yes" : "no");
    ctx.value("oracle", res.oracle);
    if (res.table.size() >= 4) {
        ctx.value("alpha", res.plain.alpha);
        ctx.value("alpha_r2", res.plain.r_squared);
    }
    if (res.table.size() >= 5 && std::all_of(mus.begin(), mus.end(), [](double m) { return m < 1; })) {
        ctx.value("log_fit_alpha", res.with_log.alpha);
        ctx.value("log_fit_beta", res.with_log.beta);
    }
    ctx.check("tree depth within the chain bound", res.tree_depth <= res.chain_bound);
    if (cfg.expect_kappa) ctx.check("kappa", res.kappa == *cfg.expect_kappa);
    if (cfg.expect_lambda_a) ctx.check("lambda_a", res.lambda_a == *cfg.expect_lambda_a);
    if (cfg.expect_tree_depth) ctx.check("tree depth", res.tree_depth == *cfg.expect_tree_depth);
    if (cfg.expect_L0)
        ctx.check("leading term L0", std::abs(res.L0 - *cfg.expect_L0) <= cfg.expect_L0_rel * std::max(1.0, std::abs(*cfg.expect_L0)));
    if (cfg.expect_alpha) {
        bool ok = res.table.size() >= 4 && res.plain.alpha >= cfg.expect_alpha->first && res.plain.alpha <= cfg.expect_alpha->second;
        ctx.check("fitted alpha in range", ok);
    }
    if (cfg.expect_beta_max) {
        bool ok = res.table.size() >= 5 && std::abs(res.with_log.beta) <= *cfg.expect_beta_max;
        ctx.check("fitted |beta| bound", ok);
    }
}

inline void task_dh(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg();
    std::vector<PiecewisePolyMeasure> measures;
    auto data = scenario_fixed_points(cfg);
    if (!data.empty()) {
        if (cfg.rho == 0) {
            CsvTable t{{"lo", "hi", "coefficients"}, {}};
            ctx.write("result.csv", t.text());
            ctx.check("zero form gives the zero measure", true);
            return;
        }
        for (const auto& cone : scenario_cones(cfg, data[0].rank())) {
            PiecewisePolyMeasure u = dh_measure(data, cone);
            if (cfg.rho != 1)
                for (auto& p : u.pieces) p.density = p.density * cfg.rho;
            measures.push_back(u);
        }
    } else {
        measures.push_back(dh_measure(cfg.linear_model()));
    }
    const PiecewisePolyMeasure& u = measures.front();
    CsvTable t;
    std::string text = measure_table(u, t);
    ctx.write("result.csv", t.text());
    ctx.write("measure.txt", text);
    density_plot(ctx, u, "density.svg");
    ctx.value("two_pi_power", std::to_string(u.two_pi_power));
    ctx.check("measure file re-parses to the same measure", parse_measure(text).serialize() == text);
    if (measures.size() > 1) {
        auto ref = density_samples(u, cfg.seed.value_or(5));
        bool same = true;
        for (std::size_t i = 1; i < measures.size(); ++i) {
            auto s = density_samples(measures[i], cfg.seed.value_or(5));
            for (std::size_t k = 0; k < s.size(); ++k) same = same && std::abs(s[k] - ref[k]) <= 1e-9 * (1 + std::abs(ref[k]));
        }
        ctx.check("measure independent of the cone", same);
    }
}

inline void task_residue(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg();
    auto data = scenario_fixed_points(cfg);
    CsvTable t{{"cone", "residue_coefficient", "residue", "lhs_re", "lhs_im", "rhs_re", "rhs_im"}, {}};
    std::vector<Rational> residues;
    if (!data.empty()) {
        int r = data[0].rank();
        RationalVector eta = cfg.eta_for(r);
        auto cones = scenario_cones(cfg, r);
        for (std::size_t i = 0; i < cones.size(); ++i) {
            PiecewisePolyMeasure u = fourier_piecewise(localization_terms(data, cfg.rho), cones[i]);
            Rational res = jk_residue_exact(u, eta);
            residues.push_back(res);
            t.add({std::to_string(i), to_string(res), format_number(to_double(res) * u.scale()), "", "", "", ""});
            if (i == 0) {
                CsvTable mt;
                ctx.write("measure.txt", measure_table(u, mt));
                ctx.value("two_pi_power", std::to_string(u.two_pi_power));
            }
        }
    } else {
        LinearHamiltonianModel model = cfg.linear_model();
        RationalVector eta = cfg.eta_for(model.torus_rank);
        auto cones = scenario_cones(cfg, model.torus_rank);
        double worst = 0;
        for (std::size_t i = 0; i < cones.size(); ++i) {
            ResidueCheck c = residue_formula_check(model, cfg.alpha, cfg.cut_radius, cones[i], eta);
            residues.push_back(c.residue);
            double scale = std::pow(2 * M_PI, model.torus_rank);
            t.add({std::to_string(i), to_string(c.residue), format_number(to_double(c.residue) * scale), format_number(c.lhs.real()),
                   format_number(c.lhs.imag()), format_number(c.rhs.real()), format_number(c.rhs.imag())});
            worst = std::max(worst, c.difference / std::max(1e-300, std::abs(c.lhs)));
            if (i == 0) {
                ctx.value("reduced_volume_integral", c.reduced_volume_integral);
                if (cfg.alpha != 0) {
                    CsvTable mt;
                    ctx.write("measure.txt", measure_table(fourier_piecewise(localization_terms(c.data, 1), cones[i]), mt));
                }
            }
        }
        if (cfg.alpha == 0) {
            ctx.check("zero form gives zero on both sides", worst == 0);
        } else {
            ctx.value("max_relative_difference", worst);
            ctx.check("reduced integral equals the residue side", worst <= cfg.expect_residue_rel);
        }
    }
    ctx.write("result.csv", t.text());
    ctx.value("residue_coefficient", to_string(residues.front()));
    bool same = std::all_of(residues.begin(), residues.end(), [&](const Rational& x) { return x == residues.front(); });
    if (residues.size() > 1) ctx.check("residue independent of the cone", same);
    if (cfg.expect_residue_coefficient) ctx.check("residue coefficient", residues.front() == *cfg.expect_residue_coefficient);
}

inline void task_weyl(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg();
    CompactGroupData g = cfg.weyl_group == "su2" ? CompactGroupData::su2() : CompactGroupData::torus(cfg.weyl_rank);
    double b = to_double(cfg.weyl_rate);
    if (!(b > 0)) fail(ErrorKind::domain, cfg.where("weyl.rate") + ": rate must be positive");
    auto f = [b](const std::vector<double>& x) {
        double s = 0;
        for (double v : x) s += v * v;
        return std::exp(-b * s);
    };
    double value = weyl_lie_algebra_integral(g, f, cfg.seed.value_or(7));
    double oracle = std::pow(M_PI / b, g.dim() / 2.0);
    double rel = std::abs(value - oracle) / oracle;
    CsvTable t{{"group", "dimension", "value", "gaussian_oracle", "relative_error"}, {}};
    t.add({g.name, std::to_string(g.dim()), format_number(value), format_number(oracle), format_number(rel)});
    ctx.write("result.csv", t.text());
    ctx.value("relative_error", rel);
    ctx.check("Weyl integral matches the Gaussian oracle", rel <= cfg.expect_weyl_rel);
}

inline void task_check(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg();
    LinearHamiltonianModel model = cfg.linear_model();
    CsvTable t{{"check", "value", "tolerance", "samples", "status"}, {}};
    for (const auto& c : structural_checks(model, cfg.seed.value_or(11))) {
        t.add({c.name, format_number(c.value), format_number(c.tolerance), std::to_string(c.samples),
               c.skipped ? "SKIP" : (c.pass() ? "PASS" : "FAIL")});
        ctx.check(c.name, c.pass());
    }
    ctx.write("result.csv", t.text());
}

}  // namespace detail

/// Runs the scenario's task, writing result.csv, task-specific files, and manifest.txt into cfg.out_dir.
inline RunManifest run_scenario(const ScenarioConfig& cfg) {
    RunManifest m;
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
    m.scenario_hash = hash;
    m.task = cfg.task;
    m.started = detail::utc_now();
    detail::RunContext ctx(cfg, m);
    try {
        if (cfg.task == "oscint") detail::task_oscint(ctx);
        else if (cfg.task == "desing") detail::task_desing(ctx);
        else if (cfg.task == "residue") detail::task_residue(ctx);
        else if (cfg.task == "dh") detail::task_dh(ctx);
        else if (cfg.task == "weyl") detail::task_weyl(ctx);
        else if (cfg.task == "check") detail::task_check(ctx);
        else fail(ErrorKind::parse, cfg.where("task") + ": unknown task '" + cfg.task + "'");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse) throw;
        fail(e.kind(), "task " + cfg.task + " (" + cfg.origin + "): " + std::string(e.what()));
    }
    m.finished = detail::utc_now();
    m.files.push_back("manifest.txt");
    ctx.write("manifest.txt", m.text());
    m.files.pop_back();
    return m;
}

}  // namespace equiloc
