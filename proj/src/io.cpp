#include "smallforms/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smallforms/errors.hpp"

namespace smallforms::io {

Rat rat_from_json(const json& v) {
    if (v.is_string()) return rat_from_string(v.get<std::string>());
    if (v.is_number_integer()) return Rat((long)v.get<long long>());
    if (v.is_number_float()) return rat_from_double(v.get<double>());
    throw ConfigError("expected a rational (string \"p/q\" or number)");
}

curves::CurveMap curve_from_json(const json& doc) {
    if (!doc.contains("n") || !doc.contains("coords") || !doc.contains("interval"))
        throw ConfigError("curve document needs n, coords, interval");
    int n = doc["n"].get<int>();
    const json& coords = doc["coords"];
    if (!coords.is_array() || (int)coords.size() != n + 1)
        throw ConfigError("curve needs exactly n+1 coordinates");
    std::vector<Poly> polys;
    for (const json& coord : coords) {
        if (!coord.is_array()) throw ConfigError("coordinate must be a list");
        std::vector<Rat> dense;
        bool pairs = !coord.empty() && coord[0].is_array();
        if (pairs) {
            for (const json& term : coord) {
                if (!term.is_array() || term.size() != 2)
                    throw ConfigError("coefficient pair must be [degree, value]");
                int deg = term[0].get<int>();
                if (deg < 0) throw ConfigError("negative degree");
                if ((int)dense.size() <= deg) dense.resize(deg + 1, Rat(0));
                dense[deg] += rat_from_json(term[1]);
            }
        } else {
            for (const json& c : coord) dense.push_back(rat_from_json(c));
        }
        polys.emplace_back(std::move(dense));
    }
    const json& iv = doc["interval"];
    if (!iv.is_array() || iv.size() != 2) throw ConfigError("interval must be [lo, hi]");
    return curves::CurveMap(std::move(polys), rat_from_json(iv[0]), rat_from_json(iv[1]));
}

json curve_to_json(const curves::CurveMap& curve) {
    json coords = json::array();
    for (const Poly& p : curve.coords()) {
        json terms = json::array();
        for (int k = 0; k <= p.degree(); ++k)
            if (p.coeff(k) != 0) terms.push_back({k, rat_to_string(p.coeff(k))});
        if (terms.empty()) terms.push_back({0, "0"});
        coords.push_back(terms);
    }
    return json{{"n", curve.n()},
                {"coords", coords},
                {"interval", {rat_to_string(curve.lo()), rat_to_string(curve.hi())}}};
}

curves::SystemMap system_from_json(const json& doc) {
    if (doc.contains("type")) {
        std::string type = doc["type"].get<std::string>();
        if (type == "veronese") {
            int n = doc.at("n").get<int>();
            int m = doc.at("m").get<int>();
            const json& iv = doc.at("interval");
            return curves::veronese_system(n, m, rat_from_json(iv[0]), rat_from_json(iv[1]));
        }
        throw ConfigError("unknown system type: " + type);
    }
    if (doc.contains("curves")) {
        std::vector<curves::CurveMap> cs;
        for (const json& c : doc["curves"]) cs.push_back(curve_from_json(c));
        return curves::SystemMap(std::move(cs));
    }
    throw ConfigError("system document needs \"type\" or \"curves\"");
}

approx::ApproxFunction psi_from_json(const json& doc, const std::string& base_dir) {
    std::string kind = doc.value("kind", "power");
    if (kind == "power")
        return approx::ApproxFunction::power_law(doc.value("c", 1.0), doc.at("tau").get<double>());
    if (kind == "logpower")
        return approx::ApproxFunction::log_power_law(doc.value("c", 1.0),
                                                     doc.at("tau").get<double>(),
                                                     doc.at("kappa").get<double>());
    if (kind == "table") {
        if (doc.contains("path")) {
            std::string path = doc["path"].get<std::string>();
            if (!base_dir.empty() && !path.empty() && path[0] != '/')
                path = base_dir + "/" + path;
            return approx::ApproxFunction::tabulated_from_csv(path);
        }
        std::vector<std::pair<long long, double>> pts;
        for (const json& row : doc.at("points"))
            pts.emplace_back(row.at(0).get<long long>(), row.at(1).get<double>());
        return approx::ApproxFunction::tabulated(std::move(pts));
    }
    throw ConfigError("unknown psi kind: " + kind);
}

std::vector<MPoly> mpolys_from_json(const json& doc) {
    int vars = doc.at("vars").get<int>();
    if (vars < 1) throw ConfigError("need vars >= 1");
    std::vector<MPoly> out;
    for (const json& coord : doc.at("coords")) {
        MPoly p;
        p.vars = vars;
        for (const json& term : coord) {
            if (!term.is_array() || term.size() != 2)
                throw ConfigError("multivariate term must be [coeff, [exponents]]");
            MPoly::Term t;
            t.coeff = rat_from_json(term[0]);
            for (const json& e : term[1]) t.exp.push_back(e.get<int>());
            if ((int)t.exp.size() != vars) throw ConfigError("exponent vector length mismatch");
            p.terms.push_back(std::move(t));
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::pair<Rat, Rat>> box_from_json(const json& doc) {
    std::vector<std::pair<Rat, Rat>> box;
    for (const json& iv : doc) {
        if (!iv.is_array() || iv.size() != 2) throw ConfigError("box entry must be [lo, hi]");
        box.emplace_back(rat_from_json(iv[0]), rat_from_json(iv[1]));
    }
    return box;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(const json& config) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a64(config.dump()));
    return buf;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Csv::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("csv row width mismatch");
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::string svg_line_chart(const std::string& title, const std::vector<double>& xs,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    const int W = 640, Hh = 400, pad = 48;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (double x : xs) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    for (const auto& [name, ys] : series)
        for (double y : ys)
            if (std::isfinite(y)) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
    if (!(xmax > xmin)) xmax = xmin + 1;
    if (!(ymax > ymin)) ymax = ymin + 1;
    auto X = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
    auto Y = [&](double y) { return Hh - pad - (y - ymin) / (ymax - ymin) * (Hh - 2 * pad); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream ss;
    ss << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << Hh << "'>\n";
    ss << "<rect width='100%' height='100%' fill='white'/>\n";
    ss << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    ss << "<line x1='" << pad << "' y1='" << Hh - pad << "' x2='" << W - pad << "' y2='"
       << Hh - pad << "' stroke='black'/>\n";
    ss << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='" << Hh - pad
       << "' stroke='black'/>\n";
    int ci = 0;
    for (const auto& [name, ys] : series) {
        ss << "<polyline fill='none' stroke='" << colors[ci % 4] << "' points='";
        for (size_t i = 0; i < xs.size() && i < ys.size(); ++i)
            ss << X(xs[i]) << "," << Y(ys[i]) << " ";
        ss << "'/>\n";
        ss << "<text x='" << W - pad + 4 << "' y='" << pad + 16 * ci << "' font-size='11' fill='"
           << colors[ci % 4] << "'>" << name << "</text>\n";
        ++ci;
    }
    ss << "</svg>\n";
    return ss.str();
}

json solution_to_json(const solver::SolutionRecord& rec) {
    json a = json::array();
    for (const Int& c : rec.form.a) a.push_back(c.get_str());
    json res = json::array();
    for (double r : rec.residuals) res.push_back(fmt17(r));
    return json{{"t", rec.block_t},
                {"H", rec.height},
                {"a", a},
                {"residuals", res},
                {"derivative_profile", rec.derivative_profile}};
}

}  // namespace smallforms::io
