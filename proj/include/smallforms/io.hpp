#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "smallforms/approx.hpp"
#include "smallforms/curves.hpp"
#include "smallforms/solver.hpp"

namespace smallforms::io {

using nlohmann::json;

// curve document: {"n": 2, "coords": [[[0,"1"]], [[1,"1"]], [[2,"1"]]],
//                  "interval": ["-1/2", "1/2"]}
// each coordinate is a list of [degree, coefficient] pairs; plain dense
// coefficient lists are accepted too.
curves::CurveMap curve_from_json(const json& doc);
json curve_to_json(const curves::CurveMap& curve);

// system document: {"type": "veronese", "n": 2, "m": 1, "interval": [lo, hi]}
// or {"curves": [curve documents]}
curves::SystemMap system_from_json(const json& doc);

// psi document: {"kind": "power", "c": 1.0, "tau": 2.5}
//               {"kind": "logpower", "c": .., "tau": .., "kappa": ..}
//               {"kind": "table", "path": "psi.csv"} or {"kind":"table","points":[[h,v],..]}
approx::ApproxFunction psi_from_json(const json& doc, const std::string& base_dir = "");

// multivariate coordinates for the fibering op:
// {"vars": 2, "coords": [[["1", [0,0]]], [["1",[1,0]]], [["1",[0,1]]]],
//  "box": [[-1, 1], [-1, 1]]}
std::vector<MPoly> mpolys_from_json(const json& doc);
std::vector<std::pair<Rat, Rat>> box_from_json(const json& doc);

Rat rat_from_json(const json& v);

// 17 significant digits, shortest-faithful not required
std::string fmt17(double v);

uint64_t fnv1a64(const std::string& s);
std::string hash_hex(const json& config);

struct Csv {
    explicit Csv(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    std::string str() const { return body_; }

  private:
    std::string body_;
    size_t width_;
};

void write_file(const std::string& path, const std::string& content);

// single-file polyline chart for per-block tables
std::string svg_line_chart(const std::string& title, const std::vector<double>& xs,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series);

json solution_to_json(const solver::SolutionRecord& rec);

}  // namespace smallforms::io
