#include "smallforms/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <limits>
#include <sstream>

#include "smallforms/errors.hpp"
#include "smallforms/io.hpp"
#include "smallforms/measure.hpp"
#include "smallforms/ubiquity.hpp"

namespace smallforms::runner {

namespace {

using namespace smallforms;
using io::Csv;
using io::fmt17;
using io::json;

struct Artifacts {
    std::ostringstream text;
    std::vector<std::pair<std::string, std::string>> files;  // name, content
    void add(const std::string& name, const std::string& content) {
        files.emplace_back(name, content);
    }
};

solver::SolverConfig solver_config(const json& cfg) {
    solver::SolverConfig sc;
    std::string backend = cfg.value("backend", "exhaustive");
    if (backend == "exhaustive")
        sc.backend = solver::Backend::Exhaustive;
    else if (backend == "lattice")
        sc.backend = solver::Backend::Lattice;
    else if (backend == "hybrid")
        sc.backend = solver::Backend::Hybrid;
    else
        throw ConfigError("unknown backend: " + backend);
    sc.H_max = cfg.value("H_max", (long long)16);
    sc.work_limit = cfg.value("work_limit", 1e9);
    sc.node_limit = cfg.value("node_limit", (long long)50000000);
    sc.radius_multiplier = cfg.value("radius_multiplier", 1.0);
    sc.exhaustive_t_cap = cfg.value("exhaustive_t_cap", 7);
    sc.parallel = cfg.value("parallel", true);
    return sc;
}

std::vector<Rat> point_from(const json& cfg) {
    std::vector<Rat> x;
    for (const json& v : cfg.at("x")) x.push_back(io::rat_from_json(v));
    return x;
}

measure::SampleRegion region_from(const json& cfg, uint64_t seed) {
    measure::SampleRegion r;
    const json& reg = cfg.at("region");
    r.box = io::box_from_json(reg.at("box"));
    r.samples = reg.value("samples", (long long)100);
    r.seed = seed;
    return r;
}

void cmd_classify(const json& cfg, Artifacts& art) {
    auto psi = io::psi_from_json(cfg.at("psi"));
    int n = cfg.at("n").get<int>(), m = cfg.at("m").get<int>();
    std::vector<long long> cutoffs = cfg.value("cutoffs", std::vector<long long>{1000, 100000});
    auto verdict = approx::classify(psi, n, m, cutoffs);
    art.text << "classification " << approx::to_string(verdict.classification) << "\n";
    art.text << "threshold " << fmt17(verdict.threshold) << " index " << fmt17(verdict.index)
             << (verdict.boundary ? " (boundary)" : "") << "\n";
    Csv csv({"H_max", "partial_sum"});
    for (const auto& [h, s] : verdict.partial_sums) csv.row({std::to_string(h), fmt17(s)});
    art.add("classify.csv", csv.str());
    json extra;
    if (cfg.contains("s")) {
        double s = cfg.at("s").get<double>();
        long long R = cfg.value("R_max", (long long)100000);
        double v = approx::partial_sum_hausdorff(psi, n, m, s, R);
        art.text << "hausdorff_partial_sum(s=" << s << ", R=" << R << ") " << fmt17(v) << "\n";
        extra["hausdorff_partial_sum"] = v;
    }
    if (cfg.contains("g")) {
        const json& gj = cfg.at("g");
        auto g = gj.value("kind", "power") == "power"
                     ? approx::DimensionFunction::power(gj.at("s").get<double>())
                     : throw ConfigError("only power dimension functions via CLI");
        int d = cfg.value("d", m);
        long long H = cfg.value("H_max", (long long)100000);
        auto pair = approx::partial_sum_divergence_g(psi, g, n, d, m, H);
        art.text << "divergence_direct " << fmt17(pair.direct) << " condensed "
                 << fmt17(pair.condensed) << "\n";
        extra["divergence_direct"] = pair.direct;
        extra["divergence_condensed"] = pair.condensed;
    }
    json doc{{"classification", approx::to_string(verdict.classification)},
             {"threshold", verdict.threshold},
             {"index", verdict.index},
             {"boundary", verdict.boundary}};
    if (!extra.is_null()) doc["extra"] = extra;
    art.add("classify.json", doc.dump(2) + "\n");
}

void cmd_dimension(const json& cfg, Artifacts& art) {
    int n = cfg.at("n").get<int>(), m = cfg.at("m").get<int>(), d = cfg.at("d").get<int>();
    double bound;
    json tau = cfg.at("tau");
    if (tau.is_string()) {
        Rat t = rat_from_string(tau.get<std::string>());
        bound = rat_to_double(approx::dimension_lower_bound_exact(n, m, d, t));
    } else {
        bound = approx::dimension_lower_bound(n, m, d, tau.get<double>());
    }
    art.text << fmt17(bound) << "\n";
    Csv csv({"n", "m", "d", "tau", "dimension_lower_bound"});
    csv.row({std::to_string(n), std::to_string(m), std::to_string(d),
             tau.is_string() ? tau.get<std::string>() : fmt17(tau.get<double>()), fmt17(bound)});
    art.add("dimension.csv", csv.str());
}

std::vector<std::string> solution_header(int n, int m) {
    std::vector<std::string> h{"t", "H"};
    for (int i = 0; i <= n; ++i) h.push_back("a_" + std::to_string(i));
    for (int j = 1; j <= m; ++j) h.push_back("residual_" + std::to_string(j));
    return h;
}

void solution_rows(Csv& csv, const std::vector<solver::SolutionRecord>& recs) {
    for (const auto& rec : recs) {
        std::vector<std::string> cells{std::to_string(rec.block_t), std::to_string(rec.height)};
        for (const Int& a : rec.form.a) cells.push_back(a.get_str());
        for (double r : rec.residuals) cells.push_back(fmt17(r));
        csv.row(cells);
    }
}

void cmd_enumerate(const json& cfg, Artifacts& art) {
    auto system = io::system_from_json(cfg.at("system"));
    auto psi = io::psi_from_json(cfg.at("psi"));
    auto x = point_from(cfg);
    auto sc = solver_config(cfg);
    auto recs = solver::enumerate_solutions(system, x, psi, sc);
    art.text << "solutions " << recs.size() << "\n";
    Csv csv(solution_header(system.n(), system.m()));
    solution_rows(csv, recs);
    art.add("solutions.csv", csv.str());
    json list = json::array();
    for (const auto& r : recs) list.push_back(io::solution_to_json(r));
    art.add("solutions.json", json{{"solutions", list}}.dump(2) + "\n");
}

void cmd_witness(const json& cfg, Artifacts& art) {
    auto system = io::system_from_json(cfg.at("system"));
    auto x = point_from(cfg);
    int t = cfg.at("t").get<int>();
    double delta0 = cfg.value("delta0", 0.0);
    auto w = solver::dirichlet_witness(system, x, t, delta0, solver_config(cfg));
    art.text << "witness a = (";
    for (size_t i = 0; i < w.record.form.a.size(); ++i)
        art.text << (i ? "," : "") << w.record.form.a[i].get_str();
    art.text << ") max_residual " << fmt17(*std::max_element(w.record.residuals.begin(),
                                                             w.record.residuals.end()))
             << " bound " << fmt17(w.value_bound) << "\n";
    json doc = io::solution_to_json(w.record);
    doc["value_bound"] = w.value_bound;
    doc["height_cap"] = w.height_cap;
    doc["C"] = w.C;
    doc["t"] = t;
    art.add("witness.json", doc.dump(2) + "\n");
}

void cmd_dichotomy(const json& cfg, Artifacts& art, uint64_t seed) {
    auto system = io::system_from_json(cfg.at("system"));
    auto psi = io::psi_from_json(cfg.at("psi"));
    auto region = region_from(cfg, seed);
    measure::DichotomyConfig dc;
    dc.solver = solver_config(cfg);
    dc.t_max = cfg.value("t_max", 6);
    dc.point_precision_bits = cfg.value("point_bits", 30);
    dc.parallel = dc.solver.parallel;
    auto res = measure::dichotomy_experiment(system, psi, region, dc);
    art.text << "points_ok " << res.points_ok << " points_failed " << res.points_failed << "\n";
    Csv csv({"t", "hit_fraction", "ci_lo", "ci_hi", "mean_count", "heuristic"});
    std::vector<double> xs, f1, f2;
    for (const auto& r : res.rows) {
        csv.row({std::to_string(r.t), fmt17(r.hit_fraction), fmt17(r.ci_lo), fmt17(r.ci_hi),
                 fmt17(r.mean_count), fmt17(r.heuristic)});
        xs.push_back(r.t);
        f1.push_back(r.mean_count);
        f2.push_back(r.heuristic);
    }
    art.add("dichotomy.csv", csv.str());
    if (cfg.value("svg", false))
        art.add("dichotomy.svg",
                io::svg_line_chart("per-block mean count vs heuristic", xs,
                                   {{"mean_count", f1}, {"heuristic", f2}}));
}

void cmd_cells(const json& cfg, Artifacts& art) {
    auto system = io::system_from_json(cfg.at("system"));
    auto psi = io::psi_from_json(cfg.at("psi"));
    solver::Form form;
    for (const json& v : cfg.at("a")) form.a.push_back(Int((long)v.get<long long>()));
    form.a = solver::Form::canonical(form.a);
    int j = cfg.value("j", 0);
    auto cd = measure::solution_cells(form, system, psi, j);
    art.text << "intervals " << cd.intervals.size() << " K_bound " << cd.K_bound << "\n";
    Csv csv({"index", "lo", "hi", "length", "inf_deriv", "length_bound"});
    for (size_t i = 0; i < cd.intervals.size(); ++i) {
        const auto& ci = cd.intervals[i];
        double inf = rat_to_double(ci.inf_deriv);
        double bound = inf > 0 ? 2.0 * rat_to_double(cd.psi_H) / inf
                               : std::numeric_limits<double>::infinity();
        csv.row({std::to_string(i), fmt17(rat_to_double(ci.left.lo)),
                 fmt17(rat_to_double(ci.right.hi)), fmt17(ci.length()), fmt17(inf), fmt17(bound)});
    }
    art.add("cells.csv", csv.str());
}

void cmd_ubiquity(const json& cfg, Artifacts& art, uint64_t seed) {
    auto system = io::system_from_json(cfg.at("system"));
    ubiquity::UbiquityConfig uc;
    uc.omega = io::box_from_json(cfg.at("omega"));
    uc.delta0 = cfg.value("delta0", 0.0);
    uc.k0 = cfg.value("k0", 0.0);
    uc.parallel = cfg.value("parallel", true);
    std::vector<int> levels = cfg.value("t_levels", std::vector<int>{6, 7, 8});
    std::vector<std::pair<Rat, Rat>> ball =
        cfg.contains("ball") ? io::box_from_json(cfg.at("ball")) : uc.omega;
    long long samples = cfg.value("samples", (long long)20000);

    if (cfg.value("calibrate", false))
        uc.eta = ubiquity::calibrate_eta(system, uc, levels, ball, samples, seed);
    else
        uc.eta = cfg.value("eta", 1.0);
    art.text << "eta " << fmt17(uc.eta) << " k0 " << fmt17(uc.effective_k0(system)) << "\n";

    Csv csv({"t", "points", "fraction", "fraction_lower", "fraction_upper", "exact"});
    json pts_doc = json::array();
    std::vector<double> xs, fr;
    for (int t : levels) {
        auto set = ubiquity::resonant_points(system, uc, t);
        auto cov = ubiquity::covering_fraction(set.points, system, uc, t, ball, samples, seed);
        csv.row({std::to_string(t), std::to_string(set.points.size()), fmt17(cov.fraction),
                 fmt17(cov.fraction_lower), fmt17(cov.fraction_upper),
                 cov.exact ? "1" : "0"});
        xs.push_back(t);
        fr.push_back(cov.fraction);
        for (const auto& rp : set.points) {
            json g = json::array();
            for (const auto& br : rp.gammas)
                g.push_back({rat_to_string(br.lo), rat_to_string(br.hi)});
            json a = json::array();
            for (const Int& c : rp.form.a) a.push_back(c.get_str());
            pts_doc.push_back({{"t", t}, {"a", a}, {"beta", rp.beta}, {"gammas", g}});
        }
        art.text << "t " << t << " points " << set.points.size() << " fraction "
                 << fmt17(cov.fraction) << "\n";
    }
    art.add("covering.csv", csv.str());
    art.add("resonant.json", json{{"points", pts_doc}}.dump(2) + "\n");
    if (cfg.value("svg", false))
        art.add("covering.svg",
                io::svg_line_chart("covering fraction by level", xs, {{"fraction", fr}}));
}

void cmd_fiber(const json& cfg, Artifacts& art) {
    auto coords = io::mpolys_from_json(cfg.at("coords"));
    std::vector<Rat> u;
    for (const json& v : cfg.at("u")) u.push_back(io::rat_from_json(v));
    auto box = io::box_from_json(cfg.at("coords").at("box"));
    int D = cfg.value("D", 2);
    int D_cap = cfg.value("D_cap", 8);
    auto res = curves::fiber_substitution(coords, u, box, D, D_cap);
    art.text << "used_D " << res.used_D << "\n";
    art.add("fiber_curve.json", io::curve_to_json(res.curve).dump(2) + "\n");
}

void cmd_theta(const json& cfg, Artifacts& art) {
    std::vector<std::vector<double>> groups;
    for (const json& g : cfg.at("groups")) groups.push_back(g.get<std::vector<double>>());
    auto diag = measure::theta_diagnostics(measure::ThetaTuple::from_groups(groups));
    art.text << "theta " << fmt17(diag.theta) << " property_M "
             << (diag.property_M_ok ? "true" : "false");
    if (diag.bound_applicable) art.text << " theta_hat_bound " << fmt17(diag.theta_hat_bound);
    art.text << "\n";
    json doc{{"theta", diag.theta},
             {"theta0", diag.theta0},
             {"theta_inf", diag.theta_inf},
             {"property_M", diag.property_M_ok},
             {"bound_applicable", diag.bound_applicable},
             {"theta_hat_bound", diag.theta_hat_bound},
             {"group_property_M", diag.group_property_M}};
    art.add("theta.json", doc.dump(2) + "\n");
}

}  // namespace

RunResult run(const json& config, const std::string& out_dir) {
    RunResult res;
    try {
        if (!config.is_object()) throw ConfigError("config must be a JSON object");
        std::string sub = config.value("subcommand", "");
        uint64_t seed = config.value("seed", (uint64_t)1);
        int threads = config.value("threads", 0);
        if (threads > 0) omp_set_num_threads(threads);

        Artifacts art;
        if (sub == "classify")
            cmd_classify(config, art);
        else if (sub == "dimension")
            cmd_dimension(config, art);
        else if (sub == "enumerate")
            cmd_enumerate(config, art);
        else if (sub == "witness")
            cmd_witness(config, art);
        else if (sub == "dichotomy")
            cmd_dichotomy(config, art, seed);
        else if (sub == "cells")
            cmd_cells(config, art);
        else if (sub == "ubiquity")
            cmd_ubiquity(config, art, seed);
        else if (sub == "fiber")
            cmd_fiber(config, art);
        else if (sub == "theta")
            cmd_theta(config, art);
        else {
            std::ostringstream ss;
            ss << "unknown subcommand \"" << sub << "\"; expected one of:";
            for (const char* s : kSubcommands) ss << " " << s;
            throw ConfigError(ss.str());
        }

        // all computation done; write artifacts and the manifest
        std::filesystem::create_directories(out_dir);
        json manifest{{"subcommand", sub},
                      {"config", config},
                      {"config_hash", io::hash_hex(config)},
                      {"seed", seed},
                      {"version", kVersion}};
        json outputs = json::array();
        for (const auto& [name, content] : art.files) {
            io::write_file(out_dir + "/" + name, content);
            outputs.push_back(name);
            res.outputs.push_back(name);
        }
        manifest["outputs"] = outputs;
        io::write_file(out_dir + "/run.json", manifest.dump(2) + "\n");
        res.outputs.push_back("run.json");
        res.message = art.text.str();
        res.exit_code = kOk;
    } catch (const ConfigError& e) {
        res.exit_code = kConfigError;
        res.message = std::string("config error: ") + e.what();
    } catch (const json::exception& e) {
        res.exit_code = kConfigError;
        res.message = std::string("config error: ") + e.what();
    } catch (const WorkLimitError& e) {
        res.exit_code = kWorkLimit;
        res.message = std::string("work limit: ") + e.what();
    } catch (const Error& e) {
        res.exit_code = kFailure;
        res.message = std::string("error: ") + e.what();
    }
    return res;
}

}  // namespace smallforms::runner
