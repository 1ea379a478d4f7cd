#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "smallforms/runner.hpp"

using nlohmann::json;

namespace {

// Every flag writes straight into the override document, so flags win over
// the config file on merge.
struct FlagSink {
    json doc = json::object();

    template <typename T>
    void set(const std::string& key, T v) {
        doc[key] = v;
    }
};

void add_psi_flags(CLI::App* sub, FlagSink& sink) {
    sub->add_option_function<double>(
        "--tau", [&sink](double v) { sink.doc["psi"]["tau"] = v; }, "power-law exponent");
    sub->add_option_function<double>(
        "--c", [&sink](double v) { sink.doc["psi"]["c"] = v; }, "power-law coefficient");
    sub->add_option_function<double>(
        "--kappa",
        [&sink](double v) {
            sink.doc["psi"]["kappa"] = v;
            sink.doc["psi"]["kind"] = "logpower";
        },
        "log-correction exponent");
    sub->add_option_function<std::string>(
        "--psi-table",
        [&sink](const std::string& p) {
            sink.doc["psi"]["kind"] = "table";
            sink.doc["psi"]["path"] = p;
        },
        "two-column CSV (h, value) for a tabulated psi");
}

void add_system_flags(CLI::App* sub, FlagSink& sink) {
    sub->add_option_function<int>(
        "--n", [&sink](int v) { sink.doc["system"]["n"] = v; sink.doc["system"]["type"] = "veronese"; sink.doc["n"] = v; },
        "curve dimension n");
    sub->add_option_function<int>(
        "--m", [&sink](int v) { sink.doc["system"]["m"] = v; sink.doc["system"]["type"] = "veronese"; sink.doc["m"] = v; },
        "number of forms m");
    sub->add_option_function<std::vector<std::string>>(
        "--interval",
        [&sink](const std::vector<std::string>& v) {
            if (v.size() != 2) throw CLI::ValidationError("--interval needs lo hi");
            sink.doc["system"]["interval"] = v;
            sink.doc["system"]["type"] = "veronese";
        },
        "domain interval lo hi (rationals)");
    sub->add_option_function<std::string>(
        "--system-file",
        [&sink](const std::string& p) {
            std::ifstream in(p);
            if (!in) throw CLI::ValidationError("cannot open " + p);
            sink.doc["system"] = json::parse(in);
        },
        "JSON system definition file");
}

void add_point_flag(CLI::App* sub, FlagSink& sink) {
    sub->add_option_function<std::vector<std::string>>(
        "--x", [&sink](const std::vector<std::string>& v) { sink.doc["x"] = v; },
        "evaluation point, one rational per coordinate");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"systems of simultaneously small linear forms on curves, at desk scale"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir = "out";
    FlagSink sink;
    app.add_option("--config", config_path, "JSON config file (flags override file values)");
    app.add_option_function<unsigned long long>(
        "--seed", [&sink](unsigned long long v) { sink.doc["seed"] = v; }, "master RNG seed");
    app.add_option_function<int>(
        "--threads", [&sink](int v) { sink.doc["threads"] = v; }, "worker cap (default: cores)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option_function<std::string>(
        "--backend", [&sink](const std::string& v) { sink.doc["backend"] = v; },
        "exhaustive | lattice | hybrid");

    // classify
    auto* classify = app.add_subcommand("classify", "sum classification and partial sums");
    add_psi_flags(classify, sink);
    classify->add_option_function<int>("--n", [&sink](int v) { sink.doc["n"] = v; }, "n");
    classify->add_option_function<int>("--m", [&sink](int v) { sink.doc["m"] = v; }, "m");
    classify->add_option_function<double>(
        "--s", [&sink](double v) { sink.doc["s"] = v; }, "Hausdorff sum exponent");
    classify->add_option_function<std::vector<long long>>(
        "--cutoffs", [&sink](const std::vector<long long>& v) { sink.doc["cutoffs"] = v; },
        "partial-sum cutoffs");

    // dimension
    auto* dimension = app.add_subcommand("dimension", "dimension lower bound");
    dimension->add_option_function<int>("--n", [&sink](int v) { sink.doc["n"] = v; }, "n");
    dimension->add_option_function<int>("--m", [&sink](int v) { sink.doc["m"] = v; }, "m");
    dimension->add_option_function<int>("--d", [&sink](int v) { sink.doc["d"] = v; }, "d");
    dimension->add_option_function<std::string>(
        "--tau", [&sink](const std::string& v) { sink.doc["tau"] = v; }, "tau (rational ok)");

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "all small-form solutions at a point");
    add_system_flags(enumerate, sink);
    add_psi_flags(enumerate, sink);
    add_point_flag(enumerate, sink);
    enumerate->add_option_function<long long>(
        "--H-max", [&sink](long long v) { sink.doc["H_max"] = v; }, "height cap");

    // witness
    auto* witness = app.add_subcommand("witness", "pigeonhole witness at one dyadic level");
    add_system_flags(witness, sink);
    add_point_flag(witness, sink);
    witness->add_option_function<int>("--t", [&sink](int v) { sink.doc["t"] = v; }, "level");
    witness->add_option_function<double>(
        "--delta0", [&sink](double v) { sink.doc["delta0"] = v; }, "height shrink factor");

    // dichotomy
    auto* dichotomy = app.add_subcommand("dichotomy", "Monte Carlo dichotomy experiment");
    add_system_flags(dichotomy, sink);
    add_psi_flags(dichotomy, sink);
    dichotomy->add_option_function<int>(
        "--t-max", [&sink](int v) { sink.doc["t_max"] = v; }, "largest dyadic block");
    dichotomy->add_option_function<long long>(
        "--samples", [&sink](long long v) { sink.doc["region"]["samples"] = v; }, "sample points");
    dichotomy->add_option_function<std::vector<std::string>>(
        "--box",
        [&sink](const std::vector<std::string>& v) {
            if (v.size() % 2) throw CLI::ValidationError("--box needs lo hi pairs");
            json box = json::array();
            for (size_t i = 0; i < v.size(); i += 2) box.push_back({v[i], v[i + 1]});
            sink.doc["region"]["box"] = box;
        },
        "sample box, lo hi per axis");
    dichotomy->add_flag_function(
        "--svg", [&sink](int64_t) { sink.doc["svg"] = true; }, "emit a line chart");

    // cells
    auto* cells = app.add_subcommand("cells", "solution cell decomposition of one form");
    add_system_flags(cells, sink);
    add_psi_flags(cells, sink);
    cells->add_option_function<std::vector<long long>>(
        "--a", [&sink](const std::vector<long long>& v) { sink.doc["a"] = v; }, "coefficients");
    cells->add_option_function<int>("--j", [&sink](int v) { sink.doc["j"] = v; }, "coordinate");

    // ubiquity
    auto* ubiq = app.add_subcommand("ubiquity", "resonant points and covering fractions");
    add_system_flags(ubiq, sink);
    ubiq->add_option_function<std::vector<std::string>>(
        "--omega",
        [&sink](const std::vector<std::string>& v) {
            if (v.size() % 2) throw CLI::ValidationError("--omega needs lo hi pairs");
            json box = json::array();
            for (size_t i = 0; i < v.size(); i += 2) box.push_back({v[i], v[i + 1]});
            sink.doc["omega"] = box;
        },
        "domain box, lo hi per axis");
    ubiq->add_option_function<std::vector<int>>(
        "--t-levels", [&sink](const std::vector<int>& v) { sink.doc["t_levels"] = v; }, "levels");
    ubiq->add_option_function<double>(
        "--eta", [&sink](double v) { sink.doc["eta"] = v; }, "radius parameter");
    ubiq->add_flag_function(
        "--calibrate", [&sink](int64_t) { sink.doc["calibrate"] = true; },
        "sweep eta dyadically for the covering target");
    ubiq->add_option_function<long long>(
        "--samples", [&sink](long long v) { sink.doc["samples"] = v; }, "Monte Carlo samples");

    // fiber
    auto* fiber = app.add_subcommand("fiber", "one-variable restriction of a multivariate map");
    fiber->add_option_function<std::string>(
        "--coords-file",
        [&sink](const std::string& p) {
            std::ifstream in(p);
            if (!in) throw CLI::ValidationError("cannot open " + p);
            sink.doc["coords"] = json::parse(in);
        },
        "JSON multivariate coordinates");
    fiber->add_option_function<std::vector<std::string>>(
        "--u", [&sink](const std::vector<std::string>& v) { sink.doc["u"] = v; }, "direction");
    fiber->add_option_function<int>("--D", [&sink](int v) { sink.doc["D"] = v; }, "exponent base");
    fiber->add_option_function<int>(
        "--D-cap", [&sink](int v) { sink.doc["D_cap"] = v; }, "largest D to try");

    // theta
    auto* theta = app.add_subcommand("theta", "theta-tuple diagnostics");
    theta->add_option_function<std::vector<std::string>>(
        "--group",
        [&sink](const std::vector<std::string>& gs) {
            json groups = json::array();
            for (const std::string& g : gs) {
                json one = json::array();
                std::string cur;
                for (char ch : g + ",") {
                    if (ch == ',') {
                        if (!cur.empty()) one.push_back(std::stod(cur));
                        cur.clear();
                    } else
                        cur += ch;
                }
                groups.push_back(one);
            }
            sink.doc["groups"] = groups;
        },
        "comma-separated theta group, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        std::cerr << "subcommands: classify enumerate witness dichotomy cells ubiquity "
                     "dimension fiber theta\n";
        return smallforms::runner::kConfigError;
    }

    json config = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config error: cannot open " << config_path << "\n";
            return smallforms::runner::kConfigError;
        }
        try {
            config = json::parse(in);
        } catch (const json::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return smallforms::runner::kConfigError;
        }
    }
    config.update(sink.doc, true);  // flags win, recursively

    std::string sub;
    for (auto* s : app.get_subcommands()) sub = s->get_name();
    if (!sub.empty())
        config["subcommand"] = sub;
    else if (!config.contains("subcommand")) {
        std::cerr << "config error: no subcommand given\n";
        std::cerr << app.help() << "\n";
        return smallforms::runner::kConfigError;
    }

    auto res = smallforms::runner::run(config, out_dir);
    if (res.exit_code == 0)
        std::cout << res.message;
    else
        std::cerr << res.message << "\n";
    return res.exit_code;
}
