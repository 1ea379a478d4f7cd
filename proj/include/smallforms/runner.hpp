#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace smallforms::runner {

using nlohmann::json;

// exit codes shared by the CLI
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kWorkLimit = 3;
inline constexpr int kFailure = 4;

struct RunResult {
    int exit_code = kOk;
    std::string message;                // printed to stdout / stderr by the CLI
    std::vector<std::string> outputs;   // files written (relative to out_dir)
};

// Executes one subcommand from a fully merged config document.  All
// computation happens before any file is written, so invalid configs leave
// no partial artifacts.  A manifest (run.json) accompanies every run.
RunResult run(const json& config, const std::string& out_dir);

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSubcommands[] = {"classify", "enumerate", "witness",
                                               "dichotomy", "cells",     "ubiquity",
                                               "dimension", "fiber",     "theta"};

}  // namespace smallforms::runner
