#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmfg/continuation.hpp"
#include "nmfg/micro.hpp"
#include "nmfg/newton.hpp"
#include "nmfg/scenario.hpp"

namespace nmfg {

struct MicroConfig {
    bool enabled = false;
    std::vector<int> n_ladder = {20, 40, 60, 80, 100};
    std::uint64_t seed = 1;
    double step = 0.1;
    double tol = 1e-4;
    int max_iters = 500;
    double kde_bandwidth_factor = 0.05;
};

struct RunConfig {
    std::string preset;  ///< name this config was derived from, if any
    ScenarioName scenario = ScenarioName::TC;
    CostKind cost = CostKind::GLWR;
    ContinuationSchedule schedule;
    NewtonSettings newton;
    MicroConfig micro;
    std::string output_dir = "out";
    int workers = 1;
};

/// Built-in configurations mirroring the shipped experiment set.
std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);

struct ConfigValidation {
    std::optional<RunConfig> config;   ///< set when errors is empty
    std::vector<std::string> errors;   ///< every violation found
};

/// Parses and validates a JSON config file. Collects all violations
/// instead of stopping at the first; a syntax error reports line/column.
ConfigValidation validate_config(const std::string& path);

/// validate_config that throws InvalidParameterError on any violation.
RunConfig load_config(const std::string& path);

/// Worker-count override honored by the CLI.
extern const char* const kWorkersEnvVar;  // "NMFG_WORKERS"

}  // namespace nmfg
