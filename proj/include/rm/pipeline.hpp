#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rm/alpha.hpp"
#include "rm/synthetic.hpp"

namespace rm {

/// Raised for unusable configuration; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Pipeline configuration.  Loaded from a line-oriented `key = value` file;
 * unknown keys are rejected.  Every tolerance and grid size in the compute
 * modules is surfaced here with the module default. */
struct RunConfig {
    std::string command;
    std::string out_dir = "out";

    SyntheticConfig synth;

    // estimation
    int bootstrap_resamples = 500;
    bool multi_city = false;
    int split_class = -1;

    // counterfactual
    AlphaOptions alpha_opt;
    std::string prealloc_rule = "optimal";  // or match_observed_mean
    std::vector<double> ik_percents = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

    // inference
    int subsample_size = 300;
    int n_subsamples = 200;   // pipeline default kept small for runtime
    double test_alpha = 0.05;
    std::vector<std::string> infer_scenarios = {"s.1", "f.1"};

    std::uint64_t seed = 1;
};

/// Parse a config file; empty path gives the defaults.
RunConfig load_config(const std::string& path);

/// Known scenario ids in report order (u.1..u.4, s.1..s.10, f.1, f.2).
std::vector<std::string> scenario_ids();

/// Strategy and regime of a scenario id; throws ConfigError on unknown ids.
std::pair<Strategy, Regime> scenario_spec(const std::string& id);

/** Run one pipeline stage; returns the process exit code (0 success,
 * 2 config error, 3 model-violation flags raised). */
int run_pipeline(const RunConfig& cfg);

} // namespace rm
