#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rm/demand.hpp"
#include "rm/panel.hpp"

namespace rm {

/** Synthetic-panel generator.  Demand follows the structural model: for each
 * train, destination-d purchases arrive (in shape-mass time) as a Poisson
 * process with level xi_d = [sum_c exp(X_c' beta)] * g0(cell) * eta_d,
 * eta_d ~ Gamma(lambda_d, 1), thinned by the posted fare p^(-eps).  Fares
 * climb a K-step ladder closed by cumulative total sales thresholds, so the
 * closing rule is a stopping time of the total sales process. */
struct SyntheticConfig {
    int n_trains = 2909;
    int n_routes = 6;
    int fare_classes = 12;              // K
    std::vector<int> capacities = {324, 350, 238};  // cycled over routes
    double epsilon = 4.04;
    std::vector<double> beta = {2.23, 0.20, -2.07, 0.34};
    double lambda_a = 3.63, lambda_b = 2.62;
    double target_load = 0.8;           // calibrates g0 per cell
    double ladder_step = 0.05;          // per-class fare increase
    double relative_span = 0.18;        // p_b/p_a drift from class 0 to K-1
    double peak_share = 0.4;
    double peak_boost = 1.3;            // g0 multiplier for peak cells
    std::uint64_t seed = 20240901;

    void validate() const;
};

struct SyntheticTruth {
    double epsilon = 0.0;
    std::vector<double> beta;
    double lambda_a = 0.0, lambda_b = 0.0;
    std::map<std::string, double> g0;   // per covariate cell
    struct TrainTruth {
        std::int64_t id = 0;
        std::string route, cell;
        int capacity = 0;
        double xi_a = 0.0, xi_b = 0.0;
        double eta_a = 0.0, eta_b = 0.0;
    };
    std::vector<TrainTruth> trains;
};

struct SyntheticPanel {
    SalesPanel panel;
    SyntheticTruth truth;
};

SyntheticPanel generate_synthetic(const SyntheticConfig& cfg);

/// JSON round trip for the ground-truth sidecar.
void write_truth_json(const SyntheticTruth& truth, const std::string& path);
SyntheticTruth read_truth_json(const std::string& path);

} // namespace rm
