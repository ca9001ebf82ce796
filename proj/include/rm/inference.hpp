#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rm {

/** Statistic callback: the estimated lower-bound revenue gap recomputed on an
 * arbitrary subset of trains, given by indices into the caller's train list.
 * Must be pure. */
using DeltaStatistic = std::function<double(const std::vector<std::size_t>&)>;

struct SubsampleOptions {
    int subsample_size = 300;       // b, split across route strata
    int n_subsamples = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    // Optional explicit stratum sizes; defaults to shares proportional to
    // route frequencies, summing to subsample_size.
    std::map<std::string, int> per_route;
};

struct TestResult {
    double delta_l_hat = 0.0;     // full-sample statistic
    double statistic = 0.0;       // sqrt(N) * delta_l_hat
    double critical_value = 0.0;  // (1-alpha) subsampling quantile
    double p_value_upper = 1.0;
    bool reject = false;
    int subsample_size = 0;
    int n_subsamples = 0;
};

/** One-sided subsampling test of H0: Delta <= 0.  Draws stratified (per
 * route) subsamples of size b without replacement, recomputes
 * sqrt(b) * (Delta^(s) - Delta_hat), and rejects when sqrt(N) * Delta_hat
 * exceeds the (1-alpha) quantile.  routes[i] labels train i. */
TestResult subsample_test(const std::vector<std::string>& routes, const DeltaStatistic& stat,
                          const SubsampleOptions& opt = {});

} // namespace rm
