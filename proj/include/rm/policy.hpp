#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "rm/alpha.hpp"
#include "rm/arrival_shape.hpp"
#include "rm/demand.hpp"

namespace rm {

/// Gamma posterior over the demand level: shape lambda, rate mu.
struct GammaBelief {
    double lambda = 1.0;
    double mu = 1.0;
    double mean() const { return lambda / mu; }
};

/** Bayes update after observing the purchase process over an exposure
 * u = p^(-eps) * (shape mass): a sale maps (lambda, mu) to (lambda+1, mu+u),
 * no sale to (lambda, mu+u). */
GammaBelief posterior_update(const GammaBelief& belief, double exposure, bool sale);

/// Markup over the marginal value of a seat: p* = eps/(eps-1) * (V_k - V_{k-1}).
double markup_price(double epsilon, double value_difference);

/// Stopping-time price from the optimizer q*: p = (xi * B_remaining / q*)^(1/eps).
double stopping_price(double xi_times_mass, double q_star, double epsilon);

/// Dynamic-programming state while a policy runs.
struct PolicyState {
    int seats = 0;            // remaining seats k
    int changes_left = 0;     // remaining price changes m (fare-constrained only)
    GammaBelief belief;       // incomplete regime
    double elapsed_mass = 0;  // B(0,t)
    double price = 0.0;
};

/** Posted price for the optimal policy at the given state.
 * xi is the realized intensity (complete regime); the incomplete regime reads
 * the belief instead.  remaining_mass is B(t,1). */
double optimal_price(const Strategy& strategy, Regime regime, const PolicyState& state,
                     AlphaCache& cache, int C, double epsilon, double lambda,
                     double xi, double remaining_mass);

struct McEstimate {
    double mean_revenue = 0.0;
    double se_revenue = 0.0;
    double mean_load = 0.0;
    double se_load = 0.0;
    int n_reps = 0;
};

struct PolicyMcConfig {
    int n_reps = 100000;
    std::uint64_t seed = 1;
    double mass_cutoff = 1e-15;  // stop once B(t,1) falls below this
};

/** Monte Carlo value of the optimal policy for one destination.
 * scale multiplies the gamma shock: xi = scale * z, z ~ Gamma(lambda, 1).
 * The complete regime shows xi to the policy; the incomplete regime starts
 * from the prior Gamma(lambda, 1/scale) and learns from sales. */
McEstimate evaluate_policy_mc_single(const Strategy& strategy, Regime regime, int capacity,
                                     double epsilon, double lambda, double scale,
                                     const ArrivalShape& shape, AlphaCache& cache,
                                     const PolicyMcConfig& cfg);

/** Train-level Monte Carlo: both destinations with preallocated capacities.
 * Returns summed revenue and the pooled load. */
McEstimate evaluate_policy_mc(const Strategy& strategy, Regime regime,
                              int capacity_a, int capacity_b, double epsilon,
                              double lambda_a, double lambda_b,
                              double scale_a, double scale_b,
                              const ArrivalShape& shape, AlphaCache& cache,
                              const PolicyMcConfig& cfg);

/** One replication with full introspection, used by calibration tests:
 * returns the realized z, the final belief, per-sale exposures, and revenue. */
struct PolicyRunTrace {
    double z = 0.0;
    double revenue = 0.0;
    int sold = 0;
    GammaBelief final_belief;
    std::vector<double> sale_times;   // in shape-mass units B(0,t)
    std::vector<double> sale_prices;
};

PolicyRunTrace run_policy_once(const Strategy& strategy, Regime regime, int capacity,
                               double epsilon, double lambda, double scale,
                               const ArrivalShape& shape, AlphaCache& cache,
                               std::uint64_t seed, std::uint64_t rep,
                               double mass_cutoff = 1e-15,
                               std::optional<double> forced_z = std::nullopt);

} // namespace rm
