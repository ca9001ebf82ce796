#pragma once
#include <string>
#include <vector>

#include "rm/demand.hpp"

namespace rm {

/// Identified interval for the demand level g0 of one covariate cell.
struct CellBounds {
    std::string cell;
    double g_lower = 0.0, g_upper = 0.0;
    Dest binding_dest = Dest::a;  // (d,k) achieving the lower-bound max
    int binding_class = 0;
    int upper_fare_class = 0;     // grid fare achieving the upper-bound revenue
    bool feasible = true;         // false when bounds cross or an inversion fails
    bool lower_inversion_hit_cap = false;  // target mean at or above capacity
};

/** Inputs for one cell: the price grid and covariate scales are shared by all
 * trains in the cell (X is a deterministic function of W). */
struct CellData {
    std::string cell;
    int capacity = 0;
    std::vector<double> prices_a, prices_b;     // K grid prices per destination
    double scale_a = 0.0, scale_b = 0.0;        // sum_c exp(X_c' beta)
    // cell averages of cumulative sales sum_{j>=k} n_dj, indexed [d][k]
    std::vector<double> cum_sales_a, cum_sales_b;
    double mean_revenue = 0.0;                  // cell average of observed revenue
};

struct BoundParams {
    double epsilon = 0.0;
    double lambda_a = 0.0, lambda_b = 0.0;
    double bracket_lo = 1e-8, bracket_hi = 1e8;
    double tol = 1e-8;
};

/** Lower bound: max over (d,k) of the g solving
 * E[C ^ D(scale_d * p_dk^(-eps) * g * z)] = cell mean of sum_{j>=k} n_dj,
 * the expectation gamma-mixed over z ~ Gamma(lambda_d, 1). */
struct LowerBoundResult {
    double g = 0.0;
    Dest binding_dest = Dest::a;
    int binding_class = 0;
    bool hit_capacity = false;
};
LowerBoundResult lower_bound_g(const CellData& cell, const BoundParams& params);

/** Best expected revenue over the fare grid under uniform pricing with an
 * exactly enumerated seat split: max_k max_{C_a+C_b=C} sum_d p_dk * E[D ^ C_d]. */
struct GridUniformRevenue {
    double revenue = 0.0;
    int fare_class = 0;      // argmax k (0-based)
    int seats_a = 0, seats_b = 0;
};
GridUniformRevenue grid_uniform_revenue(double g, const CellData& cell, const BoundParams& params);

/// Upper bound: g solving grid_uniform_revenue(g) = observed mean revenue.
struct UpperBoundResult {
    double g = 0.0;
    int fare_class = 0;
    bool below_floor = false;  // revenue under the g->0 limit
};
UpperBoundResult upper_bound_g(const CellData& cell, const BoundParams& params);

/// Both bounds with the consistency flag.
CellBounds cell_bounds(const CellData& cell, const BoundParams& params);

} // namespace rm
