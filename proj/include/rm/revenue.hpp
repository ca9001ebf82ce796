#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rm/alpha.hpp"
#include "rm/bounds.hpp"
#include "rm/demand.hpp"

namespace rm {

/// Seat split between destinations, fixed before the booking horizon.
enum class PreallocRule { optimal, match_observed_mean };

/** Split C_total into (C_a, C_b).
 * optimal: enumerate splits maximizing value_a[C_a] + value_b[C_b], where
 * value_d[c] is the revenue coefficient of c seats for destination d.
 * match_observed_mean: C_a = round(avg_a), clamped to [0, C_total]. */
std::pair<int, int> preallocate(int C_total, PreallocRule rule, double avg_a = 0.0,
                                const std::vector<double>& value_a = {},
                                const std::vector<double>& value_b = {});

struct RevenueInterval {
    double lower = 0.0, upper = 0.0;
    Strategy strategy;
    Regime regime = Regime::complete;
};

struct TrainRevenueDetail {
    std::int64_t id = 0;
    double lower = 0.0, upper = 0.0;
    int seats_a = 0, seats_b = 0;
};

/** Average expected revenue per train, evaluated at both ends of each cell's
 * identified interval for the demand level g.  observed_mean_a supplies the
 * per-train mean destination-a sales for the match_observed_mean rule. */
RevenueInterval revenue_interval(const std::vector<TrainInstance>& trains,
                                 const DemandPrimitives& theta,
                                 const std::map<std::string, CellBounds>& bounds,
                                 const Strategy& strategy, Regime regime, PreallocRule rule,
                                 AlphaCache& cache,
                                 const std::map<std::int64_t, double>* observed_mean_a = nullptr,
                                 std::vector<TrainRevenueDetail>* details = nullptr);

/** Best grid fare and seat split when the seller observes the realized demand
 * shocks: the expectation of the per-realization maximum revenue. */
double grid_uniform_revenue_complete(double g, const CellData& cell, const BoundParams& params);

/// Per-train factors of a revenue ratio: each revenue is f * g^(1/eps).
struct RatioFactors {
    double f1 = 0.0, f2 = 0.0;
    std::string cell;
};

/** Sharp bounds on the ratio of averaged revenues sum f1 g^(1/eps) / sum f2
 * g^(1/eps) over per-cell g in [g_lower, g_upper]; each bound is the root of a
 * strictly decreasing equation, solved by bisection. */
std::pair<double, double> ratio_interval(const std::vector<RatioFactors>& factors,
                                         const std::map<std::string, CellBounds>& bounds,
                                         double epsilon);

} // namespace rm
