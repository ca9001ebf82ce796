#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "rm/pchip.hpp"

namespace rm {

enum class Regime { complete, incomplete };

inline const char* regime_name(Regime r) { return r == Regime::complete ? "complete" : "incomplete"; }

/** Pricing strategy under evaluation.
 *  - uniform: one price for the whole horizon (set freely or on the fare grid);
 *  - full_dynamic: price adjusts continuously;
 *  - stopping_time: price adjusts only when a sale occurs;
 *  - stopping_time_m: stopping-time pricing with at most M price changes,
 *    optionally restricted to non-decreasing prices;
 *  - intermediate_k: stopping-time pricing on the first pct% of seats, then a
 *    single uniform price for the remainder.
 */
struct Strategy {
    enum class Kind { uniform, grid_uniform, full_dynamic, stopping_time, stopping_time_m, intermediate_k };
    Kind kind = Kind::uniform;
    int fares = 1;          // M, stopping_time_m only
    bool increasing = false;
    double pct = 100.0;     // intermediate_k only

    static Strategy uniform() { return {Kind::uniform, 1, false, 0.0}; }
    static Strategy grid_uniform() { return {Kind::grid_uniform, 1, false, 0.0}; }
    static Strategy full_dynamic() { return {Kind::full_dynamic, 1, false, 100.0}; }
    static Strategy stopping_time() { return {Kind::stopping_time, 1, false, 100.0}; }
    static Strategy stopping_time_m(int M, bool increasing_fares) {
        return {Kind::stopping_time_m, M, increasing_fares, 100.0};
    }
    static Strategy intermediate_k(double pct) { return {Kind::intermediate_k, 1, false, pct}; }

    void validate() const;
    std::string label() const;
    bool operator<(const Strategy& o) const {
        return std::tie(kind, fares, increasing, pct) < std::tie(o.kind, o.fares, o.increasing, o.pct);
    }
};

/// E[eta^(1/eps)] for eta ~ Gamma(lambda, 1); applied to complete-information coefficients.
double gamma_power_mean(double lambda, double epsilon);

/// Uniform-pricing coefficient and optimizer (eta factor not applied here).
struct UniformPlan {
    double alpha = 0.0;   // max_q q^(-1/eps) * expected capped demand
    double q_star = 0.0;
    double load = 0.0;    // expected seats sold at q_star, as a fraction of C
};

/// Per-seat coefficients along the optimal path, k = remaining seats = 0..C.
/// Incomplete regime: entry k is evaluated at posterior shape lambda + (C - k).
struct SeatPlan {
    std::vector<double> alpha_k;
    std::vector<double> q_star_k;  // stopping-time family only (q at each seat count)
    double uniform_q = 0.0;        // intermediate_k: uniform q* at the switchover
    int switch_seats = 0;          // intermediate_k: seats priced uniformly
};

/** Value tables for fare-count-constrained stopping-time pricing.
 * value[k][m](q) is the value coefficient with k seats, m price changes left,
 * current scaled demand q.  switch_j[k][m](q') is the value of switching to
 * q'; switch_best is its unconstrained maximum. */
struct FarePlan {
    std::vector<double> q_grid;
    std::vector<std::vector<Pchip>> value;     // [k][m], m = 0..min(M,k)
    std::vector<std::vector<Pchip>> switch_j;  // [k][m], defined for m >= 1
    std::vector<std::vector<std::pair<double, double>>> switch_best;  // (argmax, value)
    double epsilon = 0.0;
    bool increasing = false;
    double alpha = 0.0;   // max_q value[C][M](q)
    double q_star = 0.0;

    /// Table lookup with a power-law extension below the grid.
    double eval(const Pchip& table, double q) const;
    double value_at(int k, int m, double q) const;
};

struct AlphaOptions {
    std::size_t q_grid_size = 200;
    double q_min = 1e-3, q_max = 50.0;
    double implicit_tol = 1e-10;
};

/** Memo cache for the pricing-coefficient recursions.  Entries are
 * deterministic functions of the key, so concurrent duplicate fills are
 * harmless. */
class AlphaCache {
  public:
    explicit AlphaCache(AlphaOptions opt = {}) : opt_(opt) {}

    /// Scalar coefficient alpha_r (complete regime includes E[eta^(1/eps)]).
    double alpha(const Strategy& s, Regime r, int C, double epsilon, double lambda);

    /// alpha for every capacity 0..C (uniform, stopping_time, full_dynamic only).
    std::vector<double> alpha_all_capacities(const Strategy& s, Regime r, int C,
                                             double epsilon, double lambda);

    const UniformPlan& uniform_plan(Regime r, int C, double epsilon, double lambda);
    const SeatPlan& seat_plan(const Strategy& s, Regime r, int C, double epsilon, double lambda);
    const FarePlan& fare_plan(const Strategy& s, Regime r, int C, double epsilon, double lambda);

    /// Expected load (fraction of C sold). Supported: uniform (both regimes),
    /// stopping_time (both), full_dynamic (complete).
    double expected_load(const Strategy& s, Regime r, int C, double epsilon, double lambda);

    const AlphaOptions& options() const { return opt_; }

  private:
    using Key = std::tuple<Strategy, Regime, int, double, double>;
    AlphaOptions opt_;
    std::mutex mu_;
    std::map<Key, UniformPlan> uniform_;
    std::map<Key, SeatPlan> seat_;
    std::map<Key, std::shared_ptr<FarePlan>> fare_;
    std::map<Key, std::vector<double>> all_caps_;
};

/** Optional comparison mode: uniform pricing without preallocating seats
 * between destinations (one price, one shared capacity). */
double uniform_revenue_no_preallocation(Regime r, double xi_a_scale, double xi_b_scale,
                                        double lambda_a, double lambda_b, int C,
                                        double epsilon, const AlphaOptions& opt = {});

} // namespace rm
