#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rm/arrival_shape.hpp"

namespace rm {

/// Destination side of a route: `a` = intermediate stop, `b` = terminus.
enum class Dest { a = 0, b = 1 };

inline const char* dest_name(Dest d) { return d == Dest::a ? "a" : "b"; }

/** Structural demand parameters.
 *
 * Purchases for destination d arrive as a Poisson process with intensity
 * xi_d * b(t) * eps * p^(-1-eps); the train-level demand scale is
 * xi_d = [sum_c exp(X_c' beta)] * g0(W) * eta_d with eta_d ~ Gamma(lambda_d, 1).
 */
struct DemandPrimitives {
    double epsilon = 0.0;               // price elasticity, > 1
    std::vector<double> beta;           // city-covariate coefficients
    double lambda_a = 0.0, lambda_b = 0.0;  // gamma shapes of the demand shocks
    std::map<std::string, double> g0;   // demand level per covariate cell id

    void validate() const;
    double lambda(Dest d) const { return d == Dest::a ? lambda_a : lambda_b; }
};

struct City {
    std::string name;
    std::vector<double> x;  // covariate row matching DemandPrimitives::beta
};

struct TrainInstance {
    std::int64_t id = 0;
    std::string route;
    std::string cell;             // covariate cell id (W)
    std::vector<City> cities_a, cities_b;
    int capacity = 0;
    // price grid: prices[d][k], ascending in k per destination
    std::vector<double> prices_a, prices_b;
    ArrivalShape shape{64};

    void validate() const;
    const std::vector<double>& prices(Dest d) const { return d == Dest::a ? prices_a : prices_b; }
    const std::vector<City>& cities(Dest d) const { return d == Dest::a ? cities_a : cities_b; }

    /// sum_c exp(X_c' beta) for one destination.
    double covariate_scale(Dest d, const std::vector<double>& beta) const;
};

/// Realized train-level intensities xi_d (after the gamma shock).
struct DemandDraw {
    double xi_a = 0.0, xi_b = 0.0;
    double xi(Dest d) const { return d == Dest::a ? xi_a : xi_b; }
};

struct PurchaseEvent {
    std::int64_t train_id = 0;
    double t = 0.0;
    Dest dest = Dest::a;
    double price = 0.0;
    int fare_class = 0;
};

/// Purchase intensity xi * b(t) * eps * p^(-1-eps) at posted price p.
double intensity(double t, double p, double xi, const ArrivalShape& shape, double epsilon);

/** Piecewise-constant per-destination price path with a fare-class label.
 * Segment i applies on [change_times[i], change_times[i+1]) with
 * change_times[0] = 0 and an implicit final endpoint of 1. */
struct PricePath {
    std::vector<double> change_times;  // ascending, first element 0
    std::vector<double> price_a, price_b;
    std::vector<int> fare_class;

    void validate() const;
    std::size_t segment(double t) const;
};

/** Sample both destinations' purchase processes under a piecewise-constant
 * price path by thinning against a per-cell envelope.  Sales for a
 * destination stop once its allocated capacity is exhausted. */
std::vector<PurchaseEvent> sample_arrivals(const DemandDraw& draw, const ArrivalShape& shape,
                                           double epsilon, const PricePath& path,
                                           int capacity_a, int capacity_b,
                                           std::uint64_t seed, std::int64_t train_id = 0);

/** Consumer mode-choice primitives generating the reduced-form demand.
 * Competing modes m = 2..M have Pareto(delta_m) non-price costs with relative
 * minimal cost a_m >= (p_m/p_1)^alpha (documented restriction; inputs outside
 * the region are not rejected pointwise) and piecewise-constant price paths on
 * the same grid as lambda(t). */
struct ModeChoiceParams {
    double alpha = 0.0;                   // price-disutility coefficient
    std::vector<double> delta;            // Pareto shapes, one per competing mode
    std::vector<double> a;                // relative minimal costs, one per competing mode
    std::vector<std::vector<double>> price_grid;  // per mode: values on a uniform grid of [0,1]
    double kappa_a = 0.0, kappa_b = 0.0;  // destination search-rate levels
    std::vector<double> lambda_grid;      // search-arrival rate on the same grid
};

struct MicrofoundationResult {
    double xi_a = 0.0, xi_b = 0.0;
    ArrivalShape shape{64};
    double epsilon = 0.0;
};

MicrofoundationResult microfoundation_intensity(const ModeChoiceParams& params);

/** Fractional competitor-price decrease offsetting a counterfactual revenue
 * gain: delta = 1 - r_observed / r_counterfactual. */
struct CompensatingVariation {
    double delta = 0.0;
    bool compensation_needed = true;  // false when counterfactual <= observed
};

CompensatingVariation compensating_variation(double r_observed, double r_counterfactual);

} // namespace rm
