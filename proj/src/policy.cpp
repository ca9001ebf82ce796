#include "rm/policy.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "rm/numeric.hpp"
#include "rm/rng.hpp"

namespace rm {

GammaBelief posterior_update(const GammaBelief& belief, double exposure, bool sale) {
    if (!(belief.lambda > 0.0) || !(belief.mu > 0.0))
        throw std::domain_error("posterior_update: belief parameters must be positive");
    if (!(exposure >= 0.0)) throw std::domain_error("posterior_update: negative exposure");
    return {belief.lambda + (sale ? 1.0 : 0.0), belief.mu + exposure};
}

double markup_price(double epsilon, double value_difference) {
    if (!(epsilon > 1.0)) throw std::domain_error("markup_price: epsilon must exceed 1");
    if (!(value_difference > 0.0))
        throw std::domain_error("markup_price: value difference must be positive");
    return epsilon / (epsilon - 1.0) * value_difference;
}

double stopping_price(double xi_times_mass, double q_star, double epsilon) {
    if (!(xi_times_mass > 0.0) || !(q_star > 0.0))
        throw std::domain_error("stopping_price: arguments must be positive");
    if (!(epsilon > 1.0)) throw std::domain_error("stopping_price: epsilon must exceed 1");
    return std::pow(xi_times_mass / q_star, 1.0 / epsilon);
}

namespace {

// Price from the scaled demand level q: the complete regime knows xi, the
// incomplete regime prices off the posterior rate mu.
double price_from_q(Regime r, double q, double epsilon, double xi, double mu, double mass) {
    double level = r == Regime::complete ? xi * mass : mass / mu;
    return stopping_price(level, q, epsilon);
}

// Full-dynamic markup coefficient kappa_k at the current state; plans store
// raw coefficients with the incomplete entries already on the posterior
// diagonal lambda + C - k.
double dynamic_kappa(Regime r, const SeatPlan& plan, int k, double epsilon, double lambda_post) {
    double a_k = plan.alpha_k[std::size_t(k)];
    double a_prev = plan.alpha_k[std::size_t(k - 1)];
    double bracket = r == Regime::complete
                         ? a_k - a_prev
                         : (1.0 + 1.0 / (lambda_post * epsilon)) * a_k - a_prev;
    return epsilon / (epsilon - 1.0) * std::max(bracket, 1e-300);
}

} // namespace

double optimal_price(const Strategy& strategy, Regime regime, const PolicyState& state,
                     AlphaCache& cache, int C, double epsilon, double lambda,
                     double xi, double remaining_mass) {
    strategy.validate();
    if (state.seats <= 0) throw std::domain_error("optimal_price: no seats remaining");
    if (!(remaining_mass > 0.0))
        throw std::domain_error("optimal_price: remaining mass must be positive");
    double mu = state.belief.mu;
    switch (strategy.kind) {
        case Strategy::Kind::uniform: {
            const auto& plan = cache.uniform_plan(regime, C, epsilon, lambda);
            return price_from_q(regime, plan.q_star, epsilon, xi, mu, remaining_mass);
        }
        case Strategy::Kind::stopping_time: {
            const auto& plan = cache.seat_plan(strategy, regime, C, epsilon, lambda);
            return price_from_q(regime, plan.q_star_k[std::size_t(state.seats)], epsilon, xi, mu,
                                remaining_mass);
        }
        case Strategy::Kind::intermediate_k: {
            const auto& plan = cache.seat_plan(strategy, regime, C, epsilon, lambda);
            double q = state.seats > plan.switch_seats ? plan.q_star_k[std::size_t(state.seats)]
                                                       : plan.uniform_q;
            return price_from_q(regime, q, epsilon, xi, mu, remaining_mass);
        }
        case Strategy::Kind::full_dynamic: {
            const auto& plan = cache.seat_plan(strategy, regime, C, epsilon, lambda);
            double kap = dynamic_kappa(regime, plan, state.seats, epsilon, state.belief.lambda);
            double level = regime == Regime::complete ? xi * remaining_mass : remaining_mass / mu;
            return kap * std::pow(level, 1.0 / epsilon);
        }
        case Strategy::Kind::stopping_time_m: {
            const auto& plan = cache.fare_plan(strategy, regime, C, epsilon, lambda);
            // Only the fresh state is path-independent; mid-flight prices are
            // produced by the simulator, which owns the fare budget.
            if (state.seats != C)
                throw std::invalid_argument(
                    "optimal_price: fare-constrained prices are path dependent after a sale");
            return price_from_q(regime, plan.q_star, epsilon, xi, mu, remaining_mass);
        }
        case Strategy::Kind::grid_uniform:
            throw std::invalid_argument("optimal_price: grid_uniform prices come from the fare grid");
    }
    throw std::logic_error("optimal_price: unreachable");
}

namespace {

// Next purchase time in real time for a constant posted price.  The rate is
// rate_factor * b(t); within a piecewise-constant cell the process is plain
// Poisson, so cell-by-cell exponential gaps are exact.
template <class Rng>
bool next_event_real_time(double rate_factor, const ArrivalShape& shape, double t0, Rng& rng,
                          double& t_event) {
    if (!(rate_factor > 0.0)) return false;
    std::exponential_distribution<double> exp1(1.0);
    const std::size_t n = shape.cells();
    double t = t0;
    std::size_t cell = std::min(n - 1, std::size_t(t * double(n)));
    while (t < 1.0) {
        double cell_end = double(cell + 1) / double(n);
        double rate = rate_factor * shape.density((double(cell) + 0.5) / double(n));
        if (rate > 0.0) {
            double dt = exp1(rng) / rate;
            if (t + dt < cell_end) {
                t_event = t + dt;
                return true;
            }
        }
        t = cell_end;
        ++cell;
        if (cell >= n) break;
    }
    return false;
}

struct FareDecision {
    bool do_switch = false;
    double q_new = 0.0;
};

// Best switch target with an optional cap q' <= q_cap (non-decreasing fares).
std::pair<double, double> best_switch_target(const FarePlan& plan, int k, int m, double q_cap) {
    const auto& tab = plan.switch_j[std::size_t(k)][std::size_t(m)];
    const auto& grid = plan.q_grid;
    if (!(q_cap < grid.back())) {
        const auto& b = plan.switch_best[std::size_t(k)][std::size_t(m)];
        if (b.first <= q_cap) return b;
    }
    double cap = std::min(q_cap, grid.back());
    std::size_t ibest = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    std::size_t n_in = 0;
    for (std::size_t i = 0; i < grid.size() && grid[i] <= cap; ++i) {
        ++n_in;
        double v = plan.eval(tab, grid[i]);
        if (v > best_v) {
            best_v = v;
            ibest = i;
        }
    }
    double best_q = n_in > 0 ? grid[ibest] : cap;
    double v_cap = plan.eval(tab, cap);
    if (v_cap > best_v) {
        best_v = v_cap;
        best_q = cap;
    }
    double lo = (n_in > 0 && ibest > 0) ? grid[ibest - 1] : grid.front() * 0.5;
    double hi = (n_in > 0 && ibest + 1 < grid.size()) ? std::min(grid[ibest + 1], cap) : cap;
    if (hi > lo) {
        auto refined = golden_max([&](double q) { return plan.eval(tab, q); }, lo, hi);
        if (refined.value > best_v) return {refined.arg, refined.value};
    }
    return {best_q, best_v};
}

FareDecision fare_decision(const FarePlan& plan, int k, int m, double q_keep, bool increasing) {
    FareDecision out;
    if (m < 1 || k < 1) return out;
    int me = std::min(m, k);
    auto cand = best_switch_target(plan, k, me,
                                   increasing ? q_keep
                                              : std::numeric_limits<double>::infinity());
    double stay = plan.value_at(k, me, q_keep);
    // The value table is the max of the keep and switch branches, so the
    // switch branch is optimal exactly when it attains the table value.
    if (cand.second >= stay * (1.0 - 1e-9)) {
        out.do_switch = true;
        out.q_new = cand.first;
    }
    return out;
}

} // namespace

PolicyRunTrace run_policy_once(const Strategy& strategy, Regime regime, int capacity,
                               double epsilon, double lambda, double scale,
                               const ArrivalShape& shape, AlphaCache& cache,
                               std::uint64_t seed, std::uint64_t rep, double mass_cutoff,
                               std::optional<double> forced_z) {
    strategy.validate();
    if (capacity < 0) throw std::domain_error("run_policy_once: negative capacity");
    if (!(epsilon > 1.0) || !(lambda > 0.0) || !(scale > 0.0))
        throw std::domain_error("run_policy_once: need epsilon > 1, lambda > 0, scale > 0");
    if (strategy.kind == Strategy::Kind::grid_uniform)
        throw std::invalid_argument("run_policy_once: grid_uniform is evaluated analytically");

    auto rng = make_engine(seed, rep, 0x706f6cULL, 0);
    std::exponential_distribution<double> exp1(1.0);

    PolicyRunTrace tr;
    if (forced_z) {
        if (!(*forced_z > 0.0)) throw std::domain_error("run_policy_once: forced z must be positive");
        tr.z = *forced_z;
    } else {
        std::gamma_distribution<double> gd(lambda, 1.0);
        tr.z = gd(rng);
        while (!(tr.z > 0.0)) tr.z = gd(rng);
    }
    const double xi = scale * tr.z;
    GammaBelief belief{lambda, 1.0 / scale};
    tr.final_belief = belief;
    if (capacity == 0) return tr;

    const int C = capacity;
    int k = C;
    double s0 = 0.0;  // elapsed shape mass B(0,t)

    auto record_sale = [&](double s_at, double price) {
        tr.sale_times.push_back(s_at);
        tr.sale_prices.push_back(price);
        tr.revenue += price;
        ++tr.sold;
        --k;
    };

    if (strategy.kind == Strategy::Kind::full_dynamic) {
        // Event times come from exact inversion of the cumulative hazard,
        // which is available in closed form between sales.
        const auto& plan = cache.seat_plan(strategy, regime, C, epsilon, lambda);
        while (k > 0) {
            double z_rem = 1.0 - s0;
            if (z_rem <= mass_cutoff) {
                // The remaining hazard diverges: the seats sell almost surely
                // at vanishing prices.  Count them sold with zero revenue.
                tr.sold += k;
                k = 0;
                break;
            }
            double kap = dynamic_kappa(regime, plan, k, epsilon, belief.lambda);
            double gamma = std::pow(kap, -epsilon);
            double E = exp1(rng);
            double s1, price, exposure;
            if (regime == Regime::complete) {
                // Hazard xi^{... } cancels: Lambda(s0,s) = gamma/ ... with
                // p(s) = kap (xi (1-s))^{1/eps} the purchase rate in mass time
                // is p^{-eps} xi = kap^{-eps} / (1-s).
                s1 = 1.0 - z_rem * std::exp(-E / gamma);
                price = kap * std::pow(xi * (1.0 - s1), 1.0 / epsilon);
                exposure = 0.0;  // the complete regime carries no belief
            } else {
                // No-sale posterior rate follows mu(s) = mu0 ((1-s0)/(1-s))^gamma,
                // giving Lambda(s0,s) = xi mu0 [((1-s0)/(1-s))^gamma - 1].
                double growth = 1.0 + E / (xi * belief.mu);
                s1 = 1.0 - z_rem * std::pow(growth, -1.0 / gamma);
                double mu1 = belief.mu * growth;
                exposure = mu1 - belief.mu;
                price = kap * std::pow((1.0 - s1) / mu1, 1.0 / epsilon);
            }
            if (1.0 - s1 <= mass_cutoff) {
                tr.sold += k;
                k = 0;
                break;
            }
            belief = posterior_update(belief, exposure, true);
            record_sale(s1, price);
            s0 = s1;
        }
        tr.final_belief = belief;
        return tr;
    }

    // Constant-price segments: uniform, stopping-time, fare-constrained and
    // intermediate strategies all hold the price between decision points.
    const SeatPlan* splan = nullptr;
    const FarePlan* fplan = nullptr;
    const UniformPlan* uplan = nullptr;
    int m = 0;
    if (strategy.kind == Strategy::Kind::uniform) {
        uplan = &cache.uniform_plan(regime, C, epsilon, lambda);
    } else if (strategy.kind == Strategy::Kind::stopping_time ||
               strategy.kind == Strategy::Kind::intermediate_k) {
        splan = &cache.seat_plan(strategy, regime, C, epsilon, lambda);
    } else {
        fplan = &cache.fare_plan(strategy, regime, C, epsilon, lambda);
        m = std::min(strategy.fares, C);
    }

    auto q_for_state = [&]() -> double {
        if (uplan) return uplan->q_star;
        if (splan) {
            if (strategy.kind == Strategy::Kind::intermediate_k && k <= splan->switch_seats)
                return splan->uniform_q;
            return splan->q_star_k[std::size_t(k)];
        }
        return fplan->q_star;
    };

    double price = price_from_q(regime, q_for_state(), epsilon, xi, belief.mu, 1.0 - s0);
    bool price_locked = false;  // uniform and post-switch intermediate phases
    if (strategy.kind == Strategy::Kind::uniform) price_locked = true;
    if (strategy.kind == Strategy::Kind::intermediate_k && splan->switch_seats >= C)
        price_locked = true;

    double t0 = 0.0;
    while (k > 0) {
        if (!(price > 0.0) || !std::isfinite(price))
            throw std::runtime_error("run_policy_once: policy produced a non-positive price");
        double t1;
        double pe = std::pow(price, -epsilon);
        if (!next_event_real_time(xi * pe, shape, t0, rng, t1)) {
            belief = posterior_update(belief, pe * (1.0 - s0), false);
            break;
        }
        double s1 = shape.cdf(t1);
        belief = posterior_update(belief, pe * (s1 - s0), true);
        record_sale(s1, price);
        s0 = s1;
        t0 = t1;
        if (k == 0) break;
        if (price_locked) continue;

        if (splan) {
            if (strategy.kind == Strategy::Kind::intermediate_k && k <= splan->switch_seats) {
                price = price_from_q(regime, splan->uniform_q, epsilon, xi, belief.mu, 1.0 - s0);
                price_locked = true;
            } else {
                price = price_from_q(regime, q_for_state(), epsilon, xi, belief.mu, 1.0 - s0);
            }
            continue;
        }

        // Fare-constrained stopping time: decide whether to spend a change.
        double z_rem = 1.0 - s0;
        double q_keep = regime == Regime::complete ? xi * z_rem * pe : z_rem * pe / belief.mu;
        auto dec = fare_decision(*fplan, k, m, q_keep, strategy.increasing);
        if (dec.do_switch && m >= 1) {
            --m;
            double p_new = price_from_q(regime, dec.q_new, epsilon, xi, belief.mu, z_rem);
            if (strategy.increasing) p_new = std::max(p_new, price);
            price = p_new;
        }
        if (m == 0) price_locked = true;
    }
    tr.final_belief = belief;
    return tr;
}

McEstimate evaluate_policy_mc_single(const Strategy& strategy, Regime regime, int capacity,
                                     double epsilon, double lambda, double scale,
                                     const ArrivalShape& shape, AlphaCache& cache,
                                     const PolicyMcConfig& cfg) {
    if (cfg.n_reps <= 1) throw std::domain_error("evaluate_policy_mc: need at least 2 replications");
    McEstimate out;
    out.n_reps = cfg.n_reps;
    double sr = 0, sr2 = 0, sl = 0, sl2 = 0;
    for (int i = 0; i < cfg.n_reps; ++i) {
        auto tr = run_policy_once(strategy, regime, capacity, epsilon, lambda, scale, shape, cache,
                                  cfg.seed, std::uint64_t(i), cfg.mass_cutoff);
        double load = capacity > 0 ? double(tr.sold) / double(capacity) : 0.0;
        sr += tr.revenue;
        sr2 += tr.revenue * tr.revenue;
        sl += load;
        sl2 += load * load;
    }
    double n = double(cfg.n_reps);
    out.mean_revenue = sr / n;
    out.mean_load = sl / n;
    out.se_revenue = std::sqrt(std::max(0.0, sr2 / n - out.mean_revenue * out.mean_revenue) / (n - 1));
    out.se_load = std::sqrt(std::max(0.0, sl2 / n - out.mean_load * out.mean_load) / (n - 1));
    return out;
}

McEstimate evaluate_policy_mc(const Strategy& strategy, Regime regime,
                              int capacity_a, int capacity_b, double epsilon,
                              double lambda_a, double lambda_b,
                              double scale_a, double scale_b,
                              const ArrivalShape& shape, AlphaCache& cache,
                              const PolicyMcConfig& cfg) {
    if (cfg.n_reps <= 1) throw std::domain_error("evaluate_policy_mc: need at least 2 replications");
    McEstimate out;
    out.n_reps = cfg.n_reps;
    double sr = 0, sr2 = 0, sl = 0, sl2 = 0;
    const int C = capacity_a + capacity_b;
    for (int i = 0; i < cfg.n_reps; ++i) {
        auto ta = run_policy_once(strategy, regime, capacity_a, epsilon, lambda_a, scale_a, shape,
                                  cache, derive_seed(cfg.seed, 0xa, 0, 0), std::uint64_t(i),
                                  cfg.mass_cutoff);
        auto tb = run_policy_once(strategy, regime, capacity_b, epsilon, lambda_b, scale_b, shape,
                                  cache, derive_seed(cfg.seed, 0xb, 0, 0), std::uint64_t(i),
                                  cfg.mass_cutoff);
        double rev = ta.revenue + tb.revenue;
        double load = C > 0 ? double(ta.sold + tb.sold) / double(C) : 0.0;
        sr += rev;
        sr2 += rev * rev;
        sl += load;
        sl2 += load * load;
    }
    double n = double(cfg.n_reps);
    out.mean_revenue = sr / n;
    out.mean_load = sl / n;
    out.se_revenue = std::sqrt(std::max(0.0, sr2 / n - out.mean_revenue * out.mean_revenue) / (n - 1));
    out.se_load = std::sqrt(std::max(0.0, sl2 / n - out.mean_load * out.mean_load) / (n - 1));
    return out;
}

} // namespace rm
