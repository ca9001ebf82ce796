#include "rm/alpha.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>

#include "rm/capped_demand.hpp"
#include "rm/numeric.hpp"

namespace rm {

void Strategy::validate() const {
    if (kind == Kind::stopping_time_m && (fares < 1 || fares > 16))
        throw std::domain_error("Strategy: fare count must be in [1,16]");
    if (kind == Kind::intermediate_k && (pct < 0.0 || pct > 100.0))
        throw std::domain_error("Strategy: pct must be in [0,100]");
}

std::string Strategy::label() const {
    switch (kind) {
        case Kind::uniform: return "uniform";
        case Kind::grid_uniform: return "grid_uniform";
        case Kind::full_dynamic: return "full_dynamic";
        case Kind::stopping_time: return "stopping_time";
        case Kind::stopping_time_m:
            return "stopping_time_" + std::to_string(fares) + (increasing ? "_increasing" : "_fares");
        case Kind::intermediate_k: return "intermediate_" + std::to_string(int(pct + 0.5));
    }
    return "?";
}

double gamma_power_mean(double lambda, double epsilon) {
    if (!(lambda > 0.0) || !(epsilon > 1.0))
        throw std::domain_error("gamma_power_mean: need lambda > 0, epsilon > 1");
    return std::exp(std::lgamma(lambda + 1.0 / epsilon) - std::lgamma(lambda));
}

namespace {

void check_args(int C, double epsilon, double lambda) {
    if (C < 0) throw std::domain_error("alpha: negative capacity");
    if (!(epsilon > 1.0)) throw std::domain_error("alpha: epsilon must exceed 1");
    if (!(lambda > 0.0)) throw std::domain_error("alpha: lambda must be positive");
}

// Maximizations over q need headroom above the per-seat scale: the optimal
// q for a capacity-C uniform price grows like C.
double effective_qmax(const AlphaOptions& opt, int C) {
    return std::max(opt.q_max, 3.0 * double(C) + 15.0);
}

std::vector<double> make_qgrid(const AlphaOptions& opt, int C) {
    return log_grid(opt.q_min, effective_qmax(opt, C), opt.q_grid_size);
}

// ---------------------------------------------------------------- uniform --

UniformPlan compute_uniform(Regime r, int C, double epsilon, double lambda,
                            const AlphaOptions& opt) {
    UniformPlan plan;
    if (C == 0) return plan;
    auto expected = [&](double q) {
        return r == Regime::complete ? expected_capped_demand(q, C)
                                     : expected_capped_demand_gamma(q, C, lambda);
    };
    auto f = [&](double q) { return std::pow(q, -1.0 / epsilon) * expected(q); };
    auto grid = make_qgrid(opt, C);
    auto best = grid_golden_max(f, grid);
    plan.alpha = best.value;
    plan.q_star = best.arg;
    plan.load = expected(best.arg) / double(C);
    return plan;
}

// ---------------------------------------------------- full dynamic pricing --

// alpha_k solves alpha = (alpha - prev)^(1-eps) * (1 - 1/eps)^(eps-1).
double full_dynamic_step_complete(double prev, double epsilon, double tol) {
    double c = std::pow(1.0 - 1.0 / epsilon, epsilon - 1.0);
    auto h = [&](double a) { return a - std::pow(a - prev, 1.0 - epsilon) * c; };
    double lo = prev + 1e-14 * (1.0 + prev);
    double hi = prev + 1.0;
    while (h(hi) < 0.0) hi = prev + (hi - prev) * 2.0;
    return bisect(h, lo, hi, {tol, 400});
}

// alpha_k(lambda) solves
// alpha = lambda (1-1/eps)^(eps-1) [ -prev(lambda+1) + (1 + 1/(lambda eps)) alpha ]^(1-eps).
double full_dynamic_step_incomplete(double prev_up, double lambda, double epsilon, double tol) {
    double c = lambda * std::pow(1.0 - 1.0 / epsilon, epsilon - 1.0);
    double slope = 1.0 + 1.0 / (lambda * epsilon);
    auto h = [&](double a) { return a - c * std::pow(slope * a - prev_up, 1.0 - epsilon); };
    double floor = prev_up / slope;
    double lo = floor + 1e-14 * (1.0 + floor);
    double hi = floor + 1.0;
    while (h(hi) < 0.0) hi = floor + (hi - floor) * 2.0;
    return bisect(h, lo, hi, {tol, 400});
}

// -------------------------------------------------- stopping-time kernels --

// Complete information: continuation weight S(q) = int_0^1 q e^{-sq} (1-s)^{1/eps} ds.
double stopping_weight_complete(double q, double epsilon) {
    return gauss64([&](double s) {
        return q * std::exp(-s * q) * std::pow(1.0 - s, 1.0 / epsilon);
    }, 0.0, 1.0);
}

// Incomplete information: sale part q^{1-1/eps} J1 with J1 = 1 - (1+q)^{-lambda},
// continuation weight J2(q,lambda) = q int_0^1 lambda (1-s)^{1/eps} (1+qs)^{-(lambda+1+1/eps)} ds.
double stopping_weight_incomplete(double q, double lambda, double epsilon) {
    return gauss64([&](double s) {
        return q * lambda * std::pow(1.0 - s, 1.0 / epsilon) *
               std::pow(1.0 + q * s, -(lambda + 1.0 + 1.0 / epsilon));
    }, 0.0, 1.0);
}

double sale_value_complete(double q, double epsilon) {
    return std::pow(q, -1.0 / epsilon) * (-std::expm1(-q));
}

double sale_value_incomplete(double q, double lambda, double epsilon) {
    return std::pow(q, -1.0 / epsilon) * (1.0 - std::pow(1.0 + q, -lambda));
}

// One stopping-time Bellman step: maximize sale value + prev * weight.
MaxResult stopping_step(Regime r, double prev, double lambda, double epsilon,
                        const std::vector<double>& grid) {
    // Precompute the weight on the grid once; golden refinement evaluates the
    // exact kernel (cheap relative to the scan).
    auto objective = [&](double q) {
        double sale = r == Regime::complete ? sale_value_complete(q, epsilon)
                                            : sale_value_incomplete(q, lambda, epsilon);
        double w = r == Regime::complete ? stopping_weight_complete(q, epsilon)
                                         : stopping_weight_incomplete(q, lambda, epsilon);
        return sale + prev * w;
    };
    return grid_golden_max(objective, grid);
}

SeatPlan compute_seat_plan(const Strategy& s, Regime r, int C, double epsilon, double lambda,
                           const AlphaOptions& opt) {
    SeatPlan plan;
    plan.alpha_k.assign(std::size_t(C) + 1, 0.0);
    plan.q_star_k.assign(std::size_t(C) + 1, 0.0);
    if (C == 0) return plan;
    auto grid = make_qgrid(opt, C);

    if (s.kind == Strategy::Kind::full_dynamic) {
        for (int k = 1; k <= C; ++k) {
            // Incomplete regime: entry k holds alpha_k at posterior shape
            // lambda + C - k, so the k-1 entry is already at shape + 1.
            if (r == Regime::complete)
                plan.alpha_k[k] = full_dynamic_step_complete(plan.alpha_k[k - 1], epsilon,
                                                             opt.implicit_tol);
            else
                plan.alpha_k[k] = full_dynamic_step_incomplete(
                    plan.alpha_k[k - 1], lambda + double(C - k), epsilon, opt.implicit_tol);
        }
        return plan;
    }

    int start = 0;
    if (s.kind == Strategy::Kind::intermediate_k) {
        int keep = int(std::llround(double(C) * (1.0 - s.pct / 100.0)));
        keep = std::max(0, std::min(C, keep));
        plan.switch_seats = keep;
        if (keep > 0) {
            double lam_keep = lambda + double(C - keep);
            auto expected = [&](double q) {
                return r == Regime::complete ? expected_capped_demand(q, keep)
                                             : expected_capped_demand_gamma(q, keep, lam_keep);
            };
            auto f = [&](double q) { return std::pow(q, -1.0 / epsilon) * expected(q); };
            auto best = grid_golden_max(f, grid);
            plan.alpha_k[keep] = best.value;
            plan.uniform_q = best.arg;
        }
        start = keep;
    } else if (s.kind != Strategy::Kind::stopping_time) {
        throw std::invalid_argument("compute_seat_plan: unsupported strategy");
    }

    for (int k = start + 1; k <= C; ++k) {
        double lam_k = lambda + double(C - k);
        auto best = stopping_step(r, plan.alpha_k[k - 1], lam_k, epsilon, grid);
        plan.alpha_k[k] = best.value;
        plan.q_star_k[k] = best.arg;
    }
    return plan;
}

} // namespace

// ------------------------------------------------------------- fare plans --

double FarePlan::eval(const Pchip& table, double q) const {
    double qmin = q_grid.front();
    if (q < qmin) {
        // Power-law anchor through the origin: value ~ q^(1 - 1/eps) near 0.
        return table(qmin) * std::pow(q / qmin, 1.0 - 1.0 / epsilon);
    }
    return table(q);
}

double FarePlan::value_at(int k, int m, double q) const {
    if (k <= 0) return 0.0;
    m = std::max(std::min(m, int(value[std::size_t(k)].size()) - 1), 0);
    const Pchip& table = value[std::size_t(k)][std::size_t(m)];
    // With a change still in hand and no fare-direction constraint, the value
    // below the grid is floored by switching to the unconstrained optimum, so
    // it flattens out instead of following the locked-fare power law.
    if (m >= 1 && !increasing && q < q_grid.front()) return table(q_grid.front());
    return eval(table, q);
}

namespace {

FarePlan compute_fare_plan(const Strategy& s, Regime r, int C, double epsilon, double lambda,
                           const AlphaOptions& opt) {
    FarePlan plan;
    plan.epsilon = epsilon;
    plan.increasing = s.increasing;
    plan.q_grid = make_qgrid(opt, C);
    const auto& grid = plan.q_grid;
    const int M = s.fares;
    const bool increasing = s.increasing;
    plan.value.resize(std::size_t(C) + 1);
    plan.switch_j.resize(std::size_t(C) + 1);
    plan.switch_best.resize(std::size_t(C) + 1);
    if (C == 0) return plan;

    // Gauss-Legendre nodes on [0,1] for the continuation integrals.
    using GL = boost::math::quadrature::gauss<double, 64>;
    std::vector<double> node(64), wght(64);
    for (std::size_t i = 0; i < 32; ++i) {
        double x = GL::abscissa()[i];  // non-negative half
        double w = GL::weights()[i];
        node[2 * i] = 0.5 * (1.0 - x);
        node[2 * i + 1] = 0.5 * (1.0 + x);
        wght[2 * i] = wght[2 * i + 1] = 0.5 * w;
    }

    // Value of posting q with continuation value_at(kprev, mprev) after the
    // next sale; value_at applies the extension matching the table's regime.
    auto branch_value = [&](double q, double lam_k, int kprev, int mprev) {
        bool cont_nonzero = kprev > 0;
        double sale = r == Regime::complete ? sale_value_complete(q, epsilon)
                                            : sale_value_incomplete(q, lam_k, epsilon);
        if (!cont_nonzero) return sale;
        double acc = 0.0;
        for (std::size_t i = 0; i < node.size(); ++i) {
            double u = node[i];
            double kern, qnext, shrink;
            if (r == Regime::complete) {
                kern = q * std::exp(-q * u);
                qnext = q * (1.0 - u);
                shrink = std::pow(1.0 - u, 1.0 / epsilon);
            } else {
                double denom = 1.0 + q * u;
                kern = q * lam_k * std::pow(denom, -(lam_k + 1.0));
                qnext = q * (1.0 - u) / denom;
                shrink = std::pow((1.0 - u) / denom, 1.0 / epsilon);
            }
            double cont = plan.value_at(kprev, mprev, qnext) * shrink;
            acc += wght[i] * kern * cont;
        }
        return sale + acc;
    };

    for (int k = 1; k <= C; ++k) {
        double lam_k = lambda + double(C - k);
        int mmax = std::min(M, k);
        auto& vrow = plan.value[std::size_t(k)];
        auto& jrow = plan.switch_j[std::size_t(k)];
        auto& brow = plan.switch_best[std::size_t(k)];
        std::vector<std::vector<double>> vals(std::size_t(mmax) + 1,
                                              std::vector<double>(grid.size()));
        jrow.resize(std::size_t(mmax) + 1);
        brow.assign(std::size_t(mmax) + 1, {0.0, 0.0});

        // m = 0: locked price, capped expectation in closed form.
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double q = grid[i];
            double e = r == Regime::complete ? expected_capped_demand(q, k)
                                             : expected_capped_demand_gamma(q, k, lam_k);
            vals[0][i] = std::pow(q, -1.0 / epsilon) * e;
        }

        for (int m = 1; m <= mmax; ++m) {
            auto Jfun = [&](double qp) { return branch_value(qp, lam_k, k - 1, m - 1); };
            std::vector<double> jvals(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) jvals[i] = Jfun(grid[i]);
            Pchip jtab(grid, jvals);
            // Refine the switch optimum against the exact kernel, not the
            // interpolant: the tables inherit this maximum, so its error would
            // otherwise propagate through every seat level.
            auto jbest = grid_golden_max(Jfun, grid);
            brow[std::size_t(m)] = {jbest.arg, jbest.value};

            double running = -1.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                double q = grid[i];
                double keep = branch_value(q, lam_k, k - 1, m);
                running = std::max(running, jvals[i]);
                double sw = increasing ? running : jbest.value;
                double v = std::max(keep, sw);
                // More remaining changes can always be left unused.
                if (m >= 1) v = std::max(v, vals[std::size_t(m - 1)][i]);
                vals[std::size_t(m)][i] = v;
            }
            jrow[std::size_t(m)] = std::move(jtab);
        }
        vrow.reserve(vals.size());
        for (auto& v : vals) vrow.emplace_back(grid, std::move(v));
    }

    // Fresh start: the first posting is free, so optimize the keep branch with
    // the full budget.  The value table itself can be flat wherever the switch
    // option binds, which makes its argmax useless as an opening price.
    int mtop = std::min(M, C);
    auto best = grid_golden_max([&](double q) { return branch_value(q, lambda, C - 1, mtop); },
                                grid);
    plan.alpha = best.value;
    plan.q_star = best.arg;
    return plan;
}

} // namespace

// -------------------------------------------------------------- the cache --

const UniformPlan& AlphaCache::uniform_plan(Regime r, int C, double epsilon, double lambda) {
    check_args(C, epsilon, lambda);
    Key key{Strategy::uniform(), r, C, epsilon, lambda};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = uniform_.find(key);
    if (it == uniform_.end())
        it = uniform_.emplace(key, compute_uniform(r, C, epsilon, lambda, opt_)).first;
    return it->second;
}

const SeatPlan& AlphaCache::seat_plan(const Strategy& s, Regime r, int C, double epsilon,
                                      double lambda) {
    check_args(C, epsilon, lambda);
    s.validate();
    Key key{s, r, C, epsilon, lambda};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = seat_.find(key);
    if (it == seat_.end())
        it = seat_.emplace(key, compute_seat_plan(s, r, C, epsilon, lambda, opt_)).first;
    return it->second;
}

const FarePlan& AlphaCache::fare_plan(const Strategy& s, Regime r, int C, double epsilon,
                                      double lambda) {
    check_args(C, epsilon, lambda);
    s.validate();
    if (s.kind != Strategy::Kind::stopping_time_m)
        throw std::invalid_argument("fare_plan: only stopping_time_m strategies have fare tables");
    Key key{s, r, C, epsilon, lambda};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = fare_.find(key);
    if (it == fare_.end())
        it = fare_.emplace(key, std::make_shared<FarePlan>(
                                    compute_fare_plan(s, r, C, epsilon, lambda, opt_))).first;
    return *it->second;
}

double AlphaCache::alpha(const Strategy& s, Regime r, int C, double epsilon, double lambda) {
    check_args(C, epsilon, lambda);
    s.validate();
    if (C == 0) return 0.0;
    double eta = r == Regime::complete ? gamma_power_mean(lambda, epsilon) : 1.0;
    switch (s.kind) {
        case Strategy::Kind::uniform:
            return uniform_plan(r, C, epsilon, lambda).alpha * eta;
        case Strategy::Kind::grid_uniform:
            throw std::invalid_argument(
                "alpha: grid-constrained uniform pricing has no scalar coefficient; "
                "use the revenue evaluation directly");
        case Strategy::Kind::full_dynamic:
        case Strategy::Kind::stopping_time:
        case Strategy::Kind::intermediate_k:
            return seat_plan(s, r, C, epsilon, lambda).alpha_k[std::size_t(C)] * eta;
        case Strategy::Kind::stopping_time_m:
            return fare_plan(s, r, C, epsilon, lambda).alpha * eta;
    }
    throw std::logic_error("alpha: unreachable");
}

std::vector<double> AlphaCache::alpha_all_capacities(const Strategy& s, Regime r, int C,
                                                     double epsilon, double lambda) {
    check_args(C, epsilon, lambda);
    s.validate();
    Key key{s, r, C, epsilon, lambda};
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = all_caps_.find(key);
        if (it != all_caps_.end()) return it->second;
    }
    std::vector<double> out(std::size_t(C) + 1, 0.0);
    double eta = r == Regime::complete ? gamma_power_mean(lambda, epsilon) : 1.0;
    auto grid = make_qgrid(opt_, C);

    if (s.kind == Strategy::Kind::uniform) {
        for (int c = 1; c <= C; ++c) {
            auto expected = [&](double q) {
                return r == Regime::complete ? expected_capped_demand(q, c)
                                             : expected_capped_demand_gamma(q, c, lambda);
            };
            auto f = [&](double q) { return std::pow(q, -1.0 / epsilon) * expected(q); };
            out[std::size_t(c)] = grid_golden_max(f, grid).value * eta;
        }
    } else if (s.kind == Strategy::Kind::full_dynamic && r == Regime::complete) {
        // The complete-information recursion is capacity-free: alpha_k is the
        // coefficient for capacity k.
        std::vector<double> raw(std::size_t(C) + 1, 0.0);
        for (int k = 1; k <= C; ++k)
            raw[std::size_t(k)] =
                full_dynamic_step_complete(raw[std::size_t(k - 1)], epsilon, opt_.implicit_tol);
        for (int k = 0; k <= C; ++k) out[std::size_t(k)] = raw[std::size_t(k)] * eta;
    } else if (s.kind == Strategy::Kind::stopping_time && r == Regime::complete) {
        std::vector<double> raw(std::size_t(C) + 1, 0.0);
        for (int k = 1; k <= C; ++k)
            raw[std::size_t(k)] = stopping_step(r, raw[std::size_t(k - 1)], lambda, epsilon,
                                                grid).value;
        for (int k = 0; k <= C; ++k) out[std::size_t(k)] = raw[std::size_t(k)] * eta;
    } else if ((s.kind == Strategy::Kind::full_dynamic ||
                s.kind == Strategy::Kind::stopping_time) && r == Regime::incomplete) {
        // Triangle over (k, j): entry = alpha_k(lambda + j); the step for
        // (k, j) consumes (k-1, j+1).  Capacity c reads (c, 0).
        std::vector<std::vector<double>> tri(std::size_t(C) + 1);
        for (int k = 0; k <= C; ++k) tri[std::size_t(k)].assign(std::size_t(C - k) + 1, 0.0);
        for (int k = 1; k <= C; ++k) {
            for (int j = 0; j <= C - k; ++j) {
                double lam = lambda + double(j);
                double prev = tri[std::size_t(k - 1)][std::size_t(j + 1)];
                if (s.kind == Strategy::Kind::full_dynamic)
                    tri[std::size_t(k)][std::size_t(j)] =
                        full_dynamic_step_incomplete(prev, lam, epsilon, opt_.implicit_tol);
                else
                    tri[std::size_t(k)][std::size_t(j)] =
                        stopping_step(r, prev, lam, epsilon, grid).value;
            }
        }
        for (int c = 0; c <= C; ++c) out[std::size_t(c)] = tri[std::size_t(c)][0];
    } else {
        throw std::invalid_argument(
            "alpha_all_capacities: supported for uniform, stopping_time, full_dynamic");
    }
    std::lock_guard<std::mutex> lock(mu_);
    all_caps_.emplace(key, out);
    return out;
}

double AlphaCache::expected_load(const Strategy& s, Regime r, int C, double epsilon,
                                 double lambda) {
    check_args(C, epsilon, lambda);
    s.validate();
    if (C == 0) return 0.0;
    if (s.kind == Strategy::Kind::uniform)
        return uniform_plan(r, C, epsilon, lambda).load;
    if (s.kind == Strategy::Kind::full_dynamic) {
        if (r == Regime::complete) return 1.0;
        throw std::invalid_argument("expected_load: no load formula for incomplete full dynamic");
    }
    if (s.kind == Strategy::Kind::stopping_time) {
        const auto& plan = seat_plan(s, r, C, epsilon, lambda);
        if (r == Regime::complete) {
            double D = 0.0;
            for (int k = 1; k <= C; ++k)
                D = (-std::expm1(-plan.alpha_k[std::size_t(k)])) * (1.0 + D);
            return D / double(C);
        }
        // D_r(lambda, mu) = (1 - e^{-alpha_r(lambda) mu}) (1 + D_{r-1}(lambda+1, (1+alpha_r(lambda)) mu)),
        // starting from mu = 1 at r = C.  alpha_k in the plan already sits at
        // posterior shape lambda + C - k.
        std::vector<double> mu(std::size_t(C) + 1, 0.0);
        mu[std::size_t(C)] = 1.0;
        for (int k = C; k >= 1; --k)
            mu[std::size_t(k - 1)] = (1.0 + plan.alpha_k[std::size_t(k)]) * mu[std::size_t(k)];
        double D = 0.0;
        for (int k = 1; k <= C; ++k)
            D = (-std::expm1(-plan.alpha_k[std::size_t(k)] * mu[std::size_t(k)])) * (1.0 + D);
        return D / double(C);
    }
    throw std::invalid_argument("expected_load: no load formula for strategy " + s.label());
}

double uniform_revenue_no_preallocation(Regime r, double xi_a_scale, double xi_b_scale,
                                        double lambda_a, double lambda_b, int C,
                                        double epsilon, const AlphaOptions& opt) {
    check_args(C, epsilon, std::min(lambda_a, lambda_b));
    if (C == 0) return 0.0;
    boost::math::gamma_distribution<double> ga(lambda_a, 1.0), gb(lambda_b, 1.0);
    using GL = boost::math::quadrature::gauss<double, 32>;
    std::vector<double> node, wght;
    for (std::size_t i = 0; i < 16; ++i) {
        double x = GL::abscissa()[i], w = GL::weights()[i];
        node.push_back(0.5 * (1.0 - x));
        node.push_back(0.5 * (1.0 + x));
        wght.push_back(0.5 * w);
        wght.push_back(0.5 * w);
    }
    auto grid = log_grid(opt.q_min, std::max(opt.q_max, 3.0 * C + 15.0), opt.q_grid_size);
    if (r == Regime::complete) {
        // Firm observes (xi_a, xi_b); scale invariance gives
        // R = max_q q^{-1/eps} E[D(q) ^ C] * E[(s_a z_a + s_b z_b)^{1/eps}].
        auto best = grid_golden_max(
            [&](double q) { return std::pow(q, -1.0 / epsilon) * expected_capped_demand(q, C); },
            grid);
        double mixed = 0.0;
        for (std::size_t i = 0; i < node.size(); ++i)
            for (std::size_t j = 0; j < node.size(); ++j) {
                double za = boost::math::quantile(ga, node[i]);
                double zb = boost::math::quantile(gb, node[j]);
                mixed += wght[i] * wght[j] *
                         std::pow(xi_a_scale * za + xi_b_scale * zb, 1.0 / epsilon);
            }
        return best.value * mixed;
    }
    // Incomplete: R = max_p p E[D((s_a z_a + s_b z_b) p^{-eps}) ^ C], expectation outside.
    double s_tot = xi_a_scale + xi_b_scale;
    std::vector<double> za(node.size()), zb(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
        za[i] = boost::math::quantile(ga, node[i]);
        zb[i] = boost::math::quantile(gb, node[i]);
    }
    auto f = [&](double q) {
        // q = s_tot * p^{-eps}, so p = (s_tot / q)^{1/eps}
        double p = std::pow(s_tot / q, 1.0 / epsilon);
        double acc = 0.0;
        for (std::size_t i = 0; i < node.size(); ++i)
            for (std::size_t j = 0; j < node.size(); ++j) {
                double mean = (xi_a_scale * za[i] + xi_b_scale * zb[j]) / s_tot * q;
                acc += wght[i] * wght[j] * expected_capped_demand(mean, C);
            }
        return p * acc;
    };
    return grid_golden_max(f, grid).value;
}

} // namespace rm
