#include "rm/revenue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "rm/capped_demand.hpp"
#include "rm/numeric.hpp"

namespace rm {

std::pair<int, int> preallocate(int C_total, PreallocRule rule, double avg_a,
                                const std::vector<double>& value_a,
                                const std::vector<double>& value_b) {
    if (C_total < 0) throw std::domain_error("preallocate: negative capacity");
    if (C_total == 0) return {0, 0};
    if (rule == PreallocRule::match_observed_mean) {
        if (!(avg_a >= 0.0) || !(avg_a <= double(C_total)))
            throw std::domain_error("preallocate: avg_a must lie in [0, C_total]");
        int ca = int(std::llround(avg_a));
        ca = std::max(0, std::min(C_total, ca));
        return {ca, C_total - ca};
    }
    if (int(value_a.size()) <= C_total || int(value_b.size()) <= C_total)
        throw std::invalid_argument("preallocate: optimal rule needs values for 0..C_total seats");
    int best_ca = 0;
    double best = -1.0;
    for (int ca = 0; ca <= C_total; ++ca) {
        double v = value_a[std::size_t(ca)] + value_b[std::size_t(C_total - ca)];
        if (v > best) {
            best = v;
            best_ca = ca;
        }
    }
    return {best_ca, C_total - best_ca};
}

namespace {

// Per-destination revenue weights used by the optimal preallocation rule.
// Strategies without a per-capacity coefficient vector use the stopping-time
// vector as the allocation proxy; the chosen split is then valued exactly.
Strategy allocation_proxy(const Strategy& s) {
    switch (s.kind) {
        case Strategy::Kind::uniform:
        case Strategy::Kind::stopping_time:
        case Strategy::Kind::full_dynamic:
            return s;
        default:
            return Strategy::stopping_time();
    }
}

const CellBounds& find_cell(const std::map<std::string, CellBounds>& bounds,
                            const std::string& cell) {
    auto it = bounds.find(cell);
    if (it == bounds.end())
        throw std::invalid_argument("revenue: no bounds for covariate cell '" + cell + "'");
    return it->second;
}

// Gauss-Legendre nodes/weights unpacked onto (0,1).
void unit_nodes(std::vector<double>& node, std::vector<double>& wght) {
    using GL = boost::math::quadrature::gauss<double, 32>;
    node.resize(32);
    wght.resize(32);
    for (std::size_t i = 0; i < 16; ++i) {
        double x = GL::abscissa()[i];
        double w = GL::weights()[i];
        node[2 * i] = 0.5 * (1.0 - x);
        node[2 * i + 1] = 0.5 * (1.0 + x);
        wght[2 * i] = wght[2 * i + 1] = 0.5 * w;
    }
}

} // namespace

double grid_uniform_revenue_complete(double g, const CellData& cell, const BoundParams& params) {
    if (!(g > 0.0)) throw std::domain_error("grid_uniform_revenue_complete: g must be positive");
    if (!(params.epsilon > 1.0))
        throw std::domain_error("grid_uniform_revenue_complete: epsilon must exceed 1");
    const int C = cell.capacity;
    if (C == 0) return 0.0;
    const std::size_t K = cell.prices_a.size();
    if (cell.prices_b.size() != K || K == 0)
        throw std::invalid_argument("grid_uniform_revenue_complete: bad price grid");

    std::vector<double> node, wght;
    unit_nodes(node, wght);
    boost::math::gamma_distribution<double> ga(params.lambda_a, 1.0);
    boost::math::gamma_distribution<double> gb(params.lambda_b, 1.0);
    std::vector<double> za(node.size()), zb(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
        za[i] = boost::math::quantile(ga, node[i]);
        zb[i] = boost::math::quantile(gb, node[i]);
    }

    // fa[i][k][c] = E[D(q_ak * za_i) ^ c]; the seller observes (z_a, z_b) and
    // picks the best fare and seat split for that realization.
    auto make_tables = [&](const std::vector<double>& prices, double scale,
                           const std::vector<double>& z) {
        std::vector<std::vector<std::vector<double>>> t(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            t[i].resize(K);
            for (std::size_t k = 0; k < K; ++k) {
                double q = scale * std::pow(prices[k], -params.epsilon) * g * z[i];
                t[i][k] = expected_capped_demand_table(q, C);
            }
        }
        return t;
    };
    auto fa = make_tables(cell.prices_a, cell.scale_a, za);
    auto fb = make_tables(cell.prices_b, cell.scale_b, zb);

    double total = 0.0;
    for (std::size_t i = 0; i < node.size(); ++i) {
        for (std::size_t j = 0; j < node.size(); ++j) {
            double best = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const auto& ta = fa[i][k];
                const auto& tb = fb[j][k];
                for (int ca = 0; ca <= C; ++ca) {
                    double rev = cell.prices_a[k] * ta[std::size_t(ca)] +
                                 cell.prices_b[k] * tb[std::size_t(C - ca)];
                    if (rev > best) best = rev;
                }
            }
            total += wght[i] * wght[j] * best;
        }
    }
    return total;
}

RevenueInterval revenue_interval(const std::vector<TrainInstance>& trains,
                                 const DemandPrimitives& theta,
                                 const std::map<std::string, CellBounds>& bounds,
                                 const Strategy& strategy, Regime regime, PreallocRule rule,
                                 AlphaCache& cache,
                                 const std::map<std::int64_t, double>* observed_mean_a,
                                 std::vector<TrainRevenueDetail>* details) {
    theta.validate();
    strategy.validate();
    if (trains.empty()) throw std::invalid_argument("revenue_interval: no trains");

    RevenueInterval out;
    out.strategy = strategy;
    out.regime = regime;
    const double inv_eps = 1.0 / theta.epsilon;
    const bool grid = strategy.kind == Strategy::Kind::grid_uniform;
    const Strategy proxy = allocation_proxy(strategy);

    double sum_lo = 0.0, sum_hi = 0.0;
    for (const auto& train : trains) {
        const CellBounds& cb = find_cell(bounds, train.cell);
        double scale_a = train.covariate_scale(Dest::a, theta.beta);
        double scale_b = train.covariate_scale(Dest::b, theta.beta);
        const int C = train.capacity;

        TrainRevenueDetail det;
        det.id = train.id;

        if (grid) {
            // The grid-constrained uniform benchmark enumerates the seat split
            // inside the revenue itself, so no preallocation step is needed.
            CellData cd;
            cd.cell = train.cell;
            cd.capacity = C;
            cd.prices_a = train.prices_a;
            cd.prices_b = train.prices_b;
            cd.scale_a = scale_a;
            cd.scale_b = scale_b;
            BoundParams bp;
            bp.epsilon = theta.epsilon;
            bp.lambda_a = theta.lambda_a;
            bp.lambda_b = theta.lambda_b;
            auto value_at = [&](double g) {
                if (!(g > 0.0)) return 0.0;
                return regime == Regime::complete
                           ? grid_uniform_revenue_complete(g, cd, bp)
                           : grid_uniform_revenue(g, cd, bp).revenue;
            };
            det.lower = value_at(cb.g_lower);
            det.upper = value_at(cb.g_upper);
        } else {
            int ca, cbseats;
            if (rule == PreallocRule::optimal) {
                auto va = cache.alpha_all_capacities(proxy, regime, C, theta.epsilon,
                                                     theta.lambda_a);
                auto vb = cache.alpha_all_capacities(proxy, regime, C, theta.epsilon,
                                                     theta.lambda_b);
                double wa = std::pow(scale_a, inv_eps), wb = std::pow(scale_b, inv_eps);
                for (auto& v : va) v *= wa;
                for (auto& v : vb) v *= wb;
                std::tie(ca, cbseats) = preallocate(C, rule, 0.0, va, vb);
            } else {
                if (!observed_mean_a || !observed_mean_a->count(train.id))
                    throw std::invalid_argument(
                        "revenue_interval: match_observed_mean needs mean sales per train");
                std::tie(ca, cbseats) = preallocate(C, rule, observed_mean_a->at(train.id));
            }
            double coef = cache.alpha(strategy, regime, ca, theta.epsilon, theta.lambda_a) *
                              std::pow(scale_a, inv_eps) +
                          cache.alpha(strategy, regime, cbseats, theta.epsilon, theta.lambda_b) *
                              std::pow(scale_b, inv_eps);
            det.lower = cb.g_lower > 0.0 ? coef * std::pow(cb.g_lower, inv_eps) : 0.0;
            det.upper = cb.g_upper > 0.0 ? coef * std::pow(cb.g_upper, inv_eps) : 0.0;
            det.seats_a = ca;
            det.seats_b = cbseats;
        }
        if (det.upper < det.lower)
            throw std::runtime_error("revenue_interval: bounds crossed for cell '" + train.cell +
                                     "'");
        sum_lo += det.lower;
        sum_hi += det.upper;
        if (details) details->push_back(det);
    }
    out.lower = sum_lo / double(trains.size());
    out.upper = sum_hi / double(trains.size());
    return out;
}

std::pair<double, double> ratio_interval(const std::vector<RatioFactors>& factors,
                                         const std::map<std::string, CellBounds>& bounds,
                                         double epsilon) {
    if (!(epsilon > 1.0)) throw std::domain_error("ratio_interval: epsilon must exceed 1");
    if (factors.empty()) throw std::invalid_argument("ratio_interval: no trains");
    const double inv_eps = 1.0 / epsilon;

    struct Term {
        double f1, f2, wlo, whi;
    };
    std::vector<Term> terms;
    terms.reserve(factors.size());
    double r_max = 0.0;
    for (const auto& f : factors) {
        if (!(f.f1 > 0.0) || !(f.f2 > 0.0))
            throw std::domain_error("ratio_interval: factors must be positive");
        const CellBounds& cb = find_cell(bounds, f.cell);
        if (cb.g_lower > cb.g_upper)
            throw std::invalid_argument("ratio_interval: crossed bounds in cell '" + f.cell + "'");
        Term t;
        t.f1 = f.f1;
        t.f2 = f.f2;
        t.wlo = cb.g_lower > 0.0 ? std::pow(cb.g_lower, inv_eps) : 0.0;
        t.whi = cb.g_upper > 0.0 ? std::pow(cb.g_upper, inv_eps) : 0.0;
        terms.push_back(t);
        r_max = std::max(r_max, f.f1 / f.f2);
    }

    // Each side puts the larger g weight on trains whose margin f1 - r f2 is
    // positive; both left sides are strictly decreasing in r.
    auto lhs = [&](double r, bool upper) {
        double acc = 0.0;
        for (const auto& t : terms) {
            double base = upper ? t.wlo : t.whi;
            double extra = upper ? t.whi - t.wlo : t.wlo - t.whi;
            double margin = t.f1 - r * t.f2;
            acc += base * margin + extra * std::max(margin, 0.0);
        }
        return acc;
    };

    double hi = r_max * (1.0 + 1e-9) + 1e-30;
    Bisection opt{1e-12, 400};
    double r_hi = bisect([&](double r) { return lhs(r, true); }, 0.0, hi, opt);
    double r_lo = bisect([&](double r) { return lhs(r, false); }, 0.0, hi, opt);
    if (r_lo > r_hi) std::swap(r_lo, r_hi);
    return {r_lo, r_hi};
}

} // namespace rm
