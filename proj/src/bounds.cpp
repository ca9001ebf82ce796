#include "rm/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "rm/capped_demand.hpp"
#include "rm/numeric.hpp"

namespace rm {

namespace {

void check_cell(const CellData& cell, const BoundParams& params) {
    if (!(params.epsilon > 1.0)) throw std::domain_error("bounds: epsilon must exceed 1");
    if (!(params.lambda_a > 0.0) || !(params.lambda_b > 0.0))
        throw std::domain_error("bounds: lambda must be positive");
    if (cell.prices_a.size() != cell.prices_b.size() || cell.prices_a.empty())
        throw std::invalid_argument("bounds: price grids must be non-empty and aligned");
    if (cell.capacity < 0) throw std::domain_error("bounds: negative capacity");
    if (!(cell.scale_a > 0.0) || !(cell.scale_b > 0.0))
        throw std::domain_error("bounds: covariate scales must be positive");
}

} // namespace

LowerBoundResult lower_bound_g(const CellData& cell, const BoundParams& params) {
    check_cell(cell, params);
    const std::size_t K = cell.prices_a.size();
    if (cell.cum_sales_a.size() != K || cell.cum_sales_b.size() != K)
        throw std::invalid_argument("lower_bound_g: cumulative sales must have K entries");

    LowerBoundResult best;
    for (int di = 0; di < 2; ++di) {
        Dest d = di == 0 ? Dest::a : Dest::b;
        double scale = di == 0 ? cell.scale_a : cell.scale_b;
        double lambda = di == 0 ? params.lambda_a : params.lambda_b;
        const auto& prices = di == 0 ? cell.prices_a : cell.prices_b;
        const auto& cum = di == 0 ? cell.cum_sales_a : cell.cum_sales_b;
        for (std::size_t k = 0; k < K; ++k) {
            double target = cum[k];
            if (!(target >= 0.0) || !std::isfinite(target))
                throw std::invalid_argument("lower_bound_g: invalid cell mean");
            if (target <= 0.0) continue;
            double coef = scale * std::pow(prices[k], -params.epsilon);
            if (target >= double(cell.capacity)) {
                // E[C ^ D] < C for every finite g; record and keep the bracket cap.
                best.hit_capacity = true;
                target = std::nextafter(double(cell.capacity), 0.0);
            }
            auto fwd = [&](double g) {
                return expected_capped_demand_gamma(coef * g, cell.capacity, lambda);
            };
            double hi = params.bracket_hi;
            if (fwd(hi) <= target) {
                best.hit_capacity = true;
                continue;
            }
            double lo = params.bracket_lo;
            if (fwd(lo) >= target) lo = 0.0;
            double g = bisect([&](double x) { return fwd(x) - target; }, lo, hi,
                              {params.tol, 200});
            if (g > best.g) {
                best.g = g;
                best.binding_dest = d;
                best.binding_class = int(k);
            }
        }
    }
    return best;
}

GridUniformRevenue grid_uniform_revenue(double g, const CellData& cell, const BoundParams& params) {
    check_cell(cell, params);
    if (!(g > 0.0)) throw std::domain_error("grid_uniform_revenue: g must be positive");
    GridUniformRevenue best;
    const int C = cell.capacity;
    if (C == 0) return best;
    for (std::size_t k = 0; k < cell.prices_a.size(); ++k) {
        double qa = cell.scale_a * std::pow(cell.prices_a[k], -params.epsilon) * g;
        double qb = cell.scale_b * std::pow(cell.prices_b[k], -params.epsilon) * g;
        auto fa = expected_capped_demand_gamma_table(qa, C, params.lambda_a);
        auto fb = expected_capped_demand_gamma_table(qb, C, params.lambda_b);
        for (int ca = 0; ca <= C; ++ca) {
            double rev = cell.prices_a[k] * fa[std::size_t(ca)] +
                         cell.prices_b[k] * fb[std::size_t(C - ca)];
            if (rev > best.revenue) {
                best.revenue = rev;
                best.fare_class = int(k);
                best.seats_a = ca;
                best.seats_b = C - ca;
            }
        }
    }
    return best;
}

UpperBoundResult upper_bound_g(const CellData& cell, const BoundParams& params) {
    check_cell(cell, params);
    UpperBoundResult out;
    if (!(cell.mean_revenue > 0.0)) {
        out.below_floor = true;
        return out;
    }
    auto fwd = [&](double g) { return grid_uniform_revenue(g, cell, params).revenue; };
    double lo = params.bracket_lo, hi = params.bracket_hi;
    if (fwd(lo) >= cell.mean_revenue) {
        out.below_floor = true;
        return out;
    }
    // Revenue saturates near C * max price; clamp the target into range.
    double top = fwd(hi);
    double target = cell.mean_revenue;
    if (target >= top) target = std::nextafter(top, 0.0);
    out.g = bisect([&](double g) { return fwd(g) - target; }, lo, hi, {params.tol, 200});
    out.fare_class = grid_uniform_revenue(out.g, cell, params).fare_class;
    return out;
}

CellBounds cell_bounds(const CellData& cell, const BoundParams& params) {
    CellBounds out;
    out.cell = cell.cell;
    auto lb = lower_bound_g(cell, params);
    auto ub = upper_bound_g(cell, params);
    out.g_lower = lb.g;
    out.g_upper = ub.g;
    out.binding_dest = lb.binding_dest;
    out.binding_class = lb.binding_class;
    out.upper_fare_class = ub.fare_class;
    out.lower_inversion_hit_cap = lb.hit_capacity;
    out.feasible = !ub.below_floor && !lb.hit_capacity && out.g_lower <= out.g_upper;
    return out;
}

} // namespace rm
