#include "rm/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rm/rng.hpp"

namespace rm {

void DemandPrimitives::validate() const {
    if (!(epsilon > 1.0)) throw std::domain_error("DemandPrimitives: epsilon must exceed 1");
    if (!(lambda_a > 0.0) || !(lambda_b > 0.0))
        throw std::domain_error("DemandPrimitives: gamma shapes must be positive");
    for (const auto& [cell, g] : g0)
        if (!(g > 0.0)) throw std::domain_error("DemandPrimitives: g0 must be positive in cell " + cell);
}

void TrainInstance::validate() const {
    if (capacity < 0) throw std::domain_error("TrainInstance: negative capacity");
    if (prices_a.size() != prices_b.size())
        throw std::domain_error("TrainInstance: price grids must share K");
    if (prices_a.empty()) throw std::domain_error("TrainInstance: empty price grid");
    for (const auto* g : {&prices_a, &prices_b}) {
        for (std::size_t k = 0; k < g->size(); ++k) {
            if (!((*g)[k] > 0.0)) throw std::domain_error("TrainInstance: non-positive price");
            if (k > 0 && (*g)[k] < (*g)[k - 1])
                throw std::domain_error("TrainInstance: prices must be non-decreasing in k");
        }
    }
}

double TrainInstance::covariate_scale(Dest d, const std::vector<double>& beta) const {
    const auto& cs = cities(d);
    double s = 0.0;
    for (const auto& c : cs) {
        if (c.x.size() != beta.size())
            throw std::invalid_argument("covariate_scale: X/beta length mismatch");
        double dot = 0.0;
        for (std::size_t j = 0; j < beta.size(); ++j) dot += c.x[j] * beta[j];
        s += std::exp(dot);
    }
    return s;
}

double intensity(double t, double p, double xi, const ArrivalShape& shape, double epsilon) {
    if (!(p > 0.0)) throw std::domain_error("intensity: price must be positive");
    if (!(xi > 0.0)) throw std::domain_error("intensity: xi must be positive");
    if (!(epsilon > 1.0)) throw std::domain_error("intensity: epsilon must exceed 1");
    if (t < 0.0 || t > 1.0) throw std::domain_error("intensity: t outside [0,1]");
    return xi * shape.density(t) * epsilon * std::pow(p, -1.0 - epsilon);
}

void PricePath::validate() const {
    if (change_times.empty() || change_times.front() != 0.0)
        throw std::invalid_argument("PricePath: first change time must be 0");
    if (price_a.size() != change_times.size() || price_b.size() != change_times.size() ||
        fare_class.size() != change_times.size())
        throw std::invalid_argument("PricePath: field lengths differ");
    for (std::size_t i = 0; i < change_times.size(); ++i) {
        if (i > 0 && change_times[i] <= change_times[i - 1])
            throw std::invalid_argument("PricePath: change times must increase");
        if (!(price_a[i] > 0.0) || !(price_b[i] > 0.0))
            throw std::invalid_argument("PricePath: non-positive price");
    }
}

std::size_t PricePath::segment(double t) const {
    auto it = std::upper_bound(change_times.begin(), change_times.end(), t);
    return std::size_t(it - change_times.begin()) - 1;
}

std::vector<PurchaseEvent> sample_arrivals(const DemandDraw& draw, const ArrivalShape& shape,
                                           double epsilon, const PricePath& path,
                                           int capacity_a, int capacity_b,
                                           std::uint64_t seed, std::int64_t train_id) {
    if (std::abs(shape.cumulative(0.0, 1.0) - 1.0) > 1e-12)
        throw std::invalid_argument("sample_arrivals: shape not normalized");
    path.validate();
    if (!(draw.xi_a > 0.0) || !(draw.xi_b > 0.0))
        throw std::domain_error("sample_arrivals: xi must be positive");
    if (capacity_a < 0 || capacity_b < 0)
        throw std::domain_error("sample_arrivals: negative capacity");

    std::vector<PurchaseEvent> events;
    int remaining[2] = {capacity_a, capacity_b};
    const double xi[2] = {draw.xi_a, draw.xi_b};

    // Independent thinned NHPPs per destination; separate streams keep the
    // two processes independent and the output seed-stable.
    for (int di = 0; di < 2; ++di) {
        if (remaining[di] == 0) continue;
        auto eng = make_engine(seed, std::uint64_t(train_id), 0x61 + di);
        std::exponential_distribution<double> expo(1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Dest d = di == 0 ? Dest::a : Dest::b;
        int sold = 0;
        double t = 0.0;
        // Envelope: max purchase rate over the remainder of the horizon at the
        // current segment's price; refreshed at segment changes and proposals.
        while (sold < remaining[di]) {
            std::size_t seg = path.segment(std::min(t, std::nextafter(1.0, 0.0)));
            double seg_end = seg + 1 < path.change_times.size() ? path.change_times[seg + 1] : 1.0;
            double price = (d == Dest::a ? path.price_a : path.price_b)[seg];
            double rate_env = xi[di] * std::pow(price, -epsilon) * shape.max_density(t, seg_end);
            if (rate_env <= 0.0) { t = seg_end; if (t >= 1.0) break; continue; }
            double dt = expo(eng) / rate_env;
            if (t + dt >= seg_end) {
                t = seg_end;
                if (t >= 1.0) break;
                continue;
            }
            t += dt;
            double accept = xi[di] * std::pow(price, -epsilon) * shape.density(t) / rate_env;
            if (unif(eng) <= accept) {
                events.push_back({train_id, t, d, price, path.fare_class[seg]});
                ++sold;
            }
        }
    }
    std::sort(events.begin(), events.end(),
              [](const PurchaseEvent& l, const PurchaseEvent& r) { return l.t < r.t; });
    return events;
}

namespace {
std::vector<double> grid_or_constant(const std::vector<double>& g, std::size_t n) {
    if (g.size() == n) return g;
    if (g.size() == 1) return std::vector<double>(n, g[0]);
    throw std::invalid_argument("microfoundation_intensity: grid length mismatch");
}
} // namespace

MicrofoundationResult microfoundation_intensity(const ModeChoiceParams& params) {
    if (!(params.alpha > 0.0)) throw std::domain_error("microfoundation: alpha must be positive");
    if (params.delta.empty() || params.delta.size() != params.a.size() ||
        params.delta.size() != params.price_grid.size())
        throw std::invalid_argument("microfoundation: per-mode fields must align");
    double sum_delta = std::accumulate(params.delta.begin(), params.delta.end(), 0.0);
    for (double dm : params.delta)
        if (!(dm > 0.0)) throw std::domain_error("microfoundation: delta must be positive");
    double epsilon = params.alpha * sum_delta;
    if (!(epsilon > 1.0))
        throw std::domain_error("microfoundation: alpha * sum(delta) must exceed 1");

    std::size_t cells = std::max<std::size_t>(params.lambda_grid.size(), 64);
    for (const auto& pg : params.price_grid) cells = std::max(cells, pg.size());
    std::vector<double> lam = grid_or_constant(
        params.lambda_grid.empty() ? std::vector<double>{1.0} : params.lambda_grid, cells);

    // Unnormalized arrival weight per cell: lambda(t) * prod_m p_m(t)^(alpha*delta_m).
    std::vector<double> w(cells, 0.0);
    double integral = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        double v = lam[i];
        for (std::size_t m = 0; m < params.delta.size(); ++m) {
            const auto pm = grid_or_constant(params.price_grid[m], cells);
            if (!(pm[i] > 0.0)) throw std::domain_error("microfoundation: non-positive mode price");
            v *= std::pow(pm[i], params.alpha * params.delta[m]);
        }
        w[i] = v;
        integral += v / double(cells);
    }

    double mode_scale = 1.0;
    for (std::size_t m = 0; m < params.delta.size(); ++m)
        mode_scale *= std::pow(params.a[m], params.delta[m]);
    double level = mode_scale / sum_delta * integral;

    MicrofoundationResult out;
    out.xi_a = params.kappa_a * level;
    out.xi_b = params.kappa_b * level;
    out.shape = ArrivalShape(w);
    out.epsilon = epsilon;
    return out;
}

CompensatingVariation compensating_variation(double r_observed, double r_counterfactual) {
    if (!(r_observed > 0.0) || !(r_counterfactual > 0.0))
        throw std::domain_error("compensating_variation: revenues must be positive");
    if (r_counterfactual < r_observed) return {0.0, false};
    return {1.0 - r_observed / r_counterfactual, true};
}

} // namespace rm
