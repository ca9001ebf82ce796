#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "rm/alpha.hpp"
#include "rm/capped_demand.hpp"
#include "rm/numeric.hpp"
#include "rm/revenue.hpp"

using namespace rm;

TEST_CASE("alpha: empty inventory is worthless") {
    AlphaCache cache;
    for (auto s : {Strategy::uniform(), Strategy::full_dynamic(), Strategy::stopping_time(),
                   Strategy::stopping_time_m(3, false), Strategy::intermediate_k(40.0)})
        for (auto r : {Regime::complete, Regime::incomplete})
            CHECK(cache.alpha(s, r, 0, 2.5, 2.0) == 0.0);
}

TEST_CASE("alpha: full dynamic complete C=1 fixed-point oracle") {
    AlphaCache cache;
    double eps = 2.0, lam = 2.0;
    double core = cache.alpha(Strategy::full_dynamic(), Regime::complete, 1, eps, lam) /
                  gamma_power_mean(lam, eps);
    CHECK(core == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("alpha: stopping time complete C=1 grid-search oracle") {
    AlphaCache cache;
    double eps = 2.0, lam = 3.0;
    // independent oracle: dense scan of q^{-1/2} (1 - e^{-q})
    double best = 0.0, qbest = 0.0;
    for (double q = 1e-4; q < 30.0; q += 1e-4) {
        double v = std::pow(q, -0.5) * (-std::expm1(-q));
        if (v > best) { best = v; qbest = q; }
    }
    CHECK(best == doctest::Approx(0.6384).epsilon(2e-3));
    CHECK(qbest == doctest::Approx(1.256).epsilon(2e-3));

    double core = cache.alpha(Strategy::stopping_time(), Regime::complete, 1, eps, lam) /
                  gamma_power_mean(lam, eps);
    CHECK(core == doctest::Approx(best).epsilon(1e-7));

    // with a single seat, committing to one price and repricing at the sale
    // coincide
    CHECK(cache.alpha(Strategy::uniform(), Regime::complete, 1, eps, lam) ==
          doctest::Approx(cache.alpha(Strategy::stopping_time(), Regime::complete, 1, eps, lam))
              .epsilon(1e-9));
}

TEST_CASE("alpha: fare-count constraint is slack when M >= C") {
    AlphaCache cache;
    for (auto r : {Regime::complete, Regime::incomplete})
        for (int C : {1, 2, 3, 4, 5}) {
            double s = cache.alpha(Strategy::stopping_time(), r, C, 3.0, 2.0);
            double m = cache.alpha(Strategy::stopping_time_m(C, false), r, C, 3.0, 2.0);
            CHECK(m == doctest::Approx(s).epsilon(1e-6));
        }
}

TEST_CASE("alpha: grid refinement stability") {
    AlphaOptions coarse;
    AlphaOptions fine;
    fine.q_grid_size = 400;
    AlphaCache c1(coarse), c2(fine);
    for (auto r : {Regime::complete, Regime::incomplete}) {
        double a1 = c1.alpha(Strategy::stopping_time_m(2, true), r, 6, 3.5, 1.8);
        double a2 = c2.alpha(Strategy::stopping_time_m(2, true), r, 6, 3.5, 1.8);
        CHECK(a1 == doctest::Approx(a2).epsilon(1e-3));
    }
}

TEST_CASE("alpha: strategy and information orderings on a spot check") {
    AlphaCache cache;
    int C = 4;
    double eps = 3.0, lam = 2.0;
    for (auto r : {Regime::complete, Regime::incomplete}) {
        double u = cache.alpha(Strategy::uniform(), r, C, eps, lam);
        double s2p = cache.alpha(Strategy::stopping_time_m(2, true), r, C, eps, lam);
        double s2 = cache.alpha(Strategy::stopping_time_m(2, false), r, C, eps, lam);
        double s = cache.alpha(Strategy::stopping_time(), r, C, eps, lam);
        double f = cache.alpha(Strategy::full_dynamic(), r, C, eps, lam);
        double tol = 1e-5 * s;
        CHECK(u <= s2p + tol);
        CHECK(s2p <= s2 + tol);
        CHECK(s2 <= s + tol);
        CHECK(s <= f + tol);
    }
    for (auto s : {Strategy::uniform(), Strategy::stopping_time(), Strategy::full_dynamic()})
        CHECK(cache.alpha(s, Regime::incomplete, C, eps, lam) <=
              cache.alpha(s, Regime::complete, C, eps, lam) + 1e-9);
}

TEST_CASE("preallocate") {
    CHECK(preallocate(0, PreallocRule::optimal) == std::pair<int, int>{0, 0});

    AlphaCache cache;
    double eps = 2.8, lam = 2.0;
    auto base = cache.alpha_all_capacities(Strategy::uniform(), Regime::complete, 4, eps, lam);

    SUBCASE("symmetric destinations split evenly up to ties") {
        auto [ca, cb] = preallocate(4, PreallocRule::optimal, 0.0, base, base);
        CHECK(ca + cb == 4);
        CHECK(std::abs(ca - cb) <= 1);
    }

    SUBCASE("asymmetric 3:1 intensity matches exhaustive enumeration") {
        std::vector<double> va(base.size()), vb(base.size());
        for (std::size_t c = 0; c < base.size(); ++c) {
            va[c] = base[c] * std::pow(3.0, 1.0 / eps);
            vb[c] = base[c];
        }
        auto [ca, cb] = preallocate(4, PreallocRule::optimal, 0.0, va, vb);
        int best_c = -1;
        double best = -1.0;
        for (int c = 0; c <= 4; ++c)
            if (va[c] + vb[4 - c] > best) { best = va[c] + vb[4 - c]; best_c = c; }
        CHECK(ca == best_c);
        CHECK(cb == 4 - best_c);
    }

    SUBCASE("observed-mean rule rounds, rejecting impossible means") {
        CHECK(preallocate(4, PreallocRule::match_observed_mean, 2.6) == std::pair<int, int>{3, 1});
        CHECK_THROWS(preallocate(4, PreallocRule::match_observed_mean, 11.0));
    }
}

TEST_CASE("expected load") {
    AlphaCache cache;
    CHECK(cache.expected_load(Strategy::uniform(), Regime::complete, 0, 2.0, 1.0) == 0.0);
    CHECK(cache.expected_load(Strategy::full_dynamic(), Regime::complete, 7, 2.7, 2.0) == 1.0);

    // uniform complete C=1: load is 1 - e^{-q*} at the revenue-optimal q*
    const auto& plan = cache.uniform_plan(Regime::complete, 1, 2.0, 1.5);
    CHECK(cache.expected_load(Strategy::uniform(), Regime::complete, 1, 2.0, 1.5) ==
          doctest::Approx(-std::expm1(-plan.q_star)).epsilon(1e-9));
}

// ------------------------------------------------------- revenue assembly --

namespace {

TrainInstance toy_train(std::int64_t id, const std::string& cell, int capacity) {
    TrainInstance t;
    t.id = id;
    t.route = "r";
    t.cell = cell;
    t.capacity = capacity;
    t.cities_a = {{"a1", {1.0, 0.0}}, {"a2", {0.5, 1.0}}};
    t.cities_b = {{"b1", {2.0, 0.5}}};
    t.prices_a = {0.4, 0.5};
    t.prices_b = {0.7, 0.9};
    return t;
}

} // namespace

TEST_CASE("revenue interval: three-train fixture equals direct arithmetic") {
    DemandPrimitives theta;
    theta.epsilon = 3.0;
    theta.beta = {0.3, -0.2};
    theta.lambda_a = 2.0;
    theta.lambda_b = 1.5;

    std::vector<TrainInstance> trains = {toy_train(1, "c1", 3), toy_train(2, "c1", 4),
                                         toy_train(3, "c2", 2)};
    std::map<std::string, CellBounds> bounds;
    bounds["c1"] = {"c1", 0.02, 0.05, Dest::a, 0, 0, true, false};
    bounds["c2"] = {"c2", 0.03, 0.03, Dest::a, 0, 0, true, false};

    AlphaCache cache;
    auto strategy = Strategy::stopping_time();
    std::vector<TrainRevenueDetail> details;
    auto ri = revenue_interval(trains, theta, bounds, strategy, Regime::complete,
                               PreallocRule::optimal, cache, nullptr, &details);
    REQUIRE(details.size() == 3);

    // direct arithmetic: per train, coef = sum_d alpha(C_d) scale_d^{1/eps},
    // endpoints coef * g^{1/eps} averaged over trains
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < trains.size(); ++i) {
        const auto& t = trains[i];
        double sa = t.covariate_scale(Dest::a, theta.beta);
        double sb = t.covariate_scale(Dest::b, theta.beta);
        double coef =
            cache.alpha(strategy, Regime::complete, details[i].seats_a, theta.epsilon,
                        theta.lambda_a) *
                std::pow(sa, 1.0 / theta.epsilon) +
            cache.alpha(strategy, Regime::complete, details[i].seats_b, theta.epsilon,
                        theta.lambda_b) *
                std::pow(sb, 1.0 / theta.epsilon);
        const auto& b = bounds.at(t.cell);
        lo += coef * std::pow(b.g_lower, 1.0 / theta.epsilon);
        hi += coef * std::pow(b.g_upper, 1.0 / theta.epsilon);
    }
    lo /= 3.0;
    hi /= 3.0;
    CHECK(ri.lower == doctest::Approx(lo).epsilon(1e-10));
    CHECK(ri.upper == doctest::Approx(hi).epsilon(1e-10));

    SUBCASE("degenerate interval collapses") {
        bounds["c1"].g_upper = bounds["c1"].g_lower;
        auto pt = revenue_interval(trains, theta, bounds, strategy, Regime::complete,
                                   PreallocRule::optimal, cache);
        CHECK(pt.lower == doctest::Approx(pt.upper).epsilon(1e-12));
    }

    SUBCASE("homogeneity: scaling g scales both endpoints by s^(1/eps)") {
        double s = 3.7;
        for (auto& [cell, b] : bounds) {
            b.g_lower *= s;
            b.g_upper *= s;
        }
        auto scaled = revenue_interval(trains, theta, bounds, strategy, Regime::complete,
                                       PreallocRule::optimal, cache);
        double factor = std::pow(s, 1.0 / theta.epsilon);
        CHECK(scaled.lower == doctest::Approx(ri.lower * factor).epsilon(1e-9));
        CHECK(scaled.upper == doctest::Approx(ri.upper * factor).epsilon(1e-9));
    }
}

TEST_CASE("ratio interval") {
    double eps = 3.0;
    std::map<std::string, CellBounds> bounds;
    bounds["c1"] = {"c1", 0.01, 0.04, Dest::a, 0, 0, true, false};
    bounds["c2"] = {"c2", 0.02, 0.09, Dest::a, 0, 0, true, false};

    SUBCASE("proportional factors collapse to the constant") {
        std::vector<RatioFactors> f = {{3.0, 1.5, "c1"}, {5.0, 2.5, "c2"}, {1.0, 0.5, "c1"}};
        auto [lo, hi] = ratio_interval(f, bounds, eps);
        CHECK(lo == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(hi == doctest::Approx(2.0).epsilon(1e-9));
    }

    SUBCASE("point bounds give a point ratio") {
        for (auto& [cell, b] : bounds) b.g_upper = b.g_lower;
        std::vector<RatioFactors> f = {{3.0, 1.0, "c1"}, {2.0, 4.0, "c2"}};
        double w1 = std::pow(bounds["c1"].g_lower, 1.0 / eps);
        double w2 = std::pow(bounds["c2"].g_lower, 1.0 / eps);
        double expect = (3.0 * w1 + 2.0 * w2) / (1.0 * w1 + 4.0 * w2);
        auto [lo, hi] = ratio_interval(f, bounds, eps);
        CHECK(lo == doctest::Approx(expect).epsilon(1e-9));
        CHECK(hi == doctest::Approx(expect).epsilon(1e-9));
    }

    SUBCASE("eight-train corner enumeration") {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> uf(0.2, 3.0);
        std::vector<RatioFactors> f;
        std::map<std::string, CellBounds> cb;
        for (int i = 0; i < 8; ++i) {
            std::string cell = "t" + std::to_string(i);
            f.push_back({uf(rng), uf(rng), cell});
            double lo = 0.01 * uf(rng);
            cb[cell] = {cell, lo, lo * (1.0 + uf(rng)), Dest::a, 0, 0, true, false};
        }
        double blo = 1e300, bhi = -1e300;
        for (int mask = 0; mask < 256; ++mask) {
            double num = 0.0, den = 0.0;
            for (int i = 0; i < 8; ++i) {
                const auto& b = cb.at(f[i].cell);
                double g = (mask >> i) & 1 ? b.g_upper : b.g_lower;
                double w = std::pow(g, 1.0 / eps);
                num += f[i].f1 * w;
                den += f[i].f2 * w;
            }
            blo = std::min(blo, num / den);
            bhi = std::max(bhi, num / den);
        }
        auto [lo, hi] = ratio_interval(f, cb, eps);
        CHECK(lo == doctest::Approx(blo).epsilon(1e-6));
        CHECK(hi == doctest::Approx(bhi).epsilon(1e-6));
    }
}
