#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "rm/arrival_shape.hpp"
#include "rm/demand.hpp"

using namespace rm;

TEST_CASE("intensity: unit price and unit shape") {
    ArrivalShape shape(64);
    CHECK(intensity(0.5, 1.0, 1.0, shape, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("intensity: elasticity tail vanishes") {
    ArrivalShape shape(64);
    CHECK(intensity(0.3, 1e12, 5.0, shape, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("intensity: scalar arithmetic oracle") {
    ArrivalShape shape(64);
    double expect = 3.0 * 4.04 * std::pow(2.0, -5.04);
    CHECK(intensity(0.25, 2.0, 3.0, shape, 4.04) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("arrival shape: cumulative mass") {
    ArrivalShape uniform(64);
    CHECK(uniform.cumulative(0.0, 0.3) == doctest::Approx(0.3));
    CHECK(uniform.cumulative(0.7, 0.7) == 0.0);

    auto ramp = ArrivalShape::from_density([](double t) { return 2.0 * t; }, 256);
    CHECK(ramp.cumulative(0.0, 0.5) == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(ramp.cumulative(0.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("arrival shape: quantile inverts the cdf") {
    auto ramp = ArrivalShape::from_density([](double t) { return 0.25 + 1.5 * t; }, 128);
    for (double m : {0.05, 0.3, 0.5, 0.77, 0.99}) {
        double t = ramp.quantile(m);
        CHECK(ramp.cdf(t) == doctest::Approx(m).epsilon(1e-10));
    }
}

TEST_CASE("sample_arrivals: constant price count is Poisson before capping") {
    ArrivalShape shape(64);
    PricePath path;
    path.change_times = {0.0};
    path.price_a = {1.3};
    path.price_b = {2.0};
    path.fare_class = {0};
    DemandDraw draw{8.0, 1.0};
    double eps = 2.0;
    double mean = draw.xi_a * std::pow(path.price_a[0], -eps);

    const int reps = 10000;
    std::map<int, int> hist;
    for (int r = 0; r < reps; ++r) {
        auto ev = sample_arrivals(draw, shape, eps, path, 1000, 1000, 99, r);
        int na = 0;
        for (const auto& e : ev)
            if (e.dest == Dest::a) ++na;
        ++hist[na];
    }

    // chi-square GOF against Poisson(mean), tail cells pooled to keep every
    // expected count above 5
    boost::math::poisson_distribution<double> pois(mean);
    double stat = 0.0;
    int cells = 0;
    double tail_obs = 0.0, tail_exp = 0.0;
    int max_n = hist.rbegin()->first;
    for (int n = 0; n <= max_n; ++n) {
        double expect = reps * boost::math::pdf(pois, n);
        double obs = hist.count(n) ? hist.at(n) : 0.0;
        if (expect < 5.0) {
            tail_obs += obs;
            tail_exp += expect;
            continue;
        }
        stat += (obs - expect) * (obs - expect) / expect;
        ++cells;
    }
    tail_exp += reps * (1.0 - boost::math::cdf(pois, max_n));
    if (tail_exp > 0.0) {
        stat += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
        ++cells;
    }
    boost::math::chi_squared_distribution<double> chi(cells - 1);
    CHECK(stat < boost::math::quantile(chi, 0.99));
}

TEST_CASE("sample_arrivals: zero capacity and determinism") {
    ArrivalShape shape(64);
    PricePath path;
    path.change_times = {0.0, 0.5};
    path.price_a = {1.0, 1.2};
    path.price_b = {1.5, 1.9};
    path.fare_class = {0, 1};
    DemandDraw draw{4.0, 2.0};

    auto none = sample_arrivals(draw, shape, 3.0, path, 0, 0, 7, 1);
    CHECK(none.empty());

    auto e1 = sample_arrivals(draw, shape, 3.0, path, 20, 20, 7, 1);
    auto e2 = sample_arrivals(draw, shape, 3.0, path, 20, 20, 7, 1);
    REQUIRE(e1.size() == e2.size());
    for (std::size_t i = 0; i < e1.size(); ++i) {
        CHECK(e1[i].t == e2[i].t);
        CHECK(e1[i].dest == e2[i].dest);
        CHECK(e1[i].price == e2[i].price);
    }
}

TEST_CASE("microfoundation: elasticity is alpha times the summed Pareto shapes") {
    ModeChoiceParams p;
    p.alpha = 2.0;
    p.delta = {2.0};
    p.a = {1.0};
    p.price_grid = {{1.0}};
    p.kappa_a = 1.0;
    p.kappa_b = 1.0;
    p.lambda_grid = {1.0};
    auto r = microfoundation_intensity(p);
    CHECK(r.epsilon == doctest::Approx(4.0));
}

TEST_CASE("microfoundation: constant search rate and prices give a uniform shape") {
    ModeChoiceParams p;
    p.alpha = 1.5;
    p.delta = {1.0, 0.8};
    p.a = {1.2, 1.1};
    p.price_grid = {{2.0}, {1.4}};
    p.kappa_a = 0.7;
    p.kappa_b = 0.3;
    p.lambda_grid = {3.0};
    auto r = microfoundation_intensity(p);
    for (double t : {0.1, 0.5, 0.9})
        CHECK(r.shape.density(t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("microfoundation: linear competitor price path tilts the shape") {
    // One competitor with alpha * delta = 1 riding a price path 1 + t, plus a
    // constant-price mode keeping the elasticity above one.  The arrival
    // weight is proportional to (1 + t), normalized by its integral 1.5.
    ModeChoiceParams p;
    p.alpha = 1.0;
    p.delta = {1.0, 0.5};
    p.a = {1.0, 1.0};
    std::vector<double> ramp(256);
    for (std::size_t i = 0; i < ramp.size(); ++i)
        ramp[i] = 1.0 + (double(i) + 0.5) / double(ramp.size());
    p.price_grid = {ramp, {1.0}};
    p.kappa_a = 1.0;
    p.kappa_b = 1.0;
    auto r = microfoundation_intensity(p);
    for (double t : {0.25, 0.5, 0.75})
        CHECK(r.shape.density(t) == doctest::Approx((1.0 + t) / 1.5).epsilon(1e-3));
    CHECK(r.epsilon == doctest::Approx(1.5));
}

TEST_CASE("compensating variation") {
    auto cv = compensating_variation(12.21, 13.10);
    CHECK(cv.delta == doctest::Approx(0.068).epsilon(0.01));
    CHECK(cv.compensation_needed);

    CHECK(compensating_variation(4.4, 4.4).delta == 0.0);
    CHECK(compensating_variation(10.0, 20.0).delta == doctest::Approx(0.5));
    CHECK_FALSE(compensating_variation(5.0, 4.0).compensation_needed);
}
