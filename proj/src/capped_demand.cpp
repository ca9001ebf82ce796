#include "rm/capped_demand.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss.hpp>

namespace rm {

namespace {
void check_qc(double q, int C) {
    if (!(q >= 0.0)) throw std::domain_error("expected_capped_demand: q must be >= 0");
    if (C < 0) throw std::domain_error("expected_capped_demand: C must be >= 0");
}
} // namespace

std::vector<double> expected_capped_demand_table(double q, int C) {
    check_qc(q, C);
    std::vector<double> f(std::size_t(C) + 1, 0.0);
    if (q == 0.0 || C == 0) return f;
    // survival[c] = P(D > c); f[c+1] = f[c] + survival[c]
    double pmf = std::exp(-q);     // P(D = 0)
    double surv = 1.0 - pmf;       // P(D > 0)
    f[1] = surv;
    for (int c = 1; c < C; ++c) {
        pmf *= q / double(c);      // P(D = c)
        surv -= pmf;
        if (surv < 0.0) surv = 0.0;
        f[std::size_t(c) + 1] = f[std::size_t(c)] + surv;
    }
    return f;
}

double expected_capped_demand(double q, int C) {
    return expected_capped_demand_table(q, C).back();
}

std::vector<double> expected_capped_demand_gamma_table(double q, int C, double lambda) {
    check_qc(q, C);
    if (!(lambda > 0.0)) throw std::domain_error("expected_capped_demand_gamma: lambda must be > 0");
    std::vector<double> f(std::size_t(C) + 1, 0.0);
    if (q == 0.0 || C == 0) return f;
    // Negative binomial: P(N=0) = (1+q)^(-lambda), P(N=n)/P(N=n-1) = (lambda+n-1)/n * q/(1+q).
    double ratio = q / (1.0 + q);
    double pmf = std::pow(1.0 + q, -lambda);
    double surv = 1.0 - pmf;
    f[1] = surv;
    for (int c = 1; c < C; ++c) {
        pmf *= (lambda + double(c - 1)) / double(c) * ratio;
        surv -= pmf;
        if (surv < 0.0) surv = 0.0;
        f[std::size_t(c) + 1] = f[std::size_t(c)] + surv;
    }
    return f;
}

double expected_capped_demand_gamma(double q, int C, double lambda) {
    return expected_capped_demand_gamma_table(q, C, lambda).back();
}

double expected_capped_demand_gamma_quadrature(double q, int C, double lambda) {
    check_qc(q, C);
    if (!(lambda > 0.0)) throw std::domain_error("gamma quadrature: lambda must be > 0");
    if (q == 0.0 || C == 0) return 0.0;
    boost::math::gamma_distribution<double> g(lambda, 1.0);
    auto f = [&](double u) {
        double z = boost::math::quantile(g, u);
        return expected_capped_demand(q * z, C);
    };
    // composite rule on panels graded toward both endpoints: the quantile
    // substitution is steep there (singular for lambda < 1), so uniform
    // panels stall around 1e-4 relative accuracy
    std::vector<double> cuts = {0.0};
    for (int j = 14; j >= 1; --j) cuts.push_back(0.5 * std::pow(0.25, j));
    cuts.push_back(0.5);
    for (int j = 1; j <= 14; ++j) cuts.push_back(1.0 - 0.5 * std::pow(0.25, j));
    cuts.push_back(1.0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += boost::math::quadrature::gauss<double, 64>::integrate(f, cuts[i], cuts[i + 1]);
    return total;
}

} // namespace rm
