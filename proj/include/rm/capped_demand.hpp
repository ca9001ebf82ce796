#pragma once
#include <vector>

namespace rm {

/// E[D(q) ^ C] for D(q) ~ Poisson(q), exact via pmf partial sums.
double expected_capped_demand(double q, int C);

/** E over z ~ Gamma(lambda,1) of E[D(qz) ^ C].  The mixture D(qz) is
 * negative binomial with size lambda and success probability 1/(1+q), so the
 * value is exact (no simulation or quadrature). */
double expected_capped_demand_gamma(double q, int C, double lambda);

/** Prefix table f[c] = E[D ^ c] for c = 0..C in one pass, using
 * E[D ^ (c+1)] - E[D ^ c] = P(D > c).  Poisson and gamma-mixed variants. */
std::vector<double> expected_capped_demand_table(double q, int C);
std::vector<double> expected_capped_demand_gamma_table(double q, int C, double lambda);

/// Quadrature cross-check of the gamma mixture (64-node, gamma-quantile substitution).
double expected_capped_demand_gamma_quadrature(double q, int C, double lambda);

} // namespace rm
