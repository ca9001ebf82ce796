#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rm/panel.hpp"

namespace rm {

struct LogitOptions {
    bool multi_city = false;  // multinomial likelihood over cities
    int split_class = -1;     // S >= 0 splits the elasticity at class S (0-based)
    double grad_tol = 1e-8;
    int max_iter = 200;
};

/** Fixed-effect logit of the per-seat destination choice: within train T and
 * class k, a sold seat goes to destination b with probability
 * Lambda(a_T - eps * ln(p_bk / p_ak)).  The fixed effects are concentrated
 * out train by train. */
struct LogitFit {
    double epsilon = 0.0;
    double epsilon_early = 0.0, epsilon_late = 0.0;
    bool split = false;
    std::map<std::int64_t, double> fixed_effects;  // ln(xi_b / xi_a), two-sided trains only
    std::map<std::int64_t, double> fe_variance;    // inverse per-train information at the MLE
    int dropped_one_sided = 0;
    double loglik = 0.0;
    double grad_norm = 0.0;
    bool converged = false;
};

LogitFit fit_conditional_logit(const std::vector<TrainView>& trains, const LogitOptions& opt = {});

/** Nonlinear least squares of the fixed effects on the aggregated-cities log
 * ratio ln[sum_{c in b} exp(X_c' beta) / sum_{c in a} exp(X_c' beta)].
 * A free destination intercept absorbs the mean of ln(eta_b / eta_a) so beta
 * stays unbiased; the reported residuals add the intercept back, making them
 * estimates of the uncentered log shock ratio. */
struct DestEffectsFit {
    std::vector<double> beta;
    double intercept = 0.0;  // destination-b constant (gamma scale normalized to 1)
    std::map<std::int64_t, double> residuals;  // intercept + fitting residual
    double r_squared = 0.0;
    bool converged = false;
    int iterations = 0;
};

DestEffectsFit fit_destination_effects(const LogitFit& fit, const std::vector<TrainView>& trains,
                                       const std::map<std::string, CityCovariates>& covariates);

/// MLE of the gamma shapes from log demand-shock ratios; the ratio of two
/// independent gammas is beta prime, so y = ln(eta_b/eta_a) has density
/// exp(lambda_b y) (1+e^y)^{-(lambda_a+lambda_b)} / B(lambda_a, lambda_b).
struct GammaFit {
    double lambda_a = 0.0, lambda_b = 0.0;
    double loglik = 0.0;
    bool converged = false;
};

GammaFit fit_gamma_ratio(const std::vector<double>& log_ratios);

/** Specification test on equal-price trains: within-train OLS of the
 * destination-b share on fare-class dummies, joint Wald test that the
 * dummies are zero.  from/to restrict the tested class range (0-based,
 * inclusive); defaults test every non-baseline class. */
struct SeparabilityResult {
    std::vector<int> classes;           // tested classes
    std::vector<double> coefficients;   // per tested class
    double wald_stat = 0.0;
    double p_value = 1.0;
    int df = 0;
    int n_obs = 0;
};

SeparabilityResult separability_test(const std::vector<TrainView>& trains, int from_class = -1,
                                     int to_class = -1);

/// Aggregation levels for the bias demonstration regressions.
enum class AggregationLevel { train_dest, train, week_route, month_route };

struct AggregateElasticity {
    double elasticity = 0.0;  // log-log price coefficient
    int n_obs = 0;
};

AggregateElasticity aggregate_and_regress(const SalesPanel& panel, AggregationLevel level);

// ------------------------------------------------------------- full chain --

struct ThreeStageFit {
    LogitFit logit;
    DestEffectsFit dest;
    GammaFit gamma;
};

ThreeStageFit fit_three_stage(const SalesPanel& panel, const LogitOptions& opt = {});

/// Train-resampling bootstrap over the full three-stage chain.
struct BootstrapSEs {
    double se_epsilon = 0.0;
    std::vector<double> se_beta;
    double se_lambda_a = 0.0, se_lambda_b = 0.0;
    int n_resamples = 0;
};

BootstrapSEs bootstrap_three_stage(const SalesPanel& panel, int n_resamples, std::uint64_t seed,
                                   const LogitOptions& opt = {});

} // namespace rm
