#include "rm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "rm/numeric.hpp"
#include "rm/rng.hpp"

namespace rm {

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// Per-train data entering the logit: one row per fare class with sales.
struct LogitTrain {
    std::int64_t id = 0;
    std::vector<double> x;       // ln(p_b / p_a)
    std::vector<int> early;      // 1 when class <= split S
    std::vector<int> nb, n;
    double fe = 0.0;
};

// Newton solve of the concentrated fixed effect given the elasticities.
void solve_fe(LogitTrain& t, double e_early, double e_late) {
    int tb = 0, tn = 0;
    for (std::size_t k = 0; k < t.n.size(); ++k) {
        tb += t.nb[k];
        tn += t.n[k];
    }
    auto resid = [&](double a) {
        double g = 0.0;
        for (std::size_t k = 0; k < t.n.size(); ++k) {
            double e = t.early[k] ? e_early : e_late;
            g += t.nb[k] - t.n[k] * logistic(a - e * t.x[k]);
        }
        return g;
    };
    // resid is strictly decreasing in a, from tb > 0 to tb - tn < 0.  Bracket
    // around the pooled-share start, then safeguarded Newton inside it;
    // unguarded Newton overshoots once the logistic saturates.
    double a = std::log((tb + 0.5) / (tn - tb + 0.5));
    double xmin = t.x[0], xmax = t.x[0];
    for (double x : t.x) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    double emax = std::max(std::abs(e_early), std::abs(e_late));
    double pad = emax * std::max(std::abs(xmin), std::abs(xmax)) + 1.0;
    double lo = a - pad, hi = a + pad;
    while (resid(lo) <= 0.0) lo -= pad;
    while (resid(hi) >= 0.0) hi += pad;
    a = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double g = 0.0, h = 0.0;
        for (std::size_t k = 0; k < t.n.size(); ++k) {
            double e = t.early[k] ? e_early : e_late;
            double lam = logistic(a - e * t.x[k]);
            g += t.nb[k] - t.n[k] * lam;
            h += t.n[k] * lam * (1.0 - lam);
        }
        (g > 0.0 ? lo : hi) = a;
        double next = h > 0.0 ? a + g / h : a;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - a) < 1e-13 * (1.0 + std::abs(a))) {
            a = next;
            break;
        }
        a = next;
    }
    t.fe = a;
}

// Profile log-likelihood and its gradient in the elasticities (envelope
// theorem: the FE terms drop out at the concentrated optimum).
struct ProfileEval {
    double loglik = 0.0;
    double g_early = 0.0, g_late = 0.0;
};

ProfileEval profile_eval(std::vector<LogitTrain>& trains, double e_early, double e_late) {
    ProfileEval out;
    for (auto& t : trains) {
        solve_fe(t, e_early, e_late);
        for (std::size_t k = 0; k < t.n.size(); ++k) {
            double e = t.early[k] ? e_early : e_late;
            double lam = logistic(t.fe - e * t.x[k]);
            double lo = std::clamp(lam, 1e-300, 1.0 - 1e-16);
            out.loglik += t.nb[k] * std::log(lo) + (t.n[k] - t.nb[k]) * std::log1p(-lo);
            double dg = (t.n[k] * lam - t.nb[k]) * t.x[k];
            (t.early[k] ? out.g_early : out.g_late) += dg;
        }
    }
    return out;
}

} // namespace

LogitFit fit_conditional_logit(const std::vector<TrainView>& views, const LogitOptions& opt) {
    LogitFit fit;
    fit.split = opt.split_class >= 0;

    std::vector<LogitTrain> data;
    bool any_variation = false;
    double multi_city_const = 0.0;
    std::map<std::string, long long> city_totals;
    if (opt.multi_city)
        for (const auto& tv : views)
            for (const auto& [city, cs] : tv.city_sales)
                for (int v : cs.second) city_totals[city] += v;

    for (const auto& tv : views) {
        if (tv.price_a.size() != tv.price_b.size())
            throw std::invalid_argument("fit_conditional_logit: misaligned price grids");
        LogitTrain t;
        t.id = tv.id;
        int ta = 0, tb = 0;
        for (std::size_t k = 0; k < tv.price_a.size(); ++k) {
            int n = tv.n_a[k] + tv.n_b[k];
            if (n == 0) continue;
            if (!(tv.price_a[k] > 0.0) || !(tv.price_b[k] > 0.0))
                throw std::invalid_argument("fit_conditional_logit: non-positive price with sales");
            if (opt.split_class >= 0 && std::size_t(opt.split_class) >= tv.price_a.size())
                throw std::invalid_argument("fit_conditional_logit: split class out of range");
            t.x.push_back(std::log(tv.price_b[k] / tv.price_a[k]));
            t.early.push_back(opt.split_class < 0 || int(k) <= opt.split_class ? 1 : 0);
            t.nb.push_back(tv.n_b[k]);
            t.n.push_back(n);
            ta += tv.n_a[k];
            tb += tv.n_b[k];
        }
        if (t.n.empty()) continue;
        if (ta == 0 || tb == 0) {
            ++fit.dropped_one_sided;
            continue;
        }
        for (std::size_t k = 1; k < t.x.size(); ++k)
            if (std::abs(t.x[k] - t.x[0]) > 1e-12) any_variation = true;
        if (opt.split_class >= 0) {
            // The split elasticities additionally need within-group variation
            // relative to the fixed effect; handled by the same check below.
        }
        data.push_back(std::move(t));

        if (opt.multi_city) {
            // Conditional on group totals, the within-group city split does
            // not involve the elasticity or the fixed effect; its maximized
            // multinomial term only shifts the reported log-likelihood.
            for (std::size_t k = 0; k < tv.price_a.size(); ++k) {
                double denom_a = 0.0, denom_b = 0.0;
                for (const auto& [city, cs] : tv.city_sales)
                    (cs.first == Dest::a ? denom_a : denom_b) += double(city_totals.at(city));
                for (const auto& [city, cs] : tv.city_sales) {
                    int nck = k < cs.second.size() ? cs.second[k] : 0;
                    if (nck == 0) continue;
                    double denom = cs.first == Dest::a ? denom_a : denom_b;
                    double w = double(city_totals.at(city));
                    if (w > 0.0 && denom > 0.0)
                        multi_city_const += double(nck) * std::log(w / denom);
                }
            }
        }
    }

    if (data.empty()) throw std::invalid_argument("fit_conditional_logit: no two-sided trains");
    if (!any_variation)
        throw std::invalid_argument(
            "fit_conditional_logit: relative prices constant within every train; "
            "elasticity not identified");

    // Outer solve: the profile likelihood is concave, so each elasticity is
    // the root of a decreasing gradient; coordinate bisection converges.
    auto grad_root = [&](bool early_coord, double other, double lo, double hi) {
        auto g = [&](double e) {
            auto ev = early_coord ? profile_eval(data, e, other) : profile_eval(data, other, e);
            return early_coord ? ev.g_early : ev.g_late;
        };
        double glo = g(lo);
        int guard = 0;
        while (glo < 0.0 && lo > 1e-9 && guard++ < 60) {
            lo *= 0.25;
            glo = g(lo);
        }
        double ghi = g(hi);
        guard = 0;
        while (ghi > 0.0 && hi < 1e7 && guard++ < 60) {
            hi *= 2.0;
            ghi = g(hi);
        }
        if ((glo > 0) == (ghi > 0))
            throw std::runtime_error("fit_conditional_logit: elasticity not identified (no "
                                     "gradient sign change)");
        return bisect(g, lo, hi, {1e-11, 300});
    };

    if (opt.split_class < 0) {
        double e = grad_root(true, 0.0, 1e-3, 64.0);
        fit.epsilon = fit.epsilon_early = fit.epsilon_late = e;
        auto ev = profile_eval(data, e, e);
        fit.loglik = ev.loglik + multi_city_const;
        fit.grad_norm = std::abs(ev.g_early + ev.g_late);
        fit.converged = fit.grad_norm < opt.grad_tol * (1.0 + std::abs(fit.loglik));
    } else {
        double ee = 4.0, el = 4.0;
        for (int sweep = 0; sweep < opt.max_iter; ++sweep) {
            double ee_new = grad_root(true, el, 1e-3, 64.0);
            double el_new = grad_root(false, ee_new, 1e-3, 64.0);
            double move = std::abs(ee_new - ee) + std::abs(el_new - el);
            ee = ee_new;
            el = el_new;
            if (move < 1e-10) break;
        }
        fit.epsilon_early = ee;
        fit.epsilon_late = el;
        fit.epsilon = ee;
        auto ev = profile_eval(data, ee, el);
        fit.loglik = ev.loglik + multi_city_const;
        fit.grad_norm = std::hypot(ev.g_early, ev.g_late);
        fit.converged = fit.grad_norm < opt.grad_tol * (1.0 + std::abs(fit.loglik));
    }
    for (const auto& t : data) {
        fit.fixed_effects.emplace(t.id, t.fe);
        double info = 0.0;
        for (std::size_t k = 0; k < t.n.size(); ++k) {
            double e = t.early[k] ? fit.epsilon_early : fit.epsilon_late;
            double lam = logistic(t.fe - e * t.x[k]);
            info += t.n[k] * lam * (1.0 - lam);
        }
        fit.fe_variance.emplace(t.id, info > 0.0 ? 1.0 / info : 0.0);
    }
    return fit;
}

// ------------------------------------------------- destination effects NLS --

namespace {

// ln sum_c exp(X_c' beta) and its softmax-weighted gradient.
double log_sum_scale(const std::vector<std::vector<double>>& X, const Eigen::VectorXd& beta,
                     Eigen::VectorXd* grad) {
    double mx = -1e300;
    std::vector<double> u(X.size());
    for (std::size_t c = 0; c < X.size(); ++c) {
        double v = 0.0;
        for (std::size_t j = 0; j < X[c].size(); ++j) v += X[c][j] * beta[long(j)];
        u[c] = v;
        mx = std::max(mx, v);
    }
    double s = 0.0;
    for (double v : u) s += std::exp(v - mx);
    if (grad) {
        grad->setZero();
        for (std::size_t c = 0; c < X.size(); ++c) {
            double w = std::exp(u[c] - mx) / s;
            for (std::size_t j = 0; j < X[c].size(); ++j) (*grad)[long(j)] += w * X[c][j];
        }
    }
    return mx + std::log(s);
}

} // namespace

DestEffectsFit fit_destination_effects(const LogitFit& fit, const std::vector<TrainView>& trains,
                                       const std::map<std::string, CityCovariates>& covariates) {
    struct Obs {
        std::int64_t id;
        double fe;
        std::vector<std::vector<double>> Xa, Xb;
    };
    std::vector<Obs> obs;
    std::set<std::string> seen_cities;
    std::vector<std::vector<double>> city_rows;
    for (const auto& tv : trains) {
        auto it = fit.fixed_effects.find(tv.id);
        if (it == fit.fixed_effects.end()) continue;
        Obs o;
        o.id = tv.id;
        o.fe = it->second;
        for (const auto& [city, cs] : tv.city_sales) {
            auto cv = covariates.find(city);
            if (cv == covariates.end())
                throw std::invalid_argument("fit_destination_effects: no covariates for city '" +
                                            city + "'");
            auto row = cv->second.design_row();
            // trailing column: destination-b intercept
            row.push_back(cs.first == Dest::b ? 1.0 : 0.0);
            if (seen_cities.insert(city).second) city_rows.push_back(row);
            (cs.first == Dest::a ? o.Xa : o.Xb).push_back(std::move(row));
        }
        if (o.Xa.empty() || o.Xb.empty())
            throw std::invalid_argument("fit_destination_effects: train " + std::to_string(tv.id) +
                                        " lacks cities on one side");
        obs.push_back(std::move(o));
    }
    if (obs.empty()) throw std::invalid_argument("fit_destination_effects: no usable trains");
    const long p = long(city_rows.front().size());  // covariates plus the intercept column

    {
        Eigen::MatrixXd D(long(city_rows.size()), p);
        for (std::size_t i = 0; i < city_rows.size(); ++i)
            for (long j = 0; j < p; ++j) D(long(i), j) = city_rows[i][std::size_t(j)];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
        if (qr.rank() < p) {
            std::string msg = "fit_destination_effects: rank-deficient design; dependent columns:";
            for (long j = long(qr.rank()); j < p; ++j)
                msg += " " + std::to_string(qr.colsPermutation().indices()[j]);
            throw std::invalid_argument(msg);
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    auto residuals_and_jac = [&](const Eigen::VectorXd& b, Eigen::VectorXd& r,
                                 Eigen::MatrixXd* J) {
        Eigen::VectorXd ga(p), gb(p);
        for (std::size_t i = 0; i < obs.size(); ++i) {
            double fb = log_sum_scale(obs[i].Xb, b, J ? &gb : nullptr);
            double fa = log_sum_scale(obs[i].Xa, b, J ? &ga : nullptr);
            r[long(i)] = obs[i].fe - (fb - fa);
            if (J) J->row(long(i)) = (gb - ga).transpose();  // d(model)/d(beta)
        }
    };

    Eigen::VectorXd r(long(obs.size()));
    Eigen::MatrixXd J(long(obs.size()), p);
    residuals_and_jac(beta, r, &J);
    double ssr = r.squaredNorm();
    double mu = 1e-6;
    DestEffectsFit out;
    for (int it = 0; it < 200; ++it) {
        ++out.iterations;
        Eigen::MatrixXd H = J.transpose() * J;
        H.diagonal().array() += mu;
        Eigen::VectorXd delta = H.ldlt().solve(J.transpose() * r);
        Eigen::VectorXd cand = beta + delta;
        Eigen::VectorXd rc(long(obs.size()));
        residuals_and_jac(cand, rc, nullptr);
        double ssr_c = rc.squaredNorm();
        if (ssr_c <= ssr) {
            beta = cand;
            r = rc;
            mu = std::max(mu * 0.3, 1e-12);
            bool done = delta.norm() < 1e-10 * (1.0 + beta.norm()) ||
                        std::abs(ssr - ssr_c) < 1e-14 * (1.0 + ssr);
            ssr = ssr_c;
            residuals_and_jac(beta, r, &J);
            if (done) {
                out.converged = true;
                break;
            }
        } else {
            mu *= 10.0;
            if (mu > 1e12) break;
        }
    }

    out.beta.assign(beta.data(), beta.data() + (p - 1));
    out.intercept = beta[p - 1];
    double mean_fe = 0.0;
    for (const auto& o : obs) mean_fe += o.fe;
    mean_fe /= double(obs.size());
    double sst = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        // add the intercept back: the residual then estimates ln(eta_b/eta_a)
        out.residuals.emplace(obs[i].id, r[long(i)] + out.intercept);
        sst += (obs[i].fe - mean_fe) * (obs[i].fe - mean_fe);
    }
    out.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    return out;
}

// ----------------------------------------------------------- gamma shapes --

GammaFit fit_gamma_ratio(const std::vector<double>& y) {
    if (y.size() < 10) throw std::invalid_argument("fit_gamma_ratio: need at least 10 ratios");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("fit_gamma_ratio: non-finite input");
    const double n = double(y.size());
    double s_neg = 0.0, s_pos = 0.0;  // sums of ln(1+e^y) and ln(1+e^{-y})
    for (double v : y) {
        double sp = v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        s_neg += sp;        // ln(1+e^y)
        s_pos += sp - v;    // ln(1+e^{-y})
    }

    auto loglik = [&](double la, double lb) {
        return -lb * s_pos - la * s_neg +
               n * (std::lgamma(la + lb) - std::lgamma(la) - std::lgamma(lb));
    };
    // gradient: d/dla = -s_neg + n[psi(la+lb) - psi(la)]
    //           d/dlb = -s_pos + n[psi(la+lb) - psi(lb)]
    double la = 1.0, lb = 1.0;
    GammaFit out;
    using boost::math::digamma;
    using boost::math::trigamma;
    bool ok = false;
    for (int it = 0; it < 500; ++it) {
        double psis = digamma(la + lb);
        double ga = -s_neg + n * (psis - digamma(la));
        double gb = -s_pos + n * (psis - digamma(lb));
        double tps = trigamma(la + lb);
        double haa = n * (tps - trigamma(la));
        double hbb = n * (tps - trigamma(lb));
        double hab = n * tps;
        double det = haa * hbb - hab * hab;
        if (std::abs(det) < 1e-300) break;
        double da = -(hbb * ga - hab * gb) / det;
        double db = -(haa * gb - hab * ga) / det;
        double step = 1.0;
        while ((la + step * da <= 0.0 || lb + step * db <= 0.0) && step > 1e-12) step *= 0.5;
        double base = loglik(la, lb);
        while (step > 1e-12 && loglik(la + step * da, lb + step * db) < base) step *= 0.5;
        la += step * da;
        lb += step * db;
        if (la > 1e8 || lb > 1e8) break;  // degenerate sample: MLE diverges
        if (std::hypot(ga, gb) < 1e-8 * n) {
            ok = true;
            break;
        }
    }
    out.lambda_a = la;
    out.lambda_b = lb;
    out.loglik = loglik(la, lb);
    out.converged = ok && la < 1e6 && lb < 1e6;
    return out;
}

// ------------------------------------------------------ separability test --

SeparabilityResult separability_test(const std::vector<TrainView>& trains, int from_class,
                                     int to_class) {
    struct Row {
        std::size_t train;
        int k;
        double y;
    };
    std::vector<Row> rows;
    std::set<int> classes_seen;
    std::size_t ti = 0;
    for (const auto& tv : trains) {
        for (std::size_t k = 0; k < tv.price_a.size(); ++k)
            if (std::abs(tv.price_a[k] - tv.price_b[k]) > 1e-9 * std::max(tv.price_a[k], 1.0))
                throw std::invalid_argument(
                    "separability_test: requires equal prices across destinations");
        bool used = false;
        for (std::size_t k = 0; k < tv.price_a.size(); ++k) {
            int nk = tv.n_a[k] + tv.n_b[k];
            if (nk == 0) continue;
            rows.push_back({ti, int(k), double(tv.n_b[k]) / double(nk)});
            classes_seen.insert(int(k));
            used = true;
        }
        if (used) ++ti;
    }
    if (classes_seen.size() < 2)
        throw std::invalid_argument("separability_test: fewer than 2 classes with sales");

    const int base = *classes_seen.begin();
    std::vector<int> dummy_classes(classes_seen.begin(), classes_seen.end());
    dummy_classes.erase(dummy_classes.begin());  // baseline class omitted
    std::map<int, long> col_of;
    for (std::size_t j = 0; j < dummy_classes.size(); ++j) col_of[dummy_classes[j]] = long(j);
    const long p = long(dummy_classes.size());
    const long nobs = long(rows.size());
    const long T = long(ti);

    // Within-train demeaning of y and of every class dummy.
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(nobs, p);
    Eigen::VectorXd yv(nobs);
    std::vector<double> ymean(std::size_t(T), 0.0);
    std::vector<Eigen::VectorXd> xmean(std::size_t(T), Eigen::VectorXd::Zero(p));
    std::vector<int> cnt(std::size_t(T), 0);
    for (long i = 0; i < nobs; ++i) {
        const Row& rr = rows[std::size_t(i)];
        yv[i] = rr.y;
        if (rr.k != base) X(i, col_of[rr.k]) = 1.0;
        ymean[rr.train] += rr.y;
        xmean[rr.train] += X.row(i).transpose();
        cnt[rr.train] += 1;
    }
    for (std::size_t t = 0; t < std::size_t(T); ++t) {
        ymean[t] /= double(cnt[t]);
        xmean[t] /= double(cnt[t]);
    }
    for (long i = 0; i < nobs; ++i) {
        const Row& rr = rows[std::size_t(i)];
        yv[i] -= ymean[rr.train];
        X.row(i) -= xmean[rr.train].transpose();
    }

    Eigen::MatrixXd XtX = X.transpose() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(XtX);
    Eigen::VectorXd coef = ldlt.solve(X.transpose() * yv);
    Eigen::VectorXd resid = yv - X * coef;
    long dof = nobs - T - p;
    if (dof < 1) throw std::invalid_argument("separability_test: not enough observations");
    double sigma2 = resid.squaredNorm() / double(dof);

    // Tested sub-range of classes (inclusive); default: all dummies.
    std::vector<long> test_cols;
    for (std::size_t j = 0; j < dummy_classes.size(); ++j) {
        int k = dummy_classes[j];
        if (from_class >= 0 && k < from_class) continue;
        if (to_class >= 0 && k > to_class) continue;
        test_cols.push_back(long(j));
    }
    if (test_cols.empty())
        throw std::invalid_argument("separability_test: empty tested class range");

    Eigen::MatrixXd cov = sigma2 * XtX.inverse();
    Eigen::VectorXd c(long(test_cols.size()));
    Eigen::MatrixXd V(long(test_cols.size()), long(test_cols.size()));
    for (std::size_t i = 0; i < test_cols.size(); ++i) {
        c[long(i)] = coef[test_cols[i]];
        for (std::size_t j = 0; j < test_cols.size(); ++j)
            V(long(i), long(j)) = cov(test_cols[i], test_cols[j]);
    }
    double wald = c.dot(V.ldlt().solve(c));

    SeparabilityResult out;
    out.classes = dummy_classes;
    out.coefficients.assign(coef.data(), coef.data() + p);
    out.wald_stat = wald;
    out.df = int(test_cols.size());
    out.n_obs = int(nobs);
    boost::math::chi_squared chi(double(out.df));
    out.p_value = wald > 0.0 ? 1.0 - boost::math::cdf(chi, wald) : 1.0;
    return out;
}

// --------------------------------------------------- aggregation-bias demo --

namespace {

int month_of(const std::string& date) {
    if (date.size() < 7) throw std::invalid_argument("bad date: " + date);
    return std::stoi(date.substr(5, 2));
}

int week_of(const std::string& date) {
    static const int cum[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    if (date.size() < 10) throw std::invalid_argument("bad date: " + date);
    int m = std::stoi(date.substr(5, 2));
    int d = std::stoi(date.substr(8, 2));
    return (cum[m - 1] + d - 1) / 7;
}

} // namespace

AggregateElasticity aggregate_and_regress(const SalesPanel& panel, AggregationLevel level) {
    struct Cell {
        double q = 0.0, pq = 0.0;
        std::string route;
    };
    std::map<std::string, Cell> cells;
    for (const auto& r : panel.records) {
        if (r.n_sold <= 0) continue;
        std::string key;
        switch (level) {
            case AggregationLevel::train_dest:
                key = std::to_string(r.train_id) + "|" + dest_name(r.dest_group);
                break;
            case AggregationLevel::train:
                key = std::to_string(r.train_id);
                break;
            case AggregationLevel::week_route:
                key = r.route + "|w" + std::to_string(week_of(r.date));
                break;
            case AggregationLevel::month_route:
                key = r.route + "|m" + std::to_string(month_of(r.date));
                break;
        }
        auto& c = cells[key];
        c.q += double(r.n_sold);
        c.pq += double(r.n_sold) * r.price;
        c.route = r.route;
    }
    if (cells.empty()) throw std::invalid_argument("aggregate_and_regress: no sales");

    // ln q on ln p with route dummies (average price paid as the regressor).
    std::map<std::string, long> route_col;
    for (const auto& [k, c] : cells) route_col.emplace(c.route, 0);
    long rc = 0;
    for (auto& [name, col] : route_col) col = rc++;
    const long n = long(cells.size());
    const long p = 1 + rc;  // ln price + route intercepts
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd yv(n);
    long i = 0;
    for (const auto& [key, c] : cells) {
        double pbar = c.pq / c.q;
        X(i, 0) = std::log(pbar);
        X(i, 1 + route_col[c.route]) = 1.0;
        yv[i] = std::log(c.q);
        ++i;
    }
    double pm = X.col(0).mean();
    double pvar = (X.col(0).array() - pm).square().sum();
    if (pvar < 1e-12)
        throw std::invalid_argument("aggregate_and_regress: no price variation after aggregation");
    Eigen::VectorXd coef = (X.transpose() * X).ldlt().solve(X.transpose() * yv);
    return {coef[0], int(n)};
}

// ------------------------------------------------------------- full chain --

namespace {

// The NLS residuals estimate ln(eta_b / eta_a) plus the sampling noise of the
// per-train fixed effect, whose variance is known from the logit information.
// Shrink the sample toward its mean so its dispersion matches the deconvolved
// one; without this the gamma-shape MLE is biased downward whenever per-train
// sale counts are moderate.
std::vector<double> shock_ratio_sample(const LogitFit& lf, const DestEffectsFit& de) {
    std::vector<double> r;
    double noise = 0.0;
    r.reserve(de.residuals.size());
    for (const auto& [id, v] : de.residuals) {
        r.push_back(v);
        auto it = lf.fe_variance.find(id);
        noise += it != lf.fe_variance.end() ? it->second : 0.0;
    }
    if (r.size() < 2) return r;
    noise /= double(r.size());
    double m = 0.0;
    for (double v : r) m += v;
    m /= double(r.size());
    double s2 = 0.0;
    for (double v : r) s2 += (v - m) * (v - m);
    s2 /= double(r.size() - 1);
    if (s2 <= noise || s2 <= 0.0) return r;  // degenerate sample: leave it alone
    double c = std::sqrt(1.0 - noise / s2);
    for (double& v : r) v = m + c * (v - m);
    return r;
}

} // namespace

ThreeStageFit fit_three_stage(const SalesPanel& panel, const LogitOptions& opt) {
    auto views = build_train_views(panel);
    ThreeStageFit out;
    out.logit = fit_conditional_logit(views, opt);
    out.dest = fit_destination_effects(out.logit, views, panel.covariates);
    out.gamma = fit_gamma_ratio(shock_ratio_sample(out.logit, out.dest));
    return out;
}

BootstrapSEs bootstrap_three_stage(const SalesPanel& panel, int n_resamples, std::uint64_t seed,
                                   const LogitOptions& opt) {
    if (n_resamples < 2) throw std::invalid_argument("bootstrap: need at least 2 resamples");
    auto views = build_train_views(panel);
    const std::size_t N = views.size();
    if (N == 0) throw std::invalid_argument("bootstrap: empty panel");

    std::vector<double> eps, la, lb;
    std::vector<std::vector<double>> betas;
    for (int b = 0; b < n_resamples; ++b) {
        auto rng = make_engine(seed, std::uint64_t(b), 0xb007ULL, 0);
        std::uniform_int_distribution<std::size_t> pick(0, N - 1);
        std::vector<TrainView> sample;
        sample.reserve(N);
        for (std::size_t i = 0; i < N; ++i) {
            TrainView tv = views[pick(rng)];
            tv.id = std::int64_t(i) + 1;  // keep ids unique under resampling
            sample.push_back(std::move(tv));
        }
        try {
            auto lf = fit_conditional_logit(sample, opt);
            auto de = fit_destination_effects(lf, sample, panel.covariates);
            auto gf = fit_gamma_ratio(shock_ratio_sample(lf, de));
            eps.push_back(lf.epsilon);
            betas.push_back(de.beta);
            la.push_back(gf.lambda_a);
            lb.push_back(gf.lambda_b);
        } catch (const std::exception&) {
            // a degenerate resample contributes nothing
        }
    }
    if (eps.size() < 2) throw std::runtime_error("bootstrap: too many degenerate resamples");

    auto sd = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= double(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / double(v.size() - 1));
    };
    BootstrapSEs out;
    out.n_resamples = int(eps.size());
    out.se_epsilon = sd(eps);
    out.se_lambda_a = sd(la);
    out.se_lambda_b = sd(lb);
    const std::size_t p = betas.front().size();
    out.se_beta.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> col;
        col.reserve(betas.size());
        for (const auto& bb : betas) col.push_back(bb[j]);
        out.se_beta[j] = sd(col);
    }
    return out;
}

} // namespace rm
