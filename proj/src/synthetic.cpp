#include "rm/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "rm/rng.hpp"

namespace rm {

void SyntheticConfig::validate() const {
    if (n_trains < 0) throw std::invalid_argument("synthetic: negative train count");
    if (n_routes < 1) throw std::invalid_argument("synthetic: need at least one route");
    if (fare_classes < 1) throw std::invalid_argument("synthetic: need at least one fare class");
    if (capacities.empty()) throw std::invalid_argument("synthetic: no capacities");
    for (int c : capacities)
        if (c <= 0) throw std::invalid_argument("synthetic: capacities must be positive");
    if (!(epsilon > 1.0)) throw std::invalid_argument("synthetic: epsilon must exceed 1");
    if (beta.size() != 4) throw std::invalid_argument("synthetic: beta must have 4 entries");
    if (!(lambda_a > 0.0) || !(lambda_b > 0.0))
        throw std::invalid_argument("synthetic: gamma shapes must be positive");
    if (!(target_load > 0.0) || !(target_load <= 1.0))
        throw std::invalid_argument("synthetic: target load must be in (0,1]");
    if (!(peak_share >= 0.0) || !(peak_share <= 1.0))
        throw std::invalid_argument("synthetic: peak share must be in [0,1]");
}

namespace {

struct RouteSpec {
    std::string name;
    int capacity = 0;
    std::vector<CityCovariates> cities_a, cities_b;
    double base_price_a = 0.0, base_price_b = 0.0;
};

// Deterministic city roster: three intermediate (a) cities and two terminal
// (b) cities per route, with covariates spread to keep the design full rank.
std::vector<RouteSpec> make_routes(const SyntheticConfig& cfg) {
    std::vector<RouteSpec> routes(std::size_t(cfg.n_routes));
    for (int r = 0; r < cfg.n_routes; ++r) {
        auto& rs = routes[std::size_t(r)];
        rs.name = "r" + std::to_string(r + 1);
        rs.capacity = cfg.capacities[std::size_t(r) % cfg.capacities.size()];
        for (int j = 0; j < 3; ++j) {
            CityCovariates c;
            c.city = rs.name + "a" + std::to_string(j + 1);
            c.population_millions = 0.3 + 0.25 * double((r * 3 + j) % 7);
            c.regional_capital_flag = j == 0 ? 1 : 0;
            c.travel_time_hours = 1.2 + 0.3 * double((r + 2 * j) % 5);
            rs.cities_a.push_back(std::move(c));
        }
        for (int j = 0; j < 2; ++j) {
            CityCovariates c;
            c.city = rs.name + "b" + std::to_string(j + 1);
            c.population_millions = 0.8 + 0.35 * double((r * 2 + j) % 6);
            c.regional_capital_flag = j == 0 ? 1 : 0;
            c.travel_time_hours = 2.0 + 0.35 * double((r + 3 * j) % 5);
            rs.cities_b.push_back(std::move(c));
        }
        rs.base_price_a = 0.30 + 0.02 * double(r);
        rs.base_price_b = rs.base_price_a * 1.5;
    }
    return routes;
}

double exp_design(const CityCovariates& c, const std::vector<double>& beta) {
    auto x = c.design_row();
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) v += x[j] * beta[j];
    return std::exp(v);
}

std::string date_of(int day_index) {
    static const int days_in[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int d = day_index % 364;
    int m = 0;
    while (d >= days_in[m]) {
        d -= days_in[m];
        ++m;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "2019-%02d-%02d", m + 1, d + 1);
    return buf;
}

} // namespace

SyntheticPanel generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    auto routes = make_routes(cfg);
    const int K = cfg.fare_classes;

    SyntheticPanel out;
    out.truth.epsilon = cfg.epsilon;
    out.truth.beta = cfg.beta;
    out.truth.lambda_a = cfg.lambda_a;
    out.truth.lambda_b = cfg.lambda_b;

    for (const auto& rs : routes) {
        out.panel.capacity_by_route[rs.name] = rs.capacity;
        for (const auto& c : rs.cities_a) out.panel.covariates[c.city] = c;
        for (const auto& c : rs.cities_b) out.panel.covariates[c.city] = c;
    }

    // Fare ladders per route: prices rise with the class index and the
    // relative price p_b / p_a drifts upward across classes.
    auto price_a = [&](const RouteSpec& rs, int k) {
        return rs.base_price_a * std::pow(1.0 + cfg.ladder_step, double(k));
    };
    auto price_b = [&](const RouteSpec& rs, int k) {
        double rel = K > 1 ? 1.0 + cfg.relative_span * double(k) / double(K - 1) : 1.0;
        return rs.base_price_b * std::pow(1.0 + cfg.ladder_step, double(k)) * rel;
    };

    // Calibrate the off-peak g0 per route so that demand at the mid-ladder
    // fare roughly fills target_load of the capacity.  Peak cells scale up.
    std::map<std::string, double> g_route;
    for (const auto& rs : routes) {
        int km = K / 2;
        double sa = 0.0, sb = 0.0;
        // peak trains skip the last intermediate stop, so calibrate on the
        // off-peak (full) roster
        for (const auto& c : rs.cities_a) sa += exp_design(c, cfg.beta);
        for (const auto& c : rs.cities_b) sb += exp_design(c, cfg.beta);
        double bracket = sa * cfg.lambda_a * std::pow(price_a(rs, km), -cfg.epsilon) +
                         sb * cfg.lambda_b * std::pow(price_b(rs, km), -cfg.epsilon);
        g_route[rs.name] = cfg.target_load * double(rs.capacity) / bracket;
    }

    for (int i = 0; i < cfg.n_trains; ++i) {
        const RouteSpec& rs = routes[std::size_t(i) % routes.size()];
        auto rng = make_engine(cfg.seed, std::uint64_t(i), 0xd67ULL, 0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const bool peak = unif(rng) < cfg.peak_share;
        const std::string cell = cell_id(rs.name, peak ? 1 : 0);

        // Peak (express) trains skip the last intermediate city; the covariate
        // cell therefore pins down the exact city roster.
        std::vector<const CityCovariates*> ca, cb;
        for (std::size_t j = 0; j < rs.cities_a.size(); ++j)
            if (!(peak && j + 1 == rs.cities_a.size())) ca.push_back(&rs.cities_a[j]);
        for (const auto& c : rs.cities_b) cb.push_back(&c);

        double scale_a = 0.0, scale_b = 0.0;
        std::vector<double> wa, wb;
        for (auto* c : ca) {
            wa.push_back(exp_design(*c, cfg.beta));
            scale_a += wa.back();
        }
        for (auto* c : cb) {
            wb.push_back(exp_design(*c, cfg.beta));
            scale_b += wb.back();
        }

        const double g = g_route[rs.name] * (peak ? cfg.peak_boost : 1.0);
        out.truth.g0[cell] = g;

        std::gamma_distribution<double> ga(cfg.lambda_a, 1.0), gb(cfg.lambda_b, 1.0);
        double eta_a = ga(rng), eta_b = gb(rng);
        double xi_a = scale_a * g * eta_a;
        double xi_b = scale_b * g * eta_b;

        // Simulate the merged purchase process in shape-mass time; the fare
        // ladder closes class k once cumulative sales hit C*(k+1)/K, a
        // stopping time of the total sales process.
        const int C = rs.capacity;
        std::vector<std::vector<int>> n_city_a(ca.size(), std::vector<int>(std::size_t(K), 0));
        std::vector<std::vector<int>> n_city_b(cb.size(), std::vector<int>(std::size_t(K), 0));
        std::exponential_distribution<double> exp1(1.0);
        double s = 0.0;
        int sold = 0, k = 0;
        while (sold < C) {
            double ra = xi_a * std::pow(price_a(rs, k), -cfg.epsilon);
            double rb = xi_b * std::pow(price_b(rs, k), -cfg.epsilon);
            double rate = ra + rb;
            if (!(rate > 0.0)) break;
            s += exp1(rng) / rate;
            if (s >= 1.0) break;
            bool to_b = unif(rng) < rb / rate;
            const auto& w = to_b ? wb : wa;
            double total_w = to_b ? scale_b : scale_a;
            double u = unif(rng) * total_w;
            std::size_t ci = 0;
            while (ci + 1 < w.size() && u > w[ci]) {
                u -= w[ci];
                ++ci;
            }
            (to_b ? n_city_b : n_city_a)[ci][std::size_t(k)] += 1;
            ++sold;
            while (k + 1 < K && sold >= (C * (k + 1) + K - 1) / K) ++k;
        }

        const std::string date = date_of(i * 7 + (i % 364));
        auto emit = [&](const CityCovariates& c, Dest d, int kk, double price, int n) {
            SaleRecord rec;
            rec.train_id = i + 1;
            rec.route = rs.name;
            rec.date = date;
            rec.peak_flag = peak ? 1 : 0;
            rec.fare_class = kk;
            rec.city = c.city;
            rec.dest_group = d;
            rec.price = price;
            rec.n_sold = n;
            out.panel.records.push_back(std::move(rec));
        };
        for (int kk = 0; kk < K; ++kk) {
            for (std::size_t j = 0; j < ca.size(); ++j)
                emit(*ca[j], Dest::a, kk, price_a(rs, kk), n_city_a[j][std::size_t(kk)]);
            for (std::size_t j = 0; j < cb.size(); ++j)
                emit(*cb[j], Dest::b, kk, price_b(rs, kk), n_city_b[j][std::size_t(kk)]);
        }

        SyntheticTruth::TrainTruth tt;
        tt.id = i + 1;
        tt.route = rs.name;
        tt.cell = cell;
        tt.capacity = C;
        tt.xi_a = xi_a;
        tt.xi_b = xi_b;
        tt.eta_a = eta_a;
        tt.eta_b = eta_b;
        out.truth.trains.push_back(std::move(tt));
    }
    return out;
}

void write_truth_json(const SyntheticTruth& truth, const std::string& path) {
    nlohmann::json j;
    j["epsilon"] = truth.epsilon;
    j["beta"] = truth.beta;
    j["lambda_a"] = truth.lambda_a;
    j["lambda_b"] = truth.lambda_b;
    j["g0"] = truth.g0;
    auto& arr = j["trains"] = nlohmann::json::array();
    for (const auto& t : truth.trains)
        arr.push_back({{"id", t.id},
                       {"route", t.route},
                       {"cell", t.cell},
                       {"capacity", t.capacity},
                       {"xi_a", t.xi_a},
                       {"xi_b", t.xi_b},
                       {"eta_a", t.eta_a},
                       {"eta_b", t.eta_b}});
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
}

SyntheticTruth read_truth_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    nlohmann::json j;
    f >> j;
    SyntheticTruth t;
    t.epsilon = j.at("epsilon").get<double>();
    t.beta = j.at("beta").get<std::vector<double>>();
    t.lambda_a = j.at("lambda_a").get<double>();
    t.lambda_b = j.at("lambda_b").get<double>();
    t.g0 = j.at("g0").get<std::map<std::string, double>>();
    for (const auto& e : j.at("trains")) {
        SyntheticTruth::TrainTruth tt;
        tt.id = e.at("id").get<std::int64_t>();
        tt.route = e.at("route").get<std::string>();
        tt.cell = e.at("cell").get<std::string>();
        tt.capacity = e.at("capacity").get<int>();
        tt.xi_a = e.at("xi_a").get<double>();
        tt.xi_b = e.at("xi_b").get<double>();
        tt.eta_a = e.at("eta_a").get<double>();
        tt.eta_b = e.at("eta_b").get<double>();
        t.trains.push_back(std::move(tt));
    }
    return t;
}

} // namespace rm
