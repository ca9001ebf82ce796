#include "rm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rm/bounds.hpp"
#include "rm/estimation.hpp"
#include "rm/inference.hpp"
#include "rm/panel.hpp"
#include "rm/revenue.hpp"

namespace rm {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------------ config --

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) out.push_back(T(std::stod(item)));
    return out;
}

} // namespace

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "out_dir") cfg.out_dir = val;
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "n_trains") cfg.synth.n_trains = std::stoi(val);
            else if (key == "n_routes") cfg.synth.n_routes = std::stoi(val);
            else if (key == "fare_classes") cfg.synth.fare_classes = std::stoi(val);
            else if (key == "capacities") cfg.synth.capacities = parse_list<int>(val);
            else if (key == "epsilon") cfg.synth.epsilon = std::stod(val);
            else if (key == "beta") cfg.synth.beta = parse_list<double>(val);
            else if (key == "lambda_a") cfg.synth.lambda_a = std::stod(val);
            else if (key == "lambda_b") cfg.synth.lambda_b = std::stod(val);
            else if (key == "target_load") cfg.synth.target_load = std::stod(val);
            else if (key == "ladder_step") cfg.synth.ladder_step = std::stod(val);
            else if (key == "relative_span") cfg.synth.relative_span = std::stod(val);
            else if (key == "peak_share") cfg.synth.peak_share = std::stod(val);
            else if (key == "peak_boost") cfg.synth.peak_boost = std::stod(val);
            else if (key == "bootstrap_resamples") cfg.bootstrap_resamples = std::stoi(val);
            else if (key == "multi_city") cfg.multi_city = std::stoi(val) != 0;
            else if (key == "split_class") cfg.split_class = std::stoi(val);
            else if (key == "prealloc_rule") cfg.prealloc_rule = val;
            else if (key == "ik_percents") cfg.ik_percents = parse_list<double>(val);
            else if (key == "q_grid_size") cfg.alpha_opt.q_grid_size = std::stoul(val);
            else if (key == "q_min") cfg.alpha_opt.q_min = std::stod(val);
            else if (key == "q_max") cfg.alpha_opt.q_max = std::stod(val);
            else if (key == "implicit_tol") cfg.alpha_opt.implicit_tol = std::stod(val);
            else if (key == "subsample_size") cfg.subsample_size = std::stoi(val);
            else if (key == "n_subsamples") cfg.n_subsamples = std::stoi(val);
            else if (key == "test_alpha") cfg.test_alpha = std::stod(val);
            else if (key == "infer_scenarios") cfg.infer_scenarios = split_list(val);
            else throw ConfigError("unknown config key: " + key);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("config line " + std::to_string(lineno) + " (" + key +
                              "): " + e.what());
        }
    }
    if (cfg.prealloc_rule != "optimal" && cfg.prealloc_rule != "match_observed_mean")
        throw ConfigError("prealloc_rule must be optimal or match_observed_mean");
    return cfg;
}

// --------------------------------------------------------------- scenarios --

std::vector<std::string> scenario_ids() {
    return {"u.1", "u.2", "u.3", "u.4", "s.1", "s.2", "s.3", "s.4",
            "s.5", "s.6", "s.7", "s.8", "s.9", "s.10", "f.1", "f.2"};
}

std::pair<Strategy, Regime> scenario_spec(const std::string& id) {
    static const std::map<std::string, std::pair<Strategy, Regime>> table = {
        {"u.1", {Strategy::uniform(), Regime::complete}},
        {"u.2", {Strategy::uniform(), Regime::incomplete}},
        {"u.3", {Strategy::grid_uniform(), Regime::complete}},
        {"u.4", {Strategy::grid_uniform(), Regime::incomplete}},
        {"s.1", {Strategy::stopping_time(), Regime::complete}},
        {"s.2", {Strategy::stopping_time(), Regime::incomplete}},
        {"s.3", {Strategy::stopping_time_m(2, false), Regime::complete}},
        {"s.4", {Strategy::stopping_time_m(2, false), Regime::incomplete}},
        {"s.5", {Strategy::stopping_time_m(12, false), Regime::complete}},
        {"s.6", {Strategy::stopping_time_m(12, false), Regime::incomplete}},
        {"s.7", {Strategy::stopping_time_m(2, true), Regime::complete}},
        {"s.8", {Strategy::stopping_time_m(2, true), Regime::incomplete}},
        {"s.9", {Strategy::stopping_time_m(12, true), Regime::complete}},
        {"s.10", {Strategy::stopping_time_m(12, true), Regime::incomplete}},
        {"f.1", {Strategy::full_dynamic(), Regime::complete}},
        {"f.2", {Strategy::full_dynamic(), Regime::incomplete}},
    };
    auto it = table.find(id);
    if (it == table.end()) throw ConfigError("unknown scenario id: " + id);
    return it->second;
}

// ----------------------------------------------------------- shared pieces --

namespace {

std::string artifact(const RunConfig& cfg, const char* name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void need_artifact(const RunConfig& cfg, const char* name, const char* producer) {
    if (!fs::exists(fs::path(cfg.out_dir) / name))
        throw ConfigError(std::string("missing artifact '") + name + "' in " + cfg.out_dir +
                          "; run the '" + producer + "' command first");
}

SalesPanel load_panel(const RunConfig& cfg) {
    need_artifact(cfg, "sales.csv", "simulate");
    need_artifact(cfg, "covariates.csv", "simulate");
    SalesPanel panel;
    read_sales_csv(panel, artifact(cfg, "sales.csv"));
    panel.covariates = read_covariates_csv(artifact(cfg, "covariates.csv"));
    // capacities ride along in the truth sidecar when present; otherwise they
    // must be recoverable from it
    need_artifact(cfg, "truth.json", "simulate");
    auto truth = read_truth_json(artifact(cfg, "truth.json"));
    for (const auto& t : truth.trains) panel.capacity_by_route[t.route] = t.capacity;
    return panel;
}

struct Estimates {
    DemandPrimitives theta;
    double intercept = 0.0;
};

Estimates load_estimates(const RunConfig& cfg) {
    need_artifact(cfg, "estimates.json", "estimate");
    std::ifstream f(artifact(cfg, "estimates.json"));
    json j;
    f >> j;
    Estimates e;
    e.theta.epsilon = j.at("epsilon").get<double>();
    e.theta.beta = j.at("beta").get<std::vector<double>>();
    e.theta.lambda_a = j.at("lambda_a").get<double>();
    e.theta.lambda_b = j.at("lambda_b").get<double>();
    e.intercept = j.value("intercept", 0.0);
    return e;
}

std::map<std::int64_t, double> observed_revenue(const SalesPanel& panel) {
    std::map<std::int64_t, double> rev;
    for (const auto& r : panel.records) rev[r.train_id] += r.price * double(r.n_sold);
    return rev;
}

std::map<std::int64_t, double> observed_mean_a(const std::vector<TrainView>& views) {
    std::map<std::int64_t, double> out;
    for (const auto& tv : views) out[tv.id] = double(tv.total(Dest::a));
    return out;
}

std::vector<TrainInstance> make_instances(const std::vector<TrainView>& views,
                                          const std::map<std::string, CityCovariates>& cov) {
    std::vector<TrainInstance> out;
    out.reserve(views.size());
    for (const auto& tv : views) {
        TrainInstance t;
        t.id = tv.id;
        t.route = tv.route;
        t.cell = tv.cell;
        t.capacity = tv.capacity;
        t.prices_a = tv.price_a;
        t.prices_b = tv.price_b;
        for (const auto& [city, cs] : tv.city_sales) {
            auto it = cov.find(city);
            if (it == cov.end())
                throw std::runtime_error("no covariates for city '" + city + "'");
            City c{city, it->second.design_row()};
            (cs.first == Dest::a ? t.cities_a : t.cities_b).push_back(std::move(c));
        }
        out.push_back(std::move(t));
    }
    return out;
}

// Cell-level aggregation for the bounds stage; subset indexes into views.
std::vector<CellData> make_cells(const std::vector<TrainView>& views,
                                 const std::vector<TrainInstance>& instances,
                                 const DemandPrimitives& theta,
                                 const std::map<std::int64_t, double>& revenue,
                                 const std::vector<std::size_t>* subset = nullptr) {
    std::map<std::string, CellData> cells;
    std::map<std::string, int> counts;
    std::vector<std::size_t> idx;
    if (subset) {
        idx = *subset;
    } else {
        idx.resize(views.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    }
    for (std::size_t i : idx) {
        const auto& tv = views[i];
        const auto& inst = instances[i];
        auto& cd = cells[tv.cell];
        const std::size_t K = tv.price_a.size();
        if (cd.prices_a.empty()) {
            cd.cell = tv.cell;
            cd.capacity = tv.capacity;
            cd.prices_a = tv.price_a;
            cd.prices_b = tv.price_b;
            cd.scale_a = inst.covariate_scale(Dest::a, theta.beta);
            cd.scale_b = inst.covariate_scale(Dest::b, theta.beta);
            cd.cum_sales_a.assign(K, 0.0);
            cd.cum_sales_b.assign(K, 0.0);
        }
        // cumulative tails sum_{j >= k} n_dj
        double ca = 0.0, cb = 0.0;
        for (std::size_t k = K; k-- > 0;) {
            ca += double(tv.n_a[k]);
            cb += double(tv.n_b[k]);
            cd.cum_sales_a[k] += ca;
            cd.cum_sales_b[k] += cb;
        }
        cd.mean_revenue += revenue.at(tv.id);
        counts[tv.cell] += 1;
    }
    std::vector<CellData> out;
    for (auto& [cell, cd] : cells) {
        double n = double(counts[cell]);
        for (auto& v : cd.cum_sales_a) v /= n;
        for (auto& v : cd.cum_sales_b) v /= n;
        cd.mean_revenue /= n;
        out.push_back(std::move(cd));
    }
    return out;
}

std::map<std::string, CellBounds> compute_bounds(const std::vector<CellData>& cells,
                                                 const DemandPrimitives& theta) {
    BoundParams bp;
    bp.epsilon = theta.epsilon;
    bp.lambda_a = theta.lambda_a;
    bp.lambda_b = theta.lambda_b;
    std::map<std::string, CellBounds> out;
    for (const auto& cd : cells) out[cd.cell] = cell_bounds(cd, bp);
    return out;
}

// ---------------------------------------------------------------- commands --

int cmd_simulate(const RunConfig& cfg) {
    SyntheticConfig sc = cfg.synth;
    sc.seed = cfg.seed;
    auto sp = generate_synthetic(sc);
    fs::create_directories(cfg.out_dir);
    write_sales_csv(sp.panel, artifact(cfg, "sales.csv"));
    write_covariates_csv(sp.panel.covariates, artifact(cfg, "covariates.csv"));
    write_truth_json(sp.truth, artifact(cfg, "truth.json"));
    return 0;
}

int cmd_estimate(const RunConfig& cfg) {
    auto panel = load_panel(cfg);
    LogitOptions opt;
    opt.multi_city = cfg.multi_city;
    opt.split_class = cfg.split_class;
    auto fit = fit_three_stage(panel, opt);

    json j;
    j["epsilon"] = fit.logit.epsilon;
    if (fit.logit.split) {
        j["epsilon_early"] = fit.logit.epsilon_early;
        j["epsilon_late"] = fit.logit.epsilon_late;
    }
    j["beta"] = fit.dest.beta;
    j["intercept"] = fit.dest.intercept;
    j["lambda_a"] = fit.gamma.lambda_a;
    j["lambda_b"] = fit.gamma.lambda_b;
    j["diagnostics"] = {{"loglik", fit.logit.loglik},
                        {"grad_norm", fit.logit.grad_norm},
                        {"logit_converged", fit.logit.converged},
                        {"dropped_one_sided", fit.logit.dropped_one_sided},
                        {"nls_r_squared", fit.dest.r_squared},
                        {"nls_converged", fit.dest.converged},
                        {"gamma_converged", fit.gamma.converged}};
    if (cfg.bootstrap_resamples >= 2) {
        auto se = bootstrap_three_stage(panel, cfg.bootstrap_resamples, cfg.seed, opt);
        j["se"] = {{"epsilon", se.se_epsilon},
                   {"beta", se.se_beta},
                   {"lambda_a", se.se_lambda_a},
                   {"lambda_b", se.se_lambda_b},
                   {"resamples", se.n_resamples}};
    }
    std::ofstream f(artifact(cfg, "estimates.json"));
    f << j.dump(2) << '\n';
    return 0;
}

int cmd_bounds(const RunConfig& cfg) {
    auto panel = load_panel(cfg);
    auto est = load_estimates(cfg);
    auto views = build_train_views(panel);
    auto instances = make_instances(views, panel.covariates);
    auto revenue = observed_revenue(panel);
    auto cells = make_cells(views, instances, est.theta, revenue);
    auto bmap = compute_bounds(cells, est.theta);
    std::vector<CellBounds> rows;
    bool violated = false;
    for (const auto& [cell, b] : bmap) {
        rows.push_back(b);
        if (!b.feasible) violated = true;
    }
    write_cell_bounds_csv(rows, artifact(cfg, "cell_bounds.csv"));
    return violated ? 3 : 0;
}

struct ScenarioRow {
    std::string id;
    std::string strategy;
    std::string regime;
    double lower = 0.0, upper = 0.0;
    double ratio_lower = 0.0, ratio_upper = 0.0;
    double delta_l = 0.0;
};

int cmd_counterfactual(const RunConfig& cfg) {
    auto panel = load_panel(cfg);
    auto est = load_estimates(cfg);
    need_artifact(cfg, "cell_bounds.csv", "bounds");
    auto brows = read_cell_bounds_csv(artifact(cfg, "cell_bounds.csv"));
    std::map<std::string, CellBounds> bmap;
    bool violated = false;
    for (auto& b : brows) {
        if (!b.feasible) violated = true;
        // A crossed interval flags a model violation but should not abort the
        // scenario table; collapse it to its overlap point and carry the flag
        // through the exit code instead.
        if (!b.feasible || b.g_lower > b.g_upper) {
            double lo = std::min(b.g_lower, b.g_upper);
            double hi = std::max(b.g_lower, b.g_upper);
            b.g_lower = b.g_upper = 0.5 * (lo + hi);
            b.feasible = true;
        }
        bmap[b.cell] = b;
    }
    auto views = build_train_views(panel);
    auto instances = make_instances(views, panel.covariates);
    auto revenue = observed_revenue(panel);
    auto mean_a = observed_mean_a(views);
    double obs_mean = 0.0;
    for (const auto& [id, r] : revenue) obs_mean += r;
    obs_mean /= double(revenue.size());

    AlphaCache cache(cfg.alpha_opt);
    PreallocRule rule = cfg.prealloc_rule == "optimal" ? PreallocRule::optimal
                                                       : PreallocRule::match_observed_mean;

    std::vector<ScenarioRow> rows;
    for (const auto& id : scenario_ids()) {
        auto [strategy, regime] = scenario_spec(id);
        auto ri = revenue_interval(instances, est.theta, bmap, strategy, regime, rule, cache,
                                   &mean_a);
        ScenarioRow row;
        row.id = id;
        row.strategy = strategy.label();
        row.regime = regime_name(regime);
        row.lower = ri.lower;
        row.upper = ri.upper;
        row.ratio_lower = ri.lower / obs_mean;
        row.ratio_upper = ri.upper / obs_mean;
        row.delta_l = ri.lower / obs_mean - 1.0;
        rows.push_back(std::move(row));
    }

    {
        std::ofstream f(artifact(cfg, "scenarios.csv"));
        f << "scenario,strategy,regime,rev_lower,rev_upper,ratio_lower,ratio_upper,delta_l\n";
        f.precision(12);
        for (const auto& r : rows)
            f << r.id << ',' << r.strategy << ',' << r.regime << ',' << r.lower << ',' << r.upper
              << ',' << r.ratio_lower << ',' << r.ratio_upper << ',' << r.delta_l << '\n';
    }
    {
        json j = json::array();
        for (const auto& r : rows)
            j.push_back({{"scenario", r.id},
                         {"strategy", r.strategy},
                         {"regime", r.regime},
                         {"rev_lower", r.lower},
                         {"rev_upper", r.upper},
                         {"ratio_lower", r.ratio_lower},
                         {"ratio_upper", r.ratio_upper},
                         {"delta_l", r.delta_l}});
        json top;
        top["observed_mean_revenue"] = obs_mean;
        top["scenarios"] = std::move(j);
        std::ofstream f(artifact(cfg, "scenarios.json"));
        f << top.dump(2) << '\n';
    }
    {
        std::ofstream f(artifact(cfg, "ik_curve.csv"));
        f << "pct,regime,rev_lower,rev_upper\n";
        f.precision(12);
        for (Regime regime : {Regime::complete, Regime::incomplete})
            for (double pct : cfg.ik_percents) {
                auto ri = revenue_interval(instances, est.theta, bmap,
                                           Strategy::intermediate_k(pct), regime, rule, cache,
                                           &mean_a);
                f << pct << ',' << regime_name(regime) << ',' << ri.lower << ',' << ri.upper
                  << '\n';
            }
    }
    return violated ? 3 : 0;
}

int cmd_infer(const RunConfig& cfg) {
    auto panel = load_panel(cfg);
    auto est = load_estimates(cfg);
    auto views = build_train_views(panel);
    auto instances = make_instances(views, panel.covariates);
    auto revenue = observed_revenue(panel);
    auto mean_a = observed_mean_a(views);
    AlphaCache cache(cfg.alpha_opt);
    PreallocRule rule = cfg.prealloc_rule == "optimal" ? PreallocRule::optimal
                                                       : PreallocRule::match_observed_mean;
    std::vector<std::string> routes;
    routes.reserve(views.size());
    for (const auto& tv : views) routes.push_back(tv.route);

    json results = json::array();
    for (const auto& id : cfg.infer_scenarios) {
        auto [strategy, regime] = scenario_spec(id);
        auto stat = [&](const std::vector<std::size_t>& subset) {
            auto cells = make_cells(views, instances, est.theta, revenue, &subset);
            auto bmap = compute_bounds(cells, est.theta);
            // Small subsamples can produce crossed per-cell bounds; collapse
            // such intervals to their overlap point so the statistic stays
            // defined for every replicate.
            for (auto& [cell, b] : bmap)
                if (!b.feasible || b.g_lower > b.g_upper) {
                    double lo = std::min(b.g_lower, b.g_upper);
                    double hi = std::max(b.g_lower, b.g_upper);
                    b.g_lower = b.g_upper = 0.5 * (lo + hi);
                    b.feasible = true;
                }
            std::vector<TrainInstance> sub;
            double obs = 0.0;
            sub.reserve(subset.size());
            for (std::size_t i : subset) {
                sub.push_back(instances[i]);
                obs += revenue.at(views[i].id);
            }
            obs /= double(subset.size());
            auto ri = revenue_interval(sub, est.theta, bmap, strategy, regime, rule, cache,
                                       &mean_a);
            return ri.lower / obs - 1.0;
        };
        SubsampleOptions so;
        so.subsample_size = cfg.subsample_size;
        so.n_subsamples = cfg.n_subsamples;
        so.alpha = cfg.test_alpha;
        so.seed = cfg.seed;
        auto tr = subsample_test(routes, stat, so);
        results.push_back({{"scenario", id},
                           {"delta_l_hat", tr.delta_l_hat},
                           {"statistic", tr.statistic},
                           {"critical_value", tr.critical_value},
                           {"p_value_upper", tr.p_value_upper},
                           {"reject", tr.reject},
                           {"subsample_size", tr.subsample_size},
                           {"n_subsamples", tr.n_subsamples}});
    }
    std::ofstream f(artifact(cfg, "inference.json"));
    f << results.dump(2) << '\n';
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    need_artifact(cfg, "scenarios.json", "counterfactual");
    json scen;
    {
        std::ifstream f(artifact(cfg, "scenarios.json"));
        f >> scen;
    }
    json report;
    report["observed_mean_revenue"] = scen.value("observed_mean_revenue", 0.0);
    report["scenarios"] = scen.value("scenarios", json::array());

    if (fs::exists(fs::path(cfg.out_dir) / "ik_curve.csv")) {
        std::ifstream f(artifact(cfg, "ik_curve.csv"));
        std::string line;
        std::getline(f, line);  // header
        json curve = json::array();
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string pct, regime, lo, hi;
            std::getline(ss, pct, ',');
            std::getline(ss, regime, ',');
            std::getline(ss, lo, ',');
            std::getline(ss, hi, ',');
            curve.push_back({{"pct", std::stod(pct)},
                             {"regime", regime},
                             {"rev_lower", std::stod(lo)},
                             {"rev_upper", std::stod(hi)}});
        }
        report["intermediate_k_curve"] = std::move(curve);
    }
    if (fs::exists(fs::path(cfg.out_dir) / "inference.json")) {
        std::ifstream f(artifact(cfg, "inference.json"));
        json inf;
        f >> inf;
        report["inference"] = std::move(inf);
    }
    {
        std::ofstream f(artifact(cfg, "report.json"));
        f << report.dump(2) << '\n';
    }
    {
        std::ofstream f(artifact(cfg, "report.csv"));
        f << "scenario,strategy,regime,rev_lower,rev_upper,ratio_lower,ratio_upper,delta_l\n";
        f.precision(12);
        for (const auto& r : report["scenarios"])
            f << r.at("scenario").get<std::string>() << ','
              << r.at("strategy").get<std::string>() << ',' << r.at("regime").get<std::string>()
              << ',' << r.at("rev_lower").get<double>() << ',' << r.at("rev_upper").get<double>()
              << ',' << r.at("ratio_lower").get<double>() << ','
              << r.at("ratio_upper").get<double>() << ',' << r.at("delta_l").get<double>()
              << '\n';
    }
    return 0;
}

} // namespace

int run_pipeline(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "estimate") return cmd_estimate(cfg);
    if (cfg.command == "bounds") return cmd_bounds(cfg);
    if (cfg.command == "counterfactual") return cmd_counterfactual(cfg);
    if (cfg.command == "infer") return cmd_infer(cfg);
    if (cfg.command == "report") return cmd_report(cfg);
    throw ConfigError("unknown command: " + cfg.command);
}

} // namespace rm
