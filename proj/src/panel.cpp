#include "rm/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rm {

std::vector<double> CityCovariates::design_row() const {
    return {population_millions, double(regional_capital_flag), travel_time_hours,
            travel_time_hours * travel_time_hours};
}

int TrainView::total(Dest d) const {
    const auto& n = d == Dest::a ? n_a : n_b;
    int t = 0;
    for (int v : n) t += v;
    return t;
}

std::string cell_id(const std::string& route, int peak_flag) {
    return route + (peak_flag ? ":peak" : ":off");
}

std::vector<TrainView> build_train_views(const SalesPanel& panel) {
    std::map<std::int64_t, TrainView> by_train;
    for (const auto& r : panel.records) {
        auto& tv = by_train[r.train_id];
        if (tv.price_a.empty()) {
            tv.id = r.train_id;
            tv.route = r.route;
            tv.cell = cell_id(r.route, r.peak_flag);
            auto cap = panel.capacity_by_route.find(r.route);
            tv.capacity = cap == panel.capacity_by_route.end() ? 0 : cap->second;
        }
        std::size_t k = std::size_t(r.fare_class);
        if (r.fare_class < 0) throw std::invalid_argument("panel: negative fare class");
        if (tv.price_a.size() <= k) {
            tv.price_a.resize(k + 1, 0.0);
            tv.price_b.resize(k + 1, 0.0);
            tv.n_a.resize(k + 1, 0);
            tv.n_b.resize(k + 1, 0);
        }
        auto& price = r.dest_group == Dest::a ? tv.price_a[k] : tv.price_b[k];
        if (price != 0.0 && std::abs(price - r.price) > 1e-9 * price)
            throw std::invalid_argument("panel: inconsistent class price within train " +
                                        std::to_string(r.train_id));
        price = r.price;
        (r.dest_group == Dest::a ? tv.n_a[k] : tv.n_b[k]) += r.n_sold;
        auto& cs = tv.city_sales[r.city];
        cs.first = r.dest_group;
        if (cs.second.size() <= k) cs.second.resize(k + 1, 0);
        cs.second[k] += r.n_sold;
    }
    std::vector<TrainView> out;
    out.reserve(by_train.size());
    for (auto& [id, tv] : by_train) {
        for (auto& [city, cs] : tv.city_sales) cs.second.resize(tv.price_a.size(), 0);
        out.push_back(std::move(tv));
    }
    return out;
}

// ----------------------------------------------------------------- CSV IO --

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

void expect_header(std::ifstream& f, const std::string& want, const std::string& path) {
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != want)
        throw std::runtime_error("unexpected header in " + path + ": '" + line + "'");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

void write_sales_csv(const SalesPanel& panel, const std::string& path) {
    auto f = open_out(path);
    f << "train_id,route,date,peak_flag,fare_class,city,dest_group,price,n_sold\n";
    for (const auto& r : panel.records)
        f << r.train_id << ',' << r.route << ',' << r.date << ',' << r.peak_flag << ','
          << r.fare_class << ',' << r.city << ',' << dest_name(r.dest_group) << ','
          << fmt(r.price) << ',' << r.n_sold << '\n';
}

void read_sales_csv(SalesPanel& panel, const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "train_id,route,date,peak_flag,fare_class,city,dest_group,price,n_sold",
                  path);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto c = split_csv_line(line);
        if (c.size() != 9) throw std::runtime_error("bad sales row in " + path + ": " + line);
        SaleRecord r;
        r.train_id = std::stoll(c[0]);
        r.route = c[1];
        r.date = c[2];
        r.peak_flag = std::stoi(c[3]);
        r.fare_class = std::stoi(c[4]);
        r.city = c[5];
        if (c[6] != "a" && c[6] != "b")
            throw std::runtime_error("bad dest_group in " + path + ": " + c[6]);
        r.dest_group = c[6] == "a" ? Dest::a : Dest::b;
        r.price = std::stod(c[7]);
        r.n_sold = std::stoi(c[8]);
        panel.records.push_back(std::move(r));
    }
}

void write_covariates_csv(const std::map<std::string, CityCovariates>& cov,
                          const std::string& path) {
    auto f = open_out(path);
    f << "city,population_millions,regional_capital_flag,travel_time_hours\n";
    for (const auto& [city, c] : cov)
        f << city << ',' << fmt(c.population_millions) << ',' << c.regional_capital_flag << ','
          << fmt(c.travel_time_hours) << '\n';
}

std::map<std::string, CityCovariates> read_covariates_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "city,population_millions,regional_capital_flag,travel_time_hours", path);
    std::map<std::string, CityCovariates> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto c = split_csv_line(line);
        if (c.size() != 4) throw std::runtime_error("bad covariate row in " + path);
        CityCovariates cc;
        cc.city = c[0];
        cc.population_millions = std::stod(c[1]);
        cc.regional_capital_flag = std::stoi(c[2]);
        cc.travel_time_hours = std::stod(c[3]);
        out.emplace(cc.city, std::move(cc));
    }
    return out;
}

void write_events_csv(const std::vector<PurchaseEvent>& events, const std::string& path) {
    auto f = open_out(path);
    f << "train_id,t,dest,price,fare_class\n";
    for (const auto& e : events)
        f << e.train_id << ',' << fmt(e.t) << ',' << dest_name(e.dest) << ',' << fmt(e.price)
          << ',' << e.fare_class << '\n';
}

void write_cell_bounds_csv(const std::vector<CellBounds>& bounds, const std::string& path) {
    auto f = open_out(path);
    f << "cell,g_lower,g_upper,binding_dest,binding_class,upper_fare_class,feasible\n";
    for (const auto& b : bounds)
        f << b.cell << ',' << fmt(b.g_lower) << ',' << fmt(b.g_upper) << ','
          << dest_name(b.binding_dest) << ',' << b.binding_class << ',' << b.upper_fare_class
          << ',' << (b.feasible ? 1 : 0) << '\n';
}

std::vector<CellBounds> read_cell_bounds_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "cell,g_lower,g_upper,binding_dest,binding_class,upper_fare_class,feasible",
                  path);
    std::vector<CellBounds> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto c = split_csv_line(line);
        if (c.size() != 7) throw std::runtime_error("bad bounds row in " + path);
        CellBounds b;
        b.cell = c[0];
        b.g_lower = std::stod(c[1]);
        b.g_upper = std::stod(c[2]);
        b.binding_dest = c[3] == "a" ? Dest::a : Dest::b;
        b.binding_class = std::stoi(c[4]);
        b.upper_fare_class = std::stoi(c[5]);
        b.feasible = c[6] != "0";
        out.push_back(std::move(b));
    }
    return out;
}

} // namespace rm
