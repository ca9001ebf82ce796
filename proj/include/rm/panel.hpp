#pragma once
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rm/bounds.hpp"
#include "rm/demand.hpp"

namespace rm {

/// One panel row: sales of one fare class for one city on one train.
struct SaleRecord {
    std::int64_t train_id = 0;
    std::string route;
    std::string date;     // ISO yyyy-mm-dd
    int peak_flag = 0;
    int fare_class = 0;   // 0-based
    std::string city;
    Dest dest_group = Dest::a;
    double price = 0.0;
    int n_sold = 0;
};

struct CityCovariates {
    std::string city;
    double population_millions = 0.0;
    int regional_capital_flag = 0;
    double travel_time_hours = 0.0;

    /// Design row: population, capital flag, travel time, travel time squared.
    std::vector<double> design_row() const;
};

struct SalesPanel {
    std::vector<SaleRecord> records;
    std::map<std::string, CityCovariates> covariates;
    std::map<std::string, int> capacity_by_route;
};

/// Per-train aggregation of the panel used by the estimators.
struct TrainView {
    std::int64_t id = 0;
    std::string route;
    std::string cell;  // covariate cell id: route plus peak flag
    int capacity = 0;
    std::vector<double> price_a, price_b;  // by fare class
    std::vector<int> n_a, n_b;
    // city -> (destination group, sales by fare class)
    std::map<std::string, std::pair<Dest, std::vector<int>>> city_sales;

    int total(Dest d) const;
};

std::string cell_id(const std::string& route, int peak_flag);

/** Aggregate records train by train.  Every train must report all fare
 * classes with consistent per-class prices within a destination group. */
std::vector<TrainView> build_train_views(const SalesPanel& panel);

// ----------------------------------------------------------------- CSV IO --

void write_sales_csv(const SalesPanel& panel, const std::string& path);
void read_sales_csv(SalesPanel& panel, const std::string& path);

void write_covariates_csv(const std::map<std::string, CityCovariates>& cov,
                          const std::string& path);
std::map<std::string, CityCovariates> read_covariates_csv(const std::string& path);

void write_events_csv(const std::vector<PurchaseEvent>& events, const std::string& path);

void write_cell_bounds_csv(const std::vector<CellBounds>& bounds, const std::string& path);
std::vector<CellBounds> read_cell_bounds_csv(const std::string& path);

} // namespace rm
