#include "rm/arrival_shape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rm {

ArrivalShape::ArrivalShape(std::size_t cells) {
    if (cells == 0) throw std::invalid_argument("ArrivalShape: need at least one cell");
    density_.assign(cells, 1.0);
    cum_.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) cum_[i] = double(i) / double(cells);
}

ArrivalShape::ArrivalShape(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("ArrivalShape: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("ArrivalShape: negative weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("ArrivalShape: zero total mass");
    density_.resize(n);
    cum_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        density_[i] = weights[i] / total * double(n);
        cum_[i + 1] = cum_[i] + density_[i] / double(n);
    }
    cum_.back() = 1.0;
}

double ArrivalShape::density(double t) const {
    if (t < 0.0 || t > 1.0) throw std::domain_error("ArrivalShape::density: t outside [0,1]");
    std::size_t i = std::min<std::size_t>(std::size_t(t * double(cells())), cells() - 1);
    return density_[i];
}

double ArrivalShape::cumulative(double t1, double t2) const {
    if (t1 < 0.0 || t2 > 1.0 || t1 > t2)
        throw std::domain_error("ArrivalShape::cumulative: need 0 <= t1 <= t2 <= 1");
    auto cdf_at = [&](double t) {
        double pos = t * double(cells());
        std::size_t i = std::min<std::size_t>(std::size_t(pos), cells() - 1);
        return cum_[i] + density_[i] * (t - double(i) / double(cells()));
    };
    return cdf_at(t2) - cdf_at(t1);
}

double ArrivalShape::quantile(double m) const {
    if (m < 0.0 || m > 1.0) throw std::domain_error("ArrivalShape::quantile: m outside [0,1]");
    if (m >= 1.0) return 1.0;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), m);
    std::size_t i = std::size_t(it - cum_.begin());
    i = (i == 0) ? 0 : i - 1;
    i = std::min(i, cells() - 1);
    double cell_mass = density_[i] / double(cells());
    double frac = cell_mass > 0 ? (m - cum_[i]) / cell_mass : 0.0;
    return (double(i) + frac) / double(cells());
}

double ArrivalShape::max_density(double t1, double t2) const {
    if (t1 < 0.0 || t2 > 1.0 || t1 > t2)
        throw std::domain_error("ArrivalShape::max_density: bad interval");
    std::size_t i1 = std::min<std::size_t>(std::size_t(t1 * double(cells())), cells() - 1);
    std::size_t i2 = std::min<std::size_t>(std::size_t(t2 * double(cells())), cells() - 1);
    double m = 0.0;
    for (std::size_t i = i1; i <= i2; ++i) m = std::max(m, density_[i]);
    return m;
}

} // namespace rm
