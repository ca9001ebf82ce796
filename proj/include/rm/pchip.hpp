#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rm {

/** Shape-preserving piecewise-cubic interpolant (Fritsch-Carlson slopes).
 * Monotone data produce a monotone interpolant, which keeps value-table
 * lookups inside recursions from overshooting. */
class Pchip {
  public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip: need >=2 nodes");
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            if (h[i] <= 0) throw std::invalid_argument("Pchip: x not increasing");
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        m_.assign(n, 0.0);
        if (n == 2) {
            m_[0] = m_[1] = delta[0];
        } else {
            m_[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            m_[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0) { m_[i] = 0.0; continue; }
            double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
            m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }

    double operator()(double x) const {
        const std::size_t n = x_.size();
        if (x <= x_.front()) return y_.front() + m_.front() * (x - x_.front());
        if (x >= x_.back()) return y_.back() + m_.back() * (x - x_.back());
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (x_[mid] <= x) lo = mid; else hi = mid;
        }
        double h = x_[lo + 1] - x_[lo], t = (x - x_[lo]) / h;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * y_[lo] + h10 * h * m_[lo] + h01 * y_[lo + 1] + h11 * h * m_[lo + 1];
    }

    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

  private:
    static double edge_slope(double h0, double h1, double d0, double d1) {
        double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0) return 0.0;
        if (d0 * d1 < 0 && std::abs(m) > 3 * std::abs(d0)) return 3 * d0;
        return m;
    }
    std::vector<double> x_, y_, m_;
};

} // namespace rm
