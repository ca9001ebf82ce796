#pragma once
#include <cstddef>
#include <vector>

namespace rm {

/** Normalized arrival-time density b(t) on [0,1], piecewise constant on a
 * uniform grid (default 64 cells).  The density integrates to one, so the
 * cumulative mass B(t1,t2) is exact and cheap, and the quantile of B is
 * available in closed form for time-change arguments.
 */
class ArrivalShape {
  public:
    /// Uniform shape b = 1.
    explicit ArrivalShape(std::size_t cells = 64);

    /// Piecewise-constant shape from non-negative cell weights (renormalized).
    explicit ArrivalShape(const std::vector<double>& weights);

    /// Discretize a positive density by cell midpoints, then renormalize.
    template <class F>
    static ArrivalShape from_density(F&& f, std::size_t cells = 64) {
        std::vector<double> w(cells);
        for (std::size_t i = 0; i < cells; ++i)
            w[i] = f((i + 0.5) / double(cells));
        return ArrivalShape(w);
    }

    std::size_t cells() const { return density_.size(); }

    /// b(t); right-continuous in the cell index, b(1) taken from the last cell.
    double density(double t) const;

    /// B(t1,t2) = integral of b over [t1,t2]; requires 0 <= t1 <= t2 <= 1.
    double cumulative(double t1, double t2) const;

    /// B(0,t).
    double cdf(double t) const { return cumulative(0.0, t); }

    /// Inverse of B(0,.): smallest t with B(0,t) = m, m in [0,1].
    double quantile(double m) const;

    /// Max of b over [t1, t2] (envelope for thinning proposals).
    double max_density(double t1, double t2) const;

  private:
    std::vector<double> density_;  // cell values of b
    std::vector<double> cum_;      // cum_[i] = B(0, i/cells)
};

} // namespace rm
