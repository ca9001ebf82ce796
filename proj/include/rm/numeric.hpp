#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace rm {

/// 64-node Gauss-Legendre integration of f over [a,b].
inline double gauss64(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 64>::integrate(f, a, b);
}

struct Bisection {
    double tol = 1e-10;
    int max_iter = 200;
};

/// Root of a monotone continuous h on [lo,hi]; h(lo), h(hi) must bracket 0.
inline double bisect(const std::function<double(double)>& h, double lo, double hi,
                     const Bisection& opt = {}) {
    double flo = h(lo), fhi = h(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw std::runtime_error("bisect: no sign change in bracket");
    for (int i = 0; i < opt.max_iter && hi - lo > opt.tol * std::max(1.0, std::abs(lo)); ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = h(mid);
        if (fm == 0) return mid;
        if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; } else { hi = mid; }
    }
    return 0.5 * (lo + hi);
}

/// Root of an increasing h with h(x*)=y, starting bracket grown geometrically.
inline double invert_increasing(const std::function<double(double)>& h, double y,
                                double lo = 1e-8, double hi = 1e8,
                                const Bisection& opt = {.tol = 1e-8, .max_iter = 200}) {
    return bisect([&](double x) { return h(x) - y; }, lo, hi, opt);
}

/** Maximize f over [lo,hi]: coarse scan on a log-spaced grid followed by
 * golden-section refinement around the best grid node.  Ties in the scan are
 * broken toward the smaller argument. */
struct MaxResult { double arg; double value; };

inline MaxResult golden_max(const std::function<double(double)>& f, double lo, double hi,
                            double tol = 1e-10) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(b))) {
        if (fc >= fd) { b = d; d = c; fd = fc; c = b - invphi * (b - a); fc = f(c); }
        else          { a = c; c = d; fc = fd; d = a + invphi * (b - a); fd = f(d); }
    }
    double mid = 0.5 * (a + b), fm = f(mid);
    return {mid, fm};
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * double(i) / double(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline MaxResult grid_golden_max(const std::function<double(double)>& f,
                                 const std::vector<double>& grid, double tol = 1e-10) {
    std::size_t best = 0;
    double fbest = f(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double v = f(grid[i]);
        if (v > fbest) { fbest = v; best = i; }
    }
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    MaxResult r = golden_max(f, lo, hi, tol);
    if (fbest > r.value) return {grid[best], fbest};
    return r;
}

} // namespace rm
