#pragma once

#include <cmath>
#include <vector>

namespace delaymargin::numeric {

inline int sign(double v) {
    return (v > 0.0) - (v < 0.0);
}

struct BisectTol {
    double abs = 1e-12;
    double rel = 1e-12;
};

/// Root of f in [a, b] given f(a) = fa and a sign change on [a, b].
template <class F>
double bisect(F&& f, double a, double b, double fa, BisectTol tol) {
    for (int iter = 0; iter < 400; ++iter) {
        const double m = 0.5 * (a + b);
        if (b - a <= tol.abs + tol.rel * std::abs(m) || m <= a || m >= b) {
            return m;
        }
        const double fm = f(m);
        if (fm == 0.0) {
            return m;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Zeros of f located by sign changes between consecutive grid points
/// (ascending grid), each refined by bisection. Grid points where f is
/// exactly zero are reported as zeros.
template <class F>
std::vector<double> sign_change_zeros(F&& f, const std::vector<double>& grid, BisectTol tol) {
    std::vector<double> zeros;
    if (grid.empty()) {
        return zeros;
    }
    double prev_x = grid.front();
    double prev_f = f(prev_x);
    if (prev_f == 0.0) {
        zeros.push_back(prev_x);
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid[i];
        const double fx = f(x);
        if (fx == 0.0) {
            zeros.push_back(x);
        } else if (prev_f != 0.0 && (fx < 0.0) != (prev_f < 0.0)) {
            zeros.push_back(bisect(f, prev_x, x, prev_f, tol));
        }
        prev_x = x;
        prev_f = fx;
    }
    return zeros;
}

/// Merges ascending values closer than tol * (1 + |v|) into their mean.
std::vector<double> cluster(std::vector<double> values, double tol);

} // namespace delaymargin::numeric
