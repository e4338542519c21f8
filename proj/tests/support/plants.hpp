#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "delaymargin/plant.hpp"

namespace support {

using delaymargin::Complex;
using delaymargin::PoleZeroGain;

// (2s^2 + s + 3) / (s^3 + 2s^2 + 3s + 4)
inline PoleZeroGain example_plant() {
    const std::vector<double> num{3, 1, 2};
    const std::vector<double> den{4, 3, 2, 1};
    return delaymargin::from_rational(num, den);
}

// 1 / (s^3 + s^2 + 2s + 1)
inline PoleZeroGain cubic_plant() {
    const std::vector<double> num{1};
    const std::vector<double> den{1, 2, 1, 1};
    return delaymargin::from_rational(num, den);
}

// s / (s^2 + s + 1)
inline PoleZeroGain derivative_plant() {
    const std::vector<double> num{0, 1};
    const std::vector<double> den{1, 1, 1};
    return delaymargin::from_rational(num, den);
}

// -(s + 2) / (s^2 + s + 4)
inline PoleZeroGain negative_gain_plant() {
    const std::vector<double> num{-2, -1};
    const std::vector<double> den{4, 1, 1};
    return delaymargin::from_rational(num, den);
}

// (k - tau s) / s
inline PoleZeroGain integrator_with_rhp_zero(double k, double tau) {
    const std::vector<double> num{k, -tau};
    const std::vector<double> den{0, 1};
    return delaymargin::from_rational(num, den);
}

// prod_{n=1}^{terms} (1 + s/(n^2 pi^2)) / (1 + s/((n - 1/2)^2 pi^2))
inline PoleZeroGain heat_plant(int terms = 100) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    PoleZeroGain g;
    g.gain = 1.0;
    for (int n = 1; n <= terms; ++n) {
        const double zn = n * n * pi2;
        const double pn = (n - 0.5) * (n - 0.5) * pi2;
        g.zeros.emplace_back(-zn, 0.0);
        g.poles.emplace_back(-pn, 0.0);
        g.gain *= pn / zn;
    }
    return g;
}

inline double closed_loop_residual(const PoleZeroGain& g, double h, Complex s) {
    return std::abs(1.0 + delaymargin::eval(g, s) * std::exp(-h * s));
}

template <class F>
double central_difference(F&& f, double x, double step) {
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

// Random strictly proper, conjugate-closed plant: up to max_poles poles and
// fewer zeros, each a real root or a conjugate pair in [lo, hi] x [-5j, 5j].
struct RandomPlantSpec {
    int max_poles = 6;
    double re_lo = -5.0;
    double re_hi = 1.0;
    double im_max = 5.0;
};

inline std::vector<Complex> random_roots(std::mt19937_64& rng, int count, const RandomPlantSpec& spec) {
    std::uniform_real_distribution<double> re(spec.re_lo, spec.re_hi);
    std::uniform_real_distribution<double> im(0.05, spec.im_max);
    std::bernoulli_distribution pair(0.5);
    std::vector<Complex> out;
    while (static_cast<int>(out.size()) < count) {
        if (count - static_cast<int>(out.size()) >= 2 && pair(rng)) {
            const Complex r{re(rng), im(rng)};
            out.push_back(r);
            out.push_back(std::conj(r));
        } else {
            out.emplace_back(re(rng), 0.0);
        }
    }
    return out;
}

inline PoleZeroGain random_strictly_proper(std::mt19937_64& rng, const RandomPlantSpec& spec = {}) {
    std::uniform_int_distribution<int> n_dist(1, spec.max_poles);
    const int n = n_dist(rng);
    std::uniform_int_distribution<int> m_dist(0, n - 1);
    const int m = m_dist(rng);
    std::uniform_real_distribution<double> mag(0.2, 5.0);
    std::bernoulli_distribution negative(0.5);
    PoleZeroGain g;
    g.gain = mag(rng) * (negative(rng) ? -1.0 : 1.0);
    g.poles = random_roots(rng, n, spec);
    g.zeros = random_roots(rng, m, spec);
    return g;
}

// sigma0 in [lo, hi] at least `clearance` away from every pole and zero.
inline double random_sigma(std::mt19937_64& rng, const PoleZeroGain& g, double lo, double hi, double clearance) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double s = dist(rng);
        if (delaymargin::boundary_clearance(g, {s, 1e-8}) >= clearance) {
            return s;
        }
    }
    return dist(rng);
}

} // namespace support
