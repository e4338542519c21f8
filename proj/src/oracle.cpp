#include "delaymargin/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxEvaluations = std::size_t{1} << 20;

Complex closed_loop(const PoleZeroGain& plant, double h, Complex s) {
    return 1.0 + eval(plant, s) * std::exp(-h * s);
}

struct Winding {
    double total = 0.0;
    double min_left = std::numeric_limits<double>::infinity();
    bool degenerate = false;
};

class ContourWalker {
public:
    ContourWalker(const PoleZeroGain& plant, double h) : plant_(plant), h_(h) {}

    // Accumulates arg change of the closed loop along the segment a -> b.
    void edge(Complex a, Complex b, int pieces, bool left_edge, Winding& w) {
        const auto ts = edge_grid(a, b, pieces);
        Complex prev_s = a;
        Complex prev_f = value(a, left_edge, w);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const Complex s = a + (b - a) * ts[i];
            const Complex f = value(s, left_edge, w);
            refine(prev_s, prev_f, s, f, left_edge, w, 0);
            prev_s = s;
            prev_f = f;
        }
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    // Uniform parameters on [0, 1] plus clusters around the projection of
    // every pole and zero of G, spaced by its distance from the edge.
    std::vector<double> edge_grid(Complex a, Complex b, int pieces) const {
        std::vector<double> ts;
        ts.reserve(static_cast<std::size_t>(pieces) + 1);
        for (int i = 0; i <= pieces; ++i) {
            ts.push_back(static_cast<double>(i) / pieces);
        }
        const Complex dir = b - a;
        const double length = std::abs(dir);
        const Complex unit = dir / length;
        for (const auto* roots : {&plant_.zeros, &plant_.poles}) {
            for (const auto& r : *roots) {
                const Complex rel = (r - a) / unit;
                const double along = rel.real() / length;
                const double across = std::max(std::abs(rel.imag()), 1e-12 * (1.0 + std::abs(r))) / length;
                if (along + 64.0 * across < 0.0 || along - 64.0 * across > 1.0) {
                    continue;
                }
                for (double u : {0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
                    for (double t : {along + u * across, along - u * across}) {
                        if (t > 0.0 && t < 1.0) {
                            ts.push_back(t);
                        }
                    }
                }
            }
        }
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        return ts;
    }

    Complex value(Complex s, bool left_edge, Winding& w) {
        if (++evaluations_ > kMaxEvaluations) {
            throw Error(ErrorKind::DidNotConverge, "argument principle sampling exceeded its budget");
        }
        Complex f;
        try {
            f = closed_loop(plant_, h_, s);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleEvaluation) {
                throw;
            }
            w.degenerate = true;
            return Complex{1.0, 0.0};
        }
        const double mag = std::abs(f);
        if (left_edge) {
            w.min_left = std::min(w.min_left, mag);
        } else if (mag < 1e-12 || !std::isfinite(mag)) {
            w.degenerate = true;
        }
        return f;
    }

    void refine(Complex sa, Complex fa, Complex sb, Complex fb, bool left_edge, Winding& w, int depth) {
        const double d = std::arg(fb / fa);
        if (std::abs(d) <= 0.5 * kPi || depth >= 50) {
            w.total += d;
            return;
        }
        const Complex sm = 0.5 * (sa + sb);
        const Complex fm = value(sm, left_edge, w);
        refine(sa, fa, sm, fm, left_edge, w, depth + 1);
        refine(sm, fm, sb, fb, left_edge, w, depth + 1);
    }

    const PoleZeroGain& plant_;
    double h_;
    std::size_t evaluations_ = 0;
};

double magnitude_bound(const PoleZeroGain& plant, double r) {
    double log_bound = std::log(std::abs(plant.gain));
    for (const auto& z : plant.zeros) {
        log_bound += std::log(r + std::abs(z));
    }
    for (const auto& p : plant.poles) {
        log_bound -= std::log(r - std::abs(p));
    }
    return log_bound;
}

} // namespace

CountRegion enclosure_bounds(const PoleZeroGain& plant, double h, double sigma0) {
    validate(plant);
    if (is_biproper(plant)) {
        if (std::abs(plant.gain) >= 1.0) {
            throw Error(ErrorKind::UnboundedRegion, "bi-proper plant with |d| >= 1 has roots at any radius");
        }
        if (sigma0 < 0.0 && h >= std::log(std::abs(plant.gain)) / sigma0) {
            throw Error(ErrorKind::UnboundedRegion, "delay at or past the bi-proper cap");
        }
    }
    double biggest = std::abs(sigma0);
    for (const auto* roots : {&plant.zeros, &plant.poles}) {
        for (const auto& r : *roots) {
            biggest = std::max(biggest, std::abs(r));
        }
    }
    double r = 2.0 * biggest + 1.0;
    const double target = h * sigma0;
    for (int i = 0; i < 200; ++i) {
        if (magnitude_bound(plant, r) < target) {
            const double size = 1.1 * r;
            return {sigma0, size, size};
        }
        r *= 2.0;
    }
    throw Error(ErrorKind::UnboundedRegion, "no finite enclosure for the roots");
}

int count_roots(const PoleZeroGain& plant, double h, const CountRegion& region, int initial_samples) {
    validate(plant);
    if (!(region.real_max > region.sigma0) || !(region.imag_max > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "empty counting region");
    }
    // A pole or zero of G on the left edge makes the closed loop large or
    // close to 1 nearby, never zero; step just past it.
    double left = region.sigma0;
    const double shift = 1e-8 * (1.0 + std::abs(left));
    for (const auto* roots : {&plant.zeros, &plant.poles}) {
        for (const auto& r : *roots) {
            if (std::abs(r.real() - region.sigma0) < shift) {
                left = region.sigma0 - shift;
            }
        }
    }

    double real_max = region.real_max;
    double imag_max = region.imag_max;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        const Complex c0{left, -imag_max};
        const Complex c1{real_max, -imag_max};
        const Complex c2{real_max, imag_max};
        const Complex c3{left, imag_max};

        // The delay term turns the phase by h per unit of frequency on the
        // vertical edges; sample finely enough that no full turn is skipped.
        const double width = real_max - left;
        const auto pieces = [&](double length, double spacing) {
            const double n = std::ceil(length / spacing);
            if (n > static_cast<double>(kMaxEvaluations)) {
                throw Error(ErrorKind::DidNotConverge, "counting region too large to sample");
            }
            return std::max(initial_samples, static_cast<int>(n));
        };
        double vertical = 2.0 * imag_max / initial_samples;
        if (h > 0.0) {
            vertical = std::min(vertical, 0.25 * kPi / h);
        }
        const int n_vertical = pieces(2.0 * imag_max, vertical);
        const int n_horizontal = pieces(width, width / initial_samples);

        ContourWalker walker(plant, h);
        Winding w;
        walker.edge(c0, c1, n_horizontal, false, w);
        walker.edge(c1, c2, n_vertical, false, w);
        walker.edge(c2, c3, n_horizontal, false, w);
        walker.edge(c3, c0, n_vertical, true, w);

        if (w.min_left < 1e-9) {
            throw Error(ErrorKind::BoundaryRoot, "closed-loop root on the left edge of the counting region");
        }
        if (w.degenerate) {
            real_max *= 1.0 + 1e-3;
            imag_max *= 1.0 + 1e-3;
            continue;
        }
        const double turns = w.total / (2.0 * kPi);
        const double rounded = std::round(turns);
        if (std::abs(turns - rounded) > 0.05) {
            real_max *= 1.0 + 1e-3;
            imag_max *= 1.0 + 1e-3;
            continue;
        }
        int poles_inside = 0;
        for (const auto& p : plant.poles) {
            if (p.real() > left && p.real() < real_max && std::abs(p.imag()) < imag_max) {
                ++poles_inside;
            }
        }
        return static_cast<int>(rounded) + poles_inside;
    }
    throw Error(ErrorKind::DidNotConverge, "argument principle count did not settle");
}

int count_roots_right_of(const PoleZeroGain& plant, double h, double sigma0) {
    return count_roots(plant, h, enclosure_bounds(plant, h, sigma0));
}

Complex refine_root(const PoleZeroGain& plant, double h, Complex guess) {
    Complex s = guess;
    for (int iter = 0; iter < 50; ++iter) {
        const Complex g = eval(plant, s) * std::exp(-h * s);
        const Complex f = 1.0 + g;
        if (std::abs(f) < 1e-12) {
            return s;
        }
        const Complex df = g * (log_derivative(plant, s) - h);
        if (std::abs(df) == 0.0) {
            break;
        }
        s -= f / df;
    }
    const Complex f = 1.0 + eval(plant, s) * std::exp(-h * s);
    if (std::abs(f) < 1e-10) {
        return s;
    }
    throw Error(ErrorKind::DidNotConverge, "Newton refinement of a characteristic root failed");
}

int numeric_crossing_direction(const PoleZeroGain& plant, double h0, Complex s0, double delta) {
    const Complex root = refine_root(plant, h0, s0);
    // Predictor along the branch: ds/dh = s / (G'/G - h).
    const Complex slope = root / (log_derivative(plant, root) - h0);
    const Complex plus = refine_root(plant, h0 + delta, root + delta * slope);
    const Complex minus = refine_root(plant, std::max(0.0, h0 - delta), root - delta * slope);
    const double diff = plus.real() - minus.real();
    return (diff > 0.0) - (diff < 0.0);
}

} // namespace delaymargin
