#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "delaymargin/delays.hpp"
#include "delaymargin/errors.hpp"
#include "delaymargin/line_terms.hpp"

namespace delaymargin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLZeroTol = 1e-10;
constexpr double kTieTol = 1e-10;
constexpr std::size_t kPolynomialOrderLimit = 30;

using numeric::sign;

std::string describe(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

double axis_cap(const LineTerms& terms, double base) {
    double cap = base > 0.0 ? base : 10.0 * (1.0 + terms.feature_scale());
    if (terms.order() <= kPolynomialOrderLimit && terms.order() > 0) {
        const auto num = terms.log_magnitude_d1_numerator();
        if (!num.is_zero() && num.degree() > 0) {
            const auto roots = nonnegative_real_roots(num);
            if (!roots.empty()) {
                cap = std::max(cap, 2.0 * roots.back());
            }
        }
    }
    for (int doubling = 0; doubling < 80; ++doubling) {
        const int s_l = sign(terms.log_magnitude(cap));
        const int s_lp = sign(terms.log_magnitude_d1(cap));
        bool settled = s_l < 0;
        for (int k = 1; k <= 16 && settled; ++k) {
            const double x = cap * (1.0 + k / 16.0);
            settled = sign(terms.log_magnitude(x)) == s_l && sign(terms.log_magnitude_d1(x)) == s_lp;
        }
        if (settled) {
            return cap;
        }
        cap *= 2.0;
    }
    return cap;
}

std::vector<double> magnitude_critical_points(const LineTerms& terms, double cap, numeric::BisectTol tol) {
    const auto f = [&terms](double w) { return terms.log_magnitude_d1(w); };
    std::vector<double> zeros;
    if (terms.order() <= kPolynomialOrderLimit) {
        const auto num = terms.log_magnitude_d1_numerator();
        if (num.is_zero()) {
            return {};
        }
        for (double r : nonnegative_real_roots(num)) {
            double z = r;
            for (double rel : {1e-10, 1e-8, 1e-6}) {
                const double d = rel * (1.0 + r);
                const double a = std::max(0.0, r - d);
                const double fa = f(a);
                if (sign(fa) * sign(f(r + d)) < 0) {
                    z = numeric::bisect(f, a, r + d, fa, tol);
                    break;
                }
            }
            zeros.push_back(z);
        }
        zeros = numeric::cluster(std::move(zeros), kDefaultClusterTol);
    } else {
        zeros = adaptive_scan_zeros(terms, f, cap, 2 * terms.order(), tol);
    }
    std::vector<double> out;
    for (double z : zeros) {
        if (z > 1e-12 && z <= cap) {
            out.push_back(z);
        }
    }
    return out;
}

double base_delay(const PoleZeroGain& plant, double omega) {
    const double theta = std::arg(eval(plant, Complex{0.0, omega}));
    double r = std::fmod(theta - kPi, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r > kTwoPi - 1e-9 || r < 1e-12) {
        r = 0.0;
    }
    return r / omega;
}

} // namespace

DelayAnalysis imaginary_axis_analysis(const PoleZeroGain& plant, double h_max, const AnalysisOptions& opts) {
    validate(plant);
    if (!(h_max > 0.0) || !std::isfinite(h_max)) {
        throw Error(ErrorKind::InvalidArgument, "h_max must be positive and finite");
    }
    DelayAnalysis out;
    out.sigma0 = 0.0;
    if (is_biproper(plant) && std::abs(plant.gain) >= 1.0) {
        out.flag = VerdictFlag::biproper_unit_or_more;
        out.h_cap = 0.0;
        DelayIntervalReport r;
        r.h_hi = h_max;
        r.hi_closed = true;
        r.infinite_roots = true;
        out.reports.push_back(r);
        return out;
    }
    // Roots at the origin only touch w = 0, which is never a crossing here.
    for (const auto* roots : {&plant.zeros, &plant.poles}) {
        for (const auto& r : *roots) {
            if (std::abs(r.real()) < 1e-8 && r != Complex{}) {
                throw Error(ErrorKind::BoundaryClearance, "pole or zero on the imaginary axis");
            }
        }
    }

    const LineTerms terms(plant, 0.0, true);
    const auto L = [&terms](double w) { return terms.log_magnitude(w); };
    const double cap = axis_cap(terms, opts.omega_cap);
    const double l_inf = is_biproper(plant) ? std::log(std::abs(plant.gain)) : -kInf;

    std::vector<double> pts{0.0};
    for (double c : magnitude_critical_points(terms, cap, opts.bisect_tol)) {
        if (c > pts.back()) {
            pts.push_back(c);
        }
    }
    pts.push_back(kInf);

    std::vector<CriticalFrequency> freqs;
    const auto add_crossing = [&](double w, int direction, bool tangential) {
        freqs.push_back({w, direction, base_delay(plant, w), tangential});
    };

    // |G(0)| = 1 is harmless when G(0) = +1: 1 + G(0) != 0.
    const double l0 = L(0.0);
    if (std::abs(l0) <= kLZeroTol && eval(plant, Complex{0.0, 0.0}).real() < 0.0) {
        throw Error(ErrorKind::CriticalFrequencyZero, "G(0) = -1: s = 0 is a root for every delay");
    }

    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double b = pts[i + 1];
        const double la = L(a);
        const double lb = b == kInf ? l_inf : L(b);
        const bool za = std::abs(la) <= kLZeroTol;
        const bool zb = b != kInf && std::abs(lb) <= kLZeroTol;

        if (za && a > 0.0) {
            const double d = 1e-6 * (1.0 + a);
            const int left = sign(L(a - d));
            const int right = sign(L(a + d));
            if (left == right) {
                add_crossing(a, 0, true);
            } else {
                add_crossing(a, -sign(static_cast<double>(right - left)), false);
            }
        }
        if (za || zb || sign(la) * sign(lb) >= 0) {
            continue;
        }
        double hi = b;
        if (b == kInf) {
            hi = std::max({2.0 * a, cap, 1.0});
            for (int k = 0; k < 200 && sign(L(hi)) == sign(la); ++k) {
                hi *= 2.0;
            }
        }
        const double w0 = numeric::bisect(L, a, hi, la, opts.bisect_tol);
        add_crossing(w0, -sign(terms.log_magnitude_d1(w0)), false);
    }
    std::sort(freqs.begin(), freqs.end(),
              [](const CriticalFrequency& x, const CriticalFrequency& y) { return x.omega < y.omega; });
    out.critical_frequencies = freqs;

    for (const auto& f : freqs) {
        const double period = kTwoPi / f.omega;
        for (int k = 0;; ++k) {
            const double h = f.base_delay + k * period;
            if (h > h_max) {
                break;
            }
            out.events.push_back({h, f.omega, Complex{0.0, f.omega}, f.direction, -1, 0.0});
            if (out.events.size() > opts.max_events) {
                throw Error(ErrorKind::DidNotConverge, "too many crossings below h_max");
            }
        }
    }
    std::sort(out.events.begin(), out.events.end(), [](const CrossingEvent& x, const CrossingEvent& y) {
        return x.delay != y.delay ? x.delay < y.delay : x.omega < y.omega;
    });

    const auto census = closed_loop_census(plant, 0.0);
    int count = census.inside;
    int at_zero = 0;
    for (const auto& e : out.events) {
        if (e.delay == 0.0) {
            at_zero += 2;
            count += e.direction > 0 ? 2 : 0;
        }
    }
    if (at_zero != census.on_boundary) {
        out.warnings.push_back("roots on the imaginary axis at h = 0 (" + std::to_string(census.on_boundary) +
                               ") do not match the crossings found there (" + std::to_string(at_zero) + ")");
    }
    out.initial_count = count;

    double h_lo = 0.0;
    bool lo_closed = at_zero == 0 && census.on_boundary == 0;
    double last_delay = -1.0;
    for (const auto& e : out.events) {
        if (e.delay == 0.0) {
            continue;
        }
        if (last_delay >= 0.0 && std::abs(e.delay - last_delay) <= kTieTol * (1.0 + e.delay)) {
            out.reports.back().events_at_hi.push_back(e);
        } else {
            DelayIntervalReport r;
            r.h_lo = h_lo;
            r.h_hi = e.delay;
            r.count = count;
            r.lo_closed = lo_closed;
            r.events_at_hi.push_back(e);
            out.reports.push_back(std::move(r));
            h_lo = e.delay;
            lo_closed = false;
        }
        last_delay = e.delay;
        count += 2 * e.direction;
        if (count < 0) {
            throw Error(ErrorKind::NegativeCount, "root count dropped below zero at h = " + describe(e.delay));
        }
    }
    DelayIntervalReport last;
    last.h_lo = h_lo;
    last.h_hi = h_max;
    last.count = count;
    last.lo_closed = lo_closed;
    last.hi_closed = true;
    out.reports.push_back(std::move(last));
    return out;
}

} // namespace delaymargin
