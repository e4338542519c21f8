#include "delaymargin/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

// Plants up to this many poles + zeros use the explicit numerator
// polynomials; larger ones scan the stable sum forms instead.
constexpr std::size_t kPolynomialOrderLimit = 30;

// H within this distance of zero counts as zero in Algorithm 1's case split.
constexpr double kHZeroTol = 1e-10;

using numeric::sign;

// Snaps an approximate zero of f onto a bracketed sign change nearby.
template <class F>
double polish_zero(F&& f, double r, numeric::BisectTol tol) {
    for (double rel : {1e-10, 1e-8, 1e-6}) {
        const double delta = rel * (1.0 + r);
        const double a = std::max(0.0, r - delta);
        const double b = r + delta;
        const double fa = f(a);
        const double fb = f(b);
        if (fa == 0.0) {
            return a;
        }
        if (fb == 0.0) {
            return b;
        }
        if ((fa < 0.0) != (fb < 0.0)) {
            return numeric::bisect(f, a, b, fa, tol);
        }
    }
    return r;
}

std::vector<double> positive_only(std::vector<double> zeros, double cap) {
    std::vector<double> out;
    for (double z : zeros) {
        if (z > 1e-12 && z <= cap) {
            out.push_back(z);
        }
    }
    return out;
}

template <class F, class N>
std::vector<double> zeros_of(const BoundaryFunctions& bf, F&& f, N&& make_numerator, std::size_t degree_bound,
                             double cap) {
    const auto tol = bf.bisect_tol();
    std::vector<double> zeros;
    if (bf.terms().order() <= kPolynomialOrderLimit) {
        const RealPolynomial numerator = make_numerator();
        if (numerator.is_zero()) {
            return {};
        }
        for (double r : nonnegative_real_roots(numerator)) {
            zeros.push_back(polish_zero(f, r, tol));
        }
        zeros = numeric::cluster(std::move(zeros), kDefaultClusterTol);
    } else {
        zeros = adaptive_scan_zeros(bf.terms(), f, cap, degree_bound, tol);
    }
    return positive_only(std::move(zeros), cap);
}

// Smallest B >= start where sign(f(B)) == target, by doubling.
template <class F>
double expand_until(F&& f, double start, int target) {
    double b = std::max(start, 1.0);
    for (int i = 0; i < 200; ++i) {
        if (sign(f(b)) == target) {
            return b;
        }
        b *= 2.0;
    }
    throw Error(ErrorKind::DidNotConverge, "bracket expansion towards infinity failed");
}

double interior_point(double lo, double hi, double cap) {
    if (hi != kInf) {
        return 0.5 * (lo + hi);
    }
    if (lo < cap) {
        return 0.5 * (lo + cap);
    }
    return lo + std::max(1.0, lo);
}

PoleZeroGain validated(PoleZeroGain plant) {
    validate(plant);
    return plant;
}

} // namespace

BoundaryFunctions::BoundaryFunctions(PoleZeroGain plant, double sigma0, double clearance_tol,
                                     numeric::BisectTol bisect_tol)
    : plant_(validated(std::move(plant))), terms_(plant_, sigma0), bisect_tol_(bisect_tol) {
    if (!(sigma0 < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "boundary functions need sigma0 < 0");
    }
    const double clearance = boundary_clearance(plant_, {sigma0, clearance_tol});
    if (clearance < clearance_tol) {
        std::ostringstream msg;
        msg << "pole/zero within " << clearance << " of Re(s) = " << sigma0;
        throw Error(ErrorKind::BoundaryClearance, msg.str());
    }
}

double BoundaryFunctions::H_at_infinity() const {
    if (is_biproper(plant_)) {
        return std::log(std::abs(plant_.gain)) / sigma0();
    }
    return kInf;
}

double BoundaryFunctions::phi_prime_scale(double w) const {
    double acc = 0.0;
    for (const auto* terms : {&terms_.zeros(), &terms_.poles()}) {
        for (const auto& t : *terms) {
            const double dw = w - t.omega_r;
            acc += std::abs(t.dsigma) / (t.dsigma * t.dsigma + dw * dw);
        }
    }
    return acc + std::abs(H(w)) + std::abs(w * H_prime(w)) + std::abs(std::log(std::abs(plant_.gain)) / sigma0());
}

double BoundaryFunctions::H_prime_scale(double w) const {
    double acc = 0.0;
    for (const auto* terms : {&terms_.zeros(), &terms_.poles()}) {
        for (const auto& t : *terms) {
            const double dw = w - t.omega_r;
            acc += std::abs(dw) / (t.dsigma * t.dsigma + dw * dw);
        }
    }
    return acc / std::abs(sigma0());
}

double default_omega_cap(const BoundaryFunctions& bf, double base) {
    const auto& terms = bf.terms();
    double cap = base > 0.0 ? base : 10.0 * (1.0 + terms.feature_scale());
    if (terms.order() <= kPolynomialOrderLimit && terms.order() > 0) {
        for (const auto& p : {bf.h_prime_numerator(), bf.phi_dd_numerator()}) {
            if (!p.is_zero() && p.degree() > 0) {
                const auto roots = nonnegative_real_roots(p);
                if (!roots.empty()) {
                    cap = std::max(cap, 2.0 * roots.back());
                }
            }
        }
    }

    const bool strictly_proper = !is_biproper(bf.plant());
    const double h_inf = bf.H_at_infinity();
    for (int doubling = 0; doubling < 80; ++doubling) {
        bool settled = true;
        const int s_h = sign(bf.H(cap));
        const int s_hp = sign(bf.H_prime(cap));
        const int s_pp = sign(bf.phi_prime(cap));
        const int s_ppp = sign(bf.phi_double_prime(cap));
        for (int k = 1; k <= 16 && settled; ++k) {
            const double x = cap * (1.0 + k / 16.0);
            settled = sign(bf.H(x)) == s_h && sign(bf.H_prime(x)) == s_hp && sign(bf.phi_prime(x)) == s_pp &&
                      sign(bf.phi_double_prime(x)) == s_ppp;
        }
        if (settled && strictly_proper) {
            settled = s_h > 0 && s_hp > 0 && s_pp < 0 && s_ppp < 0;
        } else if (settled && h_inf > 0.0) {
            settled = s_h > 0 && s_pp < 0;
        } else if (settled && h_inf < 0.0) {
            settled = s_h < 0;
        }
        if (settled) {
            return cap;
        }
        cap *= 2.0;
    }
    return cap;
}

std::vector<double> critical_points_H(const BoundaryFunctions& bf, double omega_cap) {
    const auto f = [&bf](double w) { return bf.H_prime(w); };
    return zeros_of(bf, f, [&bf] { return bf.h_prime_numerator(); }, 2 * bf.terms().order(), omega_cap);
}

std::vector<double> critical_points_phi_prime(const BoundaryFunctions& bf, double omega_cap) {
    const auto f = [&bf](double w) { return bf.phi_double_prime(w); };
    return zeros_of(bf, f, [&bf] { return bf.phi_dd_numerator(); }, 4 * bf.terms().order(), omega_cap);
}

std::vector<double> phi_prime_zeros(const BoundaryFunctions& bf, double omega_cap) {
    const auto f = [&bf](double w) { return bf.phi_prime(w); };
    const auto is_zero = [&bf](double w, double v) { return std::abs(v) <= 1e-11 * bf.phi_prime_scale(w); };

    std::vector<double> pts{0.0};
    for (double c : critical_points_phi_prime(bf, omega_cap)) {
        if (c > pts.back()) {
            pts.push_back(c);
        }
    }
    if (omega_cap > pts.back()) {
        pts.push_back(omega_cap);
    }

    std::vector<double> zeros;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double b = pts[i + 1];
        const double fa = f(a);
        const double fb = f(b);
        if (is_zero(a, fa)) {
            zeros.push_back(a);
        }
        if (is_zero(b, fb)) {
            zeros.push_back(b);
        }
        if (!is_zero(a, fa) && !is_zero(b, fb) && sign(fa) * sign(fb) < 0) {
            zeros.push_back(numeric::bisect(f, a, b, fa, bf.bisect_tol()));
        }
    }
    return positive_only(numeric::cluster(std::move(zeros), 1e-10), omega_cap * (1.0 - 1e-12));
}

std::vector<FeasibleInterval> feasible_intervals(const BoundaryFunctions& bf, double omega_cap) {
    const auto H = [&bf](double w) { return bf.H(w); };
    const double h_inf = bf.H_at_infinity();
    const auto sign_tol = [](double v) { return std::abs(v) <= kHZeroTol ? 0 : sign(v); };

    std::vector<double> pts{0.0};
    for (double c : critical_points_H(bf, omega_cap)) {
        if (c > pts.back()) {
            pts.push_back(c);
        }
    }
    pts.push_back(kInf);

    std::vector<FeasibleInterval> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double b = pts[i + 1];
        const double ha = H(a);
        const double hb = b == kInf ? h_inf : H(b);
        const int sa = sign_tol(ha);
        const int sb = b == kInf ? sign(hb) : sign_tol(hb);

        if (sa >= 0 && sb >= 0) {
            out.push_back({a, b, false});
        } else if (sa < 0 && sb < 0) {
            continue;
        } else if (sa == 0 && sb < 0) {
            out.push_back({a, a, true});
        } else if (sa < 0 && sb == 0) {
            out.push_back({b, b, true});
        } else {
            const double hi = b == kInf ? expand_until(H, std::max(2.0 * a, omega_cap), sb) : b;
            const double w0 = numeric::bisect(H, a, hi, ha, bf.bisect_tol());
            if (hb > ha) {
                out.push_back({w0, b, false});
            } else {
                out.push_back({a, w0, false});
            }
        }
    }

    // An isolated point already covered by a neighbouring interval is dropped.
    std::vector<FeasibleInterval> kept;
    for (const auto& f : out) {
        if (f.isolated) {
            const bool covered = std::any_of(out.begin(), out.end(), [&f](const FeasibleInterval& g) {
                return !g.isolated && g.omega_lo <= f.omega_lo && f.omega_lo <= g.omega_hi;
            });
            if (covered) {
                continue;
            }
        }
        kept.push_back(f);
    }
    return kept;
}

std::vector<DirectionInterval> direction_intervals(const BoundaryFunctions& bf, double omega_cap) {
    std::vector<double> bounds{0.0};
    for (double z : phi_prime_zeros(bf, omega_cap)) {
        if (z > bounds.back()) {
            bounds.push_back(z);
        }
    }
    bounds.push_back(kInf);

    std::vector<DirectionInterval> out;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const double lo = bounds[i];
        const double hi = bounds[i + 1];
        const int s = sign(bf.phi_prime(interior_point(lo, hi, omega_cap)));
        out.push_back({lo, hi, s});
    }
    return out;
}

int crossing_direction(double sigma0, int phi_sign) {
    return sign(sigma0) * phi_sign;
}

std::vector<BoundaryInterval> intersect(std::span<const FeasibleInterval> feasible,
                                        std::span<const DirectionInterval> direction,
                                        const BoundaryFunctions& bf) {
    auto annotate = [&bf](double lo, double hi, int phi_sign, bool tangential) {
        BoundaryInterval bi;
        bi.omega_lo = lo;
        bi.omega_hi = hi;
        bi.tangential = tangential;
        bi.phi_sign = phi_sign;
        bi.crossing_direction = crossing_direction(bf.sigma0(), phi_sign);
        if (tangential) {
            bi.h_sign = 0;
        } else {
            const double mid = hi == kInf ? lo + std::max(1.0, lo) : 0.5 * (lo + hi);
            bi.h_sign = sign(bf.H_prime(mid));
            if (bi.h_sign == 0) {
                bi.h_sign = hi == kInf ? sign(bf.H_at_infinity() - bf.H(lo)) : sign(bf.H(hi) - bf.H(lo));
            }
        }
        bi.phi_lo = bf.phi(lo);
        bi.h_lo = bf.H(lo);
        if (hi == kInf) {
            bi.phi_hi = phi_sign < 0 ? -kInf : kInf;
            bi.h_hi = bf.H_at_infinity();
        } else {
            bi.phi_hi = bf.phi(hi);
            bi.h_hi = bf.H(hi);
        }
        return bi;
    };

    std::vector<BoundaryInterval> out;
    for (const auto& f : feasible) {
        for (const auto& d : direction) {
            if (f.isolated) {
                if (d.omega_lo <= f.omega_lo && f.omega_lo <= d.omega_hi) {
                    out.push_back(annotate(f.omega_lo, f.omega_lo, d.phi_sign, true));
                    break;
                }
                continue;
            }
            const double lo = std::max(f.omega_lo, d.omega_lo);
            const double hi = std::min(f.omega_hi, d.omega_hi);
            if (hi == kInf ? lo < kInf : hi - lo > 1e-12 * (1.0 + lo)) {
                out.push_back(annotate(lo, hi, d.phi_sign, false));
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const BoundaryInterval& a, const BoundaryInterval& b) { return a.omega_lo < b.omega_lo; });
    return out;
}

std::vector<GuardHit> multiplicity_guard(const BoundaryFunctions& bf, double omega_cap) {
    std::vector<double> candidates{0.0};
    for (double c : critical_points_H(bf, omega_cap)) {
        candidates.push_back(c);
    }
    const auto phi_zeros = phi_prime_zeros(bf, omega_cap);

    std::vector<GuardHit> hits;
    for (double w : candidates) {
        const bool phi_flat =
            std::abs(bf.phi_prime(w)) <= 1e-9 * bf.phi_prime_scale(w) ||
            std::any_of(phi_zeros.begin(), phi_zeros.end(), [w](double z) { return std::abs(z - w) <= 1e-9 * (1.0 + w); });
        if (!phi_flat) {
            continue;
        }
        const double h0 = bf.H(w);
        if (h0 < -kHZeroTol) {
            continue;
        }
        const Complex s0{bf.sigma0(), w};
        const Complex f = 1.0 + eval(bf.plant(), s0) * std::exp(-std::max(h0, 0.0) * s0);
        if (std::abs(f) < 1e-8) {
            hits.push_back({w, std::max(h0, 0.0)});
        }
    }
    return hits;
}

BoundaryAnalysis analyze_boundary(const BoundaryFunctions& bf, double omega_cap_base) {
    BoundaryAnalysis out;
    out.omega_cap = default_omega_cap(bf, omega_cap_base);
    out.feasible = feasible_intervals(bf, out.omega_cap);
    out.direction = direction_intervals(bf, out.omega_cap);
    out.intervals = intersect(out.feasible, out.direction, bf);
    return out;
}

} // namespace delaymargin
